#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <span>
#include <vector>

#include "oracles.hpp"
#include "popbias/metrics.hpp"
#include "popbias/random.hpp"

using namespace popbias;
namespace mt = popbias::metrics;
using namespace oracles;

namespace {

ItemPopularity pop_of(std::vector<std::uint32_t> c, std::size_t users) {
    ItemPopularity p;
    p.counts = std::move(c);
    p.num_users = users;
    return p;
}

} // namespace

TEST(Rmse, Examples) {
    const std::vector<mt::ScoredPair> exact{{3, 3}, {7, 7}};
    EXPECT_DOUBLE_EQ(*mt::rmse(exact), 0.0);
    const std::vector<mt::ScoredPair> one{{7, 5}};
    EXPECT_DOUBLE_EQ(*mt::rmse(one), 2.0);
    const std::vector<mt::ScoredPair> clamped{{12, 10}, {4, 6}};
    EXPECT_NEAR(*mt::rmse(clamped), 1.41421356237, 1e-10);
    EXPECT_FALSE(mt::rmse({}).has_value());
}

TEST(Ndcg, PerfectOrderIsOne) {
    const std::vector<std::pair<Index, int>> held{{4, 9}, {2, 5}, {7, 3}};
    const std::vector<Index> rec{4, 2, 7};
    EXPECT_NEAR(*mt::ndcg_at_k(rec, held), 1.0, 1e-12);
}

TEST(Ndcg, NoOverlapIsZero) {
    const std::vector<std::pair<Index, int>> held{{4, 9}};
    const std::vector<Index> rec{1, 2, 3};
    EXPECT_EQ(*mt::ndcg_at_k(rec, held), 0.0);
}

TEST(Ndcg, SwappedPair) {
    const std::vector<std::pair<Index, int>> held{{0, 10}, {1, 5}};
    const std::vector<Index> rec{1, 0};
    const double want = (5.0 + 10.0 / std::log2(3.0)) / (10.0 + 5.0 / std::log2(3.0));
    EXPECT_NEAR(*mt::ndcg_at_k(rec, held, 10), want, 1e-12);
    EXPECT_NEAR(want, 0.85972, 1e-5);
}

TEST(Ndcg, EmptyHoldoutExcluded) { EXPECT_FALSE(mt::ndcg_at_k(std::vector<Index>{1}, {}).has_value()); }

TEST(Ndcg, MatchesBruteForce) {
    Rng rng(10);
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t k = 1 + rng.below(10);
        std::map<Index, int> rel;
        const int nh = 1 + static_cast<int>(rng.below(6));
        while (static_cast<int>(rel.size()) < nh) rel[static_cast<Index>(rng.below(20))] = rng.uniform_int(1, 10);
        std::vector<Index> rec(20);
        std::iota(rec.begin(), rec.end(), 0);
        rng.shuffle(std::span<Index>(rec));
        rec.resize(rng.below(15));
        const std::vector<std::pair<Index, int>> held(rel.begin(), rel.end());
        const double want = brute_ndcg(rec, rel, k);
        ASSERT_NEAR(*mt::ndcg_at_k(rec, held, k), want, 1e-9);
    }
}

TEST(Ndcg, IgnoresItemsBeyondK) {
    const std::vector<std::pair<Index, int>> held{{3, 8}, {9, 2}};
    std::vector<Index> a{1, 3, 5}, b{1, 3, 5};
    a.push_back(9);
    b.push_back(11);
    EXPECT_EQ(*mt::ndcg_at_k(a, held, 3), *mt::ndcg_at_k(b, held, 3));
}

TEST(PopCorr, Examples) {
    const auto pop = pop_of({5, 3, 1}, 10);
    EXPECT_NEAR(mt::pop_corr(pop, std::vector<std::uint32_t>{2, 2, 0}), 0.8660254, 1e-7);
    EXPECT_NEAR(mt::pop_corr(pop, std::vector<std::uint32_t>{10, 6, 2}), 1.0, 1e-12);
    EXPECT_EQ(mt::pop_corr(pop, std::vector<std::uint32_t>{4, 4, 4}), 0.0);
}

TEST(PopCorr, SkipsItemsOutsideTrainingCatalog) {
    const auto pop = pop_of({5, 0, 3, 1}, 10);
    EXPECT_NEAR(mt::pop_corr(pop, std::vector<std::uint32_t>{2, 9, 2, 0}), 0.8660254, 1e-7);
}

TEST(PopCorr, MatchesTextbookPearson) {
    Rng rng(12);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<std::uint32_t> c(40), r(40);
        for (auto& x : c) x = 1 + static_cast<std::uint32_t>(rng.below(100));
        for (std::size_t i = 0; i < r.size(); ++i) r[i] = static_cast<std::uint32_t>(rng.below(1 + c[i] / 5));
        const std::vector<double> x(c.begin(), c.end()), y(r.begin(), r.end());
        ASSERT_NEAR(mt::pop_corr(pop_of(c, 200), r), textbook_pearson(x, y), 1e-9);
    }
}

TEST(Arp, Examples) {
    const auto all = pop_of({4, 2, 1}, 4);
    const std::vector<std::vector<Index>> lists{{0}, {0}, {}};
    const auto s = mt::arp(lists, all);
    EXPECT_DOUBLE_EQ(s.mean, 1.0);
    EXPECT_EQ(s.per_user.size(), 2U);

    const auto pop = pop_of({2, 4}, 10);
    const std::vector<std::vector<Index>> one{{0, 1}};
    EXPECT_NEAR(mt::arp(one, pop).mean, 0.3, 1e-12);
    EXPECT_TRUE(std::isnan(mt::arp(std::vector<std::vector<Index>>{{}}, pop).mean));
}

TEST(Pl, Examples) {
    const auto pop = pop_of({2, 4, 8}, 10);
    const std::vector<std::vector<Index>> profiles{{0, 2}, {1}};
    const std::vector<std::vector<Index>> same{{1}, {1}};
    // user 0: profile mean 0.5, recs 0.4 -> -20 %; user 1: equal -> 0.
    const auto s = mt::pl(same, profiles, pop);
    EXPECT_NEAR(s.per_user[0].value, -20.0, 1e-12);
    EXPECT_NEAR(s.per_user[1].value, 0.0, 1e-12);
    const std::vector<std::vector<Index>> doubled{{}, {2}};
    const std::vector<std::vector<Index>> prof1{{}, {1}};
    EXPECT_NEAR(mt::pl(doubled, prof1, pop).mean, 100.0, 1e-12);
}

TEST(Pl, ScaleConsistent) {
    Rng rng(4);
    std::vector<std::uint32_t> c(30);
    for (auto& x : c) x = 1 + static_cast<std::uint32_t>(rng.below(50));
    std::vector<std::vector<Index>> recs(10), profiles(10);
    for (int u = 0; u < 10; ++u)
        for (int k = 0; k < 5; ++k) {
            recs[u].push_back(static_cast<Index>(rng.below(30)));
            profiles[u].push_back(static_cast<Index>(rng.below(30)));
        }
    const auto a = mt::pl(recs, profiles, pop_of(c, 100));
    const auto b = mt::pl(recs, profiles, pop_of(c, 700));
    for (std::size_t k = 0; k < a.per_user.size(); ++k) EXPECT_NEAR(a.per_user[k].value, b.per_user[k].value, 1e-9);
}

TEST(AggDiv, Examples) {
    std::vector<std::vector<Index>> same(5);
    for (auto& l : same)
        for (Index i = 0; i < 10; ++i) l.push_back(i);
    EXPECT_DOUBLE_EQ(mt::agg_div(same, 100), 0.1);
    std::vector<std::vector<Index>> every{{0, 1}, {2}, {3, 0}};
    EXPECT_DOUBLE_EQ(mt::agg_div(every, 4), 1.0);
    EXPECT_DOUBLE_EQ(mt::agg_div(std::vector<std::vector<Index>>{{}, {}}, 4), 0.0);
    EXPECT_THROW(mt::agg_div(every, 0), ValidationError);
}
