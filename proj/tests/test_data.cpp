#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>
#include <string>

#include "helpers.hpp"
#include "popbias/csv_io.hpp"
#include "popbias/popularity.hpp"

using namespace popbias;
using testing_helpers::Triples;

TEST(IdTable, SortedUniqueAndLookup) {
    IdTable t({"b", "a", "b", "c"});
    EXPECT_EQ(t.size(), 3U);
    EXPECT_EQ(t.name(0), "a");
    EXPECT_EQ(t.at("c"), 2U);
    EXPECT_FALSE(t.find("zz").has_value());
    EXPECT_THROW(t.at("zz"), UnknownIdError);
}

TEST(LoadInteractions, ThreePairs) {
    std::istringstream in("user,item\nu1,i1\nu2,i1\nu1,i2\n");
    const auto s = read_interactions(in);
    EXPECT_EQ(s.size(), 3U);
    EXPECT_EQ(s.num_users(), 2U);
    EXPECT_EQ(s.num_items(), 2U);
}

TEST(LoadInteractions, RatingColumnIgnoredAndCrlfAccepted) {
    std::istringstream in("user,item,rating\r\nu1,i1,4\r\nu2,i1,9\r\n");
    EXPECT_EQ(read_interactions(in).size(), 2U);
}

TEST(LoadInteractions, DuplicatePairNamed) {
    std::istringstream in("user,item\nu1,i1\nu1,i1\n");
    try {
        read_interactions(in);
        FAIL();
    } catch (const InputError& e) {
        EXPECT_NE(std::string(e.what()).find("(u1, i1)"), std::string::npos);
    }
}

TEST(LoadInteractions, EmptyInput) {
    std::istringstream empty("");
    EXPECT_THROW(read_interactions(empty), InputError);
    std::istringstream header_only("user,item\n");
    EXPECT_THROW(read_interactions(header_only), InputError);
}

TEST(LoadInteractions, MalformedLineNumber) {
    std::istringstream in("user,item\nu1,i1\nu2\n");
    try {
        read_interactions(in);
        FAIL();
    } catch (const InputError& e) {
        EXPECT_NE(std::string(e.what()).find(":3:"), std::string::npos);
    }
}

TEST(LoadRatings, RangeAndRoundTrip) {
    std::istringstream bad("user,item,rating\nu1,i1,11\n");
    EXPECT_THROW(read_ratings(bad), InputError);
    std::istringstream zero("user,item,rating\nu1,i1,0\n");
    EXPECT_THROW(read_ratings(zero), InputError);

    const auto d = RatingDataset::from_triples({{"u2", "i1", 3}, {"u1", "i2", 10}, {"u1", "i1", 1}});
    std::ostringstream out;
    write_ratings(out, d);
    EXPECT_EQ(out.str(), "user,item,rating\nu1,i1,1\nu1,i2,10\nu2,i1,3\n");
    std::istringstream back(out.str());
    const auto again = read_ratings(back);
    EXPECT_TRUE(std::equal(d.triples().begin(), d.triples().end(), again.triples().begin(), again.triples().end()));
}

TEST(ItemPopularity, CountsAndFractions) {
    const auto s = InteractionSkeleton::from_pairs({{"u1", "i1"}, {"u2", "i1"}, {"u1", "i2"}});
    const auto pop = item_popularity(s);
    const Index i1 = s.items().at("i1"), i2 = s.items().at("i2");
    EXPECT_EQ(pop.counts[i1], 2U);
    EXPECT_EQ(pop.counts[i2], 1U);
    EXPECT_DOUBLE_EQ(pop.fraction(i1), 1.0);
    EXPECT_DOUBLE_EQ(pop.fraction(i2), 0.5);
    EXPECT_EQ(pop.total(), s.size());
}

TEST(ProfileStats, Sizes) {
    const auto s = InteractionSkeleton::from_pairs({{"u1", "i1"}, {"u2", "i1"}, {"u1", "i2"}});
    const auto ps = profile_stats(s);
    EXPECT_EQ(ps.sizes[s.users().at("u1")], 2U);
    EXPECT_EQ(ps.sizes[s.users().at("u2")], 1U);
}

namespace {

ItemPopularity counts_of(std::vector<std::uint32_t> c) {
    ItemPopularity p;
    p.counts = std::move(c);
    p.num_users = 100;
    return p;
}

ProfileStats sizes_of(std::vector<std::uint32_t> s) {
    ProfileStats p;
    p.sizes = std::move(s);
    return p;
}

} // namespace

TEST(NormalizePopularity, LinearMinMax) {
    const auto n = normalize_popularity(counts_of({1, 5, 9}));
    EXPECT_DOUBLE_EQ(n[0], 1.0);
    EXPECT_DOUBLE_EQ(n[1], 5.5);
    EXPECT_DOUBLE_EQ(n[2], 10.0);
    const auto inv = normalize_popularity(counts_of({1, 5, 9}), true);
    EXPECT_DOUBLE_EQ(inv[0], 10.0);
    EXPECT_DOUBLE_EQ(inv[1], 5.5);
    EXPECT_DOUBLE_EQ(inv[2], 1.0);
}

TEST(NormalizePopularity, AllEqual) {
    for (double x : normalize_popularity(counts_of({4, 4, 4}))) EXPECT_DOUBLE_EQ(x, 1.0);
    for (double x : normalize_popularity(counts_of({4, 4, 4}), true)) EXPECT_DOUBLE_EQ(x, 10.0);
}

TEST(NormalizePopularity, MonotoneProperty) {
    Rng rng(6);
    for (int rep = 0; rep < 30; ++rep) {
        std::vector<std::uint32_t> c(40);
        for (auto& x : c) x = 1 + static_cast<std::uint32_t>(rng.below(200));
        const auto n = normalize_popularity(counts_of(c));
        const auto inv = normalize_popularity(counts_of(c), true);
        for (std::size_t i = 0; i < c.size(); ++i)
            for (std::size_t j = 0; j < c.size(); ++j)
                if (c[i] >= c[j]) {
                    EXPECT_GE(n[i], n[j]);
                    EXPECT_LE(inv[i], inv[j]);
                }
    }
}

TEST(TopProfileUsers, LargestTwo) {
    const auto top = top_profile_users(sizes_of({3, 9, 1, 7, 2, 4, 5, 6, 8, 10}), 0.2);
    EXPECT_EQ(top, (std::vector<Index>{1, 9}));
}

TEST(TopProfileUsers, FullFractionAndRange) {
    EXPECT_EQ(top_profile_users(sizes_of({3, 1, 2}), 1.0).size(), 3U);
    EXPECT_THROW(top_profile_users(sizes_of({3}), 0.0), ValidationError);
    EXPECT_THROW(top_profile_users(sizes_of({3}), 1.5), ValidationError);
}

TEST(TopProfileUsers, TieAtCutoffGoesToSmallerId) {
    // Ranks 2 and 3 (users 4 and 7) tie; only one fits.
    const auto top = top_profile_users(sizes_of({1, 2, 3, 4, 8, 5, 6, 8, 3, 10}), 0.2);
    ASSERT_EQ(top.size(), 2U);
    EXPECT_EQ(top, (std::vector<Index>{4, 9}));
}

TEST(TopProfileUsers, SizeIsCeiling) {
    for (std::size_t n : {1, 7, 10, 33, 101})
        for (double f : {0.1, 0.2, 0.25, 0.5, 0.9}) {
            std::vector<std::uint32_t> s(n);
            for (std::size_t k = 0; k < n; ++k) s[k] = static_cast<std::uint32_t>(1 + (k * 7) % 5);
            const auto want = static_cast<std::size_t>(std::ceil(f * static_cast<double>(n) - 1e-9));
            EXPECT_EQ(top_profile_users(sizes_of(s), f).size(), want);
        }
}

TEST(RatingPopularityCorrelation, UndefinedForConstantAverages) {
    const auto d = RatingDataset::from_triples({{"u1", "a", 5}, {"u2", "a", 5}, {"u1", "b", 5}});
    EXPECT_FALSE(rating_popularity_correlation(d).has_value());
}

TEST(RatingPopularityCorrelation, InvariantUnderRelabeling) {
    const auto d = testing_helpers::random_ratings(15, 12, 0.4, 9);
    Triples renamed;
    for (const auto& t : d.triples())
        renamed.emplace_back("x" + std::to_string(997 - t.user), "y" + std::to_string(503 - t.item), t.rating);
    const auto e = RatingDataset::from_triples(renamed);
    EXPECT_NEAR(*rating_popularity_correlation(d), *rating_popularity_correlation(e), 1e-12);
}

TEST(RatingPopularityCorrelation, SubsetUsesFullPopularity) {
    // Item a: 3 raters, b: 2, c: 1. Subset {u1} rates a high, b mid, c low.
    const auto d = RatingDataset::from_triples({{"u1", "a", 9},
                                                {"u2", "a", 1},
                                                {"u3", "a", 1},
                                                {"u1", "b", 5},
                                                {"u2", "b", 5},
                                                {"u1", "c", 1}});
    const std::vector<Index> subset{d.users().at("u1")};
    EXPECT_NEAR(*rating_popularity_correlation(d, std::span<const Index>(subset)), 1.0, 1e-12);
}
