#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "popbias/dataset.hpp"
#include "popbias/error.hpp"
#include "popbias/random.hpp"
#include "popbias/split.hpp"

namespace popbias {

/// User-level k-fold plan. Each user is a test user in exactly one fold; in
/// that fold a share of their ratings is held out and the rest is training.
///
/// The plan depends only on the (user, item) structure and the seed, so one
/// plan serves every scenario synthesized on the same skeleton.
struct FoldPlan {
    int n_folds = 5;
    double holdout_frac = 0.2;
    std::uint64_t seed = 0;
    std::vector<int> fold_of;                     ///< per user; -1 for users without ratings
    std::vector<std::vector<Index>> holdout;      ///< per user, ascending items
    std::vector<Interaction> structure;           ///< the pairs the plan was built on

    std::vector<Index> test_users(int fold) const {
        std::vector<Index> out;
        for (Index u = 0; u < fold_of.size(); ++u)
            if (fold_of[u] == fold) out.push_back(u);
        return out;
    }

    bool is_held_out(Index user, Index item, int fold) const {
        if (user >= fold_of.size() || fold_of[user] != fold) return false;
        const auto& h = holdout[user];
        return std::binary_search(h.begin(), h.end(), item);
    }

    /// Training data of `fold`: everything except the fold's held-out ratings.
    RatingDataset training(const RatingDataset& data, int fold) const {
        check_structure(data);
        return data.filter([&](const RatingTriple& t) { return !is_held_out(t.user, t.item, fold); });
    }

    /// Held-out (item, rating) pairs of a test user.
    std::vector<std::pair<Index, int>> held_ratings(const RatingDataset& data, Index user) const {
        std::vector<std::pair<Index, int>> out;
        const auto triples = data.triples();
        auto it = std::lower_bound(triples.begin(), triples.end(), user,
                                   [](const RatingTriple& t, Index u) { return t.user < u; });
        for (; it != triples.end() && it->user == user; ++it)
            if (std::binary_search(holdout[user].begin(), holdout[user].end(), it->item))
                out.emplace_back(it->item, it->rating);
        return out;
    }

    void check_structure(const RatingDataset& data) const {
        const auto triples = data.triples();
        bool same = triples.size() == structure.size() && data.num_users() == fold_of.size();
        for (std::size_t k = 0; same && k < triples.size(); ++k)
            same = triples[k].user == structure[k].user && triples[k].item == structure[k].item;
        if (!same) throw ValidationError("fold plan was built for a different interaction structure");
    }
};

namespace detail {

template <class Row>
FoldPlan make_folds_impl(std::span<const Row> rows, std::size_t n_users, int n_folds, double holdout_frac,
                         std::uint64_t seed) {
    if (n_folds < 2) throw ValidationError("make_folds: need at least 2 folds");
    if (!(holdout_frac > 0.0 && holdout_frac < 1.0)) throw ValidationError("make_folds: holdout fraction must be in (0, 1)");

    std::vector<std::size_t> offsets(n_users + 1, 0);
    for (const auto& r : rows) ++offsets[r.user + 1];
    for (std::size_t u = 0; u < n_users; ++u) offsets[u + 1] += offsets[u];

    std::vector<Index> users;
    for (Index u = 0; u < n_users; ++u)
        if (offsets[u + 1] > offsets[u]) users.push_back(u);
    if (static_cast<std::size_t>(n_folds) > users.size())
        throw ValidationError("make_folds: " + std::to_string(n_folds) + " folds but only " +
                              std::to_string(users.size()) + " users");

    FoldPlan plan;
    plan.n_folds = n_folds;
    plan.holdout_frac = holdout_frac;
    plan.seed = seed;
    plan.fold_of.assign(n_users, -1);
    plan.holdout.assign(n_users, {});
    plan.structure.reserve(rows.size());
    for (const auto& r : rows) plan.structure.push_back({r.user, r.item});

    Rng rng(seed);
    rng.shuffle(std::span<Index>(users));
    for (std::size_t k = 0; k < users.size(); ++k) plan.fold_of[users[k]] = static_cast<int>(k % n_folds);

    for (Index u = 0; u < n_users; ++u) {
        const std::size_t size = offsets[u + 1] - offsets[u];
        for (auto k : choose_holdout(rng, size, holdout_count(size, holdout_frac)))
            plan.holdout[u].push_back(rows[offsets[u] + k].item);
    }
    return plan;
}

} // namespace detail

inline FoldPlan make_folds(const InteractionSkeleton& skeleton, int n_folds = 5, double holdout_frac = 0.2,
                           std::uint64_t seed = 0) {
    return detail::make_folds_impl(skeleton.interactions(), skeleton.num_users(), n_folds, holdout_frac, seed);
}

inline FoldPlan make_folds(const RatingDataset& data, int n_folds = 5, double holdout_frac = 0.2,
                           std::uint64_t seed = 0) {
    return detail::make_folds_impl(data.triples(), data.num_users(), n_folds, holdout_frac, seed);
}

} // namespace popbias
