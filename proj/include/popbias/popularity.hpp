#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "popbias/dataset.hpp"
#include "popbias/error.hpp"
#include "popbias/stats.hpp"

namespace popbias {

/// Per-item count of distinct interacting users, indexed by item. Items of the
/// id table that have no interaction in the measured data carry count 0 and
/// are not part of the popularity map proper.
struct ItemPopularity {
    std::vector<std::uint32_t> counts;
    std::size_t num_users = 0;  ///< users with at least one interaction

    bool contains(Index item) const { return item < counts.size() && counts[item] > 0; }

    /// counts / |U|, in (0, 1] for present items.
    double fraction(Index item) const {
        return static_cast<double>(counts.at(item)) / static_cast<double>(num_users);
    }

    std::size_t num_items() const {
        return static_cast<std::size_t>(std::count_if(counts.begin(), counts.end(), [](auto c) { return c > 0; }));
    }

    std::uint64_t total() const { return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}); }
};

/// Number of rated items per user, indexed by user (0 for users absent from the
/// measured data).
struct ProfileStats {
    std::vector<std::uint32_t> sizes;

    std::size_t num_users() const {
        return static_cast<std::size_t>(std::count_if(sizes.begin(), sizes.end(), [](auto s) { return s > 0; }));
    }
};

namespace detail {

template <class Row>
ItemPopularity popularity_of(std::span<const Row> rows, std::size_t n_users, std::size_t n_items) {
    if (rows.empty()) throw InputError("item_popularity: empty input");
    ItemPopularity pop;
    pop.counts.assign(n_items, 0);
    std::vector<char> seen(n_users, 0);
    for (const auto& r : rows) {
        ++pop.counts[r.item];
        if (!seen[r.user]) {
            seen[r.user] = 1;
            ++pop.num_users;
        }
    }
    return pop;
}

template <class Row>
ProfileStats profiles_of(std::span<const Row> rows, std::size_t n_users) {
    ProfileStats stats;
    stats.sizes.assign(n_users, 0);
    for (const auto& r : rows) ++stats.sizes[r.user];
    return stats;
}

} // namespace detail

inline ItemPopularity item_popularity(const InteractionSkeleton& s) {
    return detail::popularity_of(s.interactions(), s.num_users(), s.num_items());
}

inline ItemPopularity item_popularity(const RatingDataset& d) {
    return detail::popularity_of(d.triples(), d.num_users(), d.num_items());
}

inline ProfileStats profile_stats(const InteractionSkeleton& s) {
    return detail::profiles_of(s.interactions(), s.num_users());
}

inline ProfileStats profile_stats(const RatingDataset& d) { return detail::profiles_of(d.triples(), d.num_users()); }

/// Linear min-max map of popularity counts onto [1, 10]; `invert` reflects the
/// result as 11 - n. When every present item has the same count all of them map
/// to 1 (10 when inverted). Items absent from `pop` map to NaN.
///
/// Under long-tail data most items land close to 1, since the scale is linear
/// in raw counts.
inline std::vector<double> normalize_popularity(const ItemPopularity& pop, bool invert = false) {
    std::uint32_t lo = std::numeric_limits<std::uint32_t>::max(), hi = 0;
    for (auto c : pop.counts) {
        if (c == 0) continue;
        lo = std::min(lo, c);
        hi = std::max(hi, c);
    }
    if (hi == 0) throw InputError("normalize_popularity: no items");

    std::vector<double> out(pop.counts.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 0; i < pop.counts.size(); ++i) {
        const auto c = pop.counts[i];
        if (c == 0) continue;
        double n = 1.0;
        if (hi > lo) n = 1.0 + 9.0 * static_cast<double>(c - lo) / static_cast<double>(hi - lo);
        out[i] = invert ? 11.0 - n : n;
    }
    return out;
}

/// The ceil(fraction * |U|) users with the largest profiles, ascending by
/// index. Ties at the cutoff go to the lexicographically smaller user id.
inline std::vector<Index> top_profile_users(const ProfileStats& stats, double fraction) {
    if (!(fraction > 0.0 && fraction <= 1.0)) throw ValidationError("top_profile_users: fraction must be in (0, 1]");

    std::vector<Index> users;
    for (Index u = 0; u < stats.sizes.size(); ++u)
        if (stats.sizes[u] > 0) users.push_back(u);

    // The epsilon keeps products such as 0.1 * 30 from rounding up past 3.
    const auto want = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(users.size()) - 1e-9));
    std::stable_sort(users.begin(), users.end(),
                     [&](Index a, Index b) { return stats.sizes[a] > stats.sizes[b]; });
    users.resize(std::min(want, users.size()));
    std::sort(users.begin(), users.end());
    return users;
}

/// Pearson correlation, across items, between an item's mean rating (within
/// the optional user subset) and its popularity count over the full dataset.
/// Items without ratings in the subset are skipped. Empty when fewer than two
/// items remain or either side is constant.
inline std::optional<double> rating_popularity_correlation(const RatingDataset& data,
                                                           std::optional<std::span<const Index>> subset = std::nullopt) {
    if (data.empty()) throw InputError("rating_popularity_correlation: empty dataset");
    const auto pop = item_popularity(data);

    std::vector<char> keep;
    if (subset) {
        keep.assign(data.num_users(), 0);
        for (auto u : *subset)
            if (u < keep.size()) keep[u] = 1;
    }

    std::vector<double> sum(data.num_items(), 0.0);
    std::vector<std::uint32_t> n(data.num_items(), 0);
    for (const auto& t : data.triples()) {
        if (subset && !keep[t.user]) continue;
        sum[t.item] += t.rating;
        ++n[t.item];
    }

    std::vector<double> avg, popularity;
    for (std::size_t i = 0; i < n.size(); ++i) {
        if (n[i] == 0) continue;
        avg.push_back(sum[i] / n[i]);
        popularity.push_back(static_cast<double>(pop.counts[i]));
    }
    return stats::pearson(avg, popularity);
}

} // namespace popbias
