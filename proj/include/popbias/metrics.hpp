#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "popbias/dataset.hpp"
#include "popbias/popularity.hpp"
#include "popbias/stats.hpp"

namespace popbias::metrics {

struct ScoredPair {
    double score;  ///< raw model score, possibly outside the rating scale
    double truth;
};

/// Root mean squared error after clamping scores to the rating scale. Empty
/// for an empty list.
inline std::optional<double> rmse(std::span<const ScoredPair> pairs) {
    if (pairs.empty()) return std::nullopt;
    double sum = 0.0;
    for (const auto& p : pairs) {
        const double e = std::clamp(p.score, double(kMinRating), double(kMaxRating)) - p.truth;
        sum += e * e;
    }
    return std::sqrt(sum / static_cast<double>(pairs.size()));
}

/// Graded NDCG: the gain of a recommended item is its held-out rating (0 when
/// not held out), discounted by log2(position + 1). Empty when the ideal DCG
/// is zero (no held-out items).
inline std::optional<double> ndcg_at_k(std::span<const Index> recommended,
                                       std::span<const std::pair<Index, int>> holdout, std::size_t k = 10) {
    auto rating_of = [&](Index item) -> double {
        for (const auto& [i, r] : holdout)
            if (i == item) return r;
        return 0.0;
    };

    double dcg = 0.0;
    const std::size_t depth = std::min(k, recommended.size());
    for (std::size_t p = 0; p < depth; ++p) dcg += rating_of(recommended[p]) / std::log2(static_cast<double>(p) + 2.0);

    std::vector<double> ideal;
    ideal.reserve(holdout.size());
    for (const auto& h : holdout) ideal.push_back(h.second);
    std::sort(ideal.begin(), ideal.end(), std::greater<>());
    double idcg = 0.0;
    for (std::size_t p = 0; p < std::min(k, ideal.size()); ++p) idcg += ideal[p] / std::log2(static_cast<double>(p) + 2.0);

    if (idcg <= 0.0) return std::nullopt;
    return dcg / idcg;
}

/// Pearson correlation over the training catalog between training popularity
/// counts and how often each item was recommended (0 if never). A constant side
/// yields 0.
inline double pop_corr(const ItemPopularity& train_pop, std::span<const std::uint32_t> rec_counts) {
    std::vector<double> pop, recs;
    for (Index i = 0; i < train_pop.counts.size(); ++i) {
        if (!train_pop.contains(i)) continue;
        pop.push_back(train_pop.counts[i]);
        recs.push_back(i < rec_counts.size() ? rec_counts[i] : 0.0);
    }
    return stats::pearson(pop, recs).value_or(0.0);
}

struct UserValue {
    Index user;
    double value;
};

struct BiasSummary {
    double mean = std::numeric_limits<double>::quiet_NaN();  ///< NaN when no user qualifies
    std::vector<UserValue> per_user;
};

namespace detail {

inline double mean_fraction(std::span<const Index> items, const ItemPopularity& pop) {
    double s = 0.0;
    for (auto i : items) s += pop.contains(i) ? pop.fraction(i) : 0.0;
    return s / static_cast<double>(items.size());
}

inline void finish(BiasSummary& out) {
    if (out.per_user.empty()) return;
    double s = 0.0;
    for (const auto& v : out.per_user) s += v.value;
    out.mean = s / static_cast<double>(out.per_user.size());
}

} // namespace detail

/// Average recommendation popularity. `rec_lists` is indexed by user; empty
/// lists are skipped. Popularity is the fraction of training users.
inline BiasSummary arp(std::span<const std::vector<Index>> rec_lists, const ItemPopularity& train_pop) {
    BiasSummary out;
    for (Index u = 0; u < rec_lists.size(); ++u) {
        if (rec_lists[u].empty()) continue;
        out.per_user.push_back({u, detail::mean_fraction(rec_lists[u], train_pop)});
    }
    detail::finish(out);
    return out;
}

/// Popularity lift in percent: 100 * (q - p) / p where p is the mean
/// popularity of the user's training profile and q that of the recommendations.
/// Users without recommendations or without a profile are skipped.
inline BiasSummary pl(std::span<const std::vector<Index>> rec_lists, std::span<const std::vector<Index>> profiles,
                      const ItemPopularity& train_pop) {
    BiasSummary out;
    for (Index u = 0; u < rec_lists.size(); ++u) {
        if (rec_lists[u].empty() || u >= profiles.size() || profiles[u].empty()) continue;
        const double p = detail::mean_fraction(profiles[u], train_pop);
        if (p <= 0.0) continue;
        const double q = detail::mean_fraction(rec_lists[u], train_pop);
        out.per_user.push_back({u, 100.0 * (q - p) / p});
    }
    detail::finish(out);
    return out;
}

/// Fraction of the catalog recommended to at least one user.
inline double agg_div(std::span<const std::vector<Index>> rec_lists, std::size_t catalog_size) {
    if (catalog_size == 0) throw ValidationError("agg_div: empty catalog");
    std::vector<char> hit(catalog_size, 0);
    std::size_t distinct = 0;
    for (const auto& list : rec_lists)
        for (auto i : list)
            if (i < catalog_size && !hit[i]) {
                hit[i] = 1;
                ++distinct;
            }
    return static_cast<double>(distinct) / static_cast<double>(catalog_size);
}

} // namespace popbias::metrics
