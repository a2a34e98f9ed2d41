#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "popbias/error.hpp"

namespace popbias::stats {

/// Pearson correlation. Empty when fewer than two points or either side has
/// zero variance.
inline std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw ValidationError("pearson: sample sizes differ");
    const std::size_t n = x.size();
    if (n < 2) return std::nullopt;

    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx <= 0.0 || syy <= 0.0) return std::nullopt;
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

inline double mean(std::span<const double> v) {
    if (v.empty()) return std::nan("");
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

/// Upper tail of the standard normal.
inline double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

/// Average (mid) ranks, 1-based, of the concatenation of `values`.
inline std::vector<double> midranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i + 1;
        while (j < n && values[order[j]] == values[order[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + 1 + j); // mean of ranks i+1..j
        for (std::size_t t = i; t < j; ++t) ranks[order[t]] = r;
        i = j;
    }
    return ranks;
}

struct MannWhitneyResult {
    double u = 0.0;           ///< U statistic of the first sample
    double p_two_sided = 1.0;
    bool exact = false;
};

/// Combined sample sizes up to this bound use exact enumeration.
inline constexpr std::size_t kExactMannWhitneyLimit = 12;

namespace detail {

struct RankSummary {
    std::vector<double> ranks;  // pooled midranks, sample a first
    double u = 0.0;
    double tie_term = 0.0;      // sum over tie groups of t^3 - t
    bool all_tied = false;
};

inline RankSummary rank_summary(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw ValidationError("mann_whitney_u: both samples must be non-empty");
    std::vector<double> pooled(a.begin(), a.end());
    pooled.insert(pooled.end(), b.begin(), b.end());

    RankSummary s;
    s.ranks = midranks(pooled);
    const double na = static_cast<double>(a.size());
    const double rank_sum = std::accumulate(s.ranks.begin(), s.ranks.begin() + static_cast<std::ptrdiff_t>(a.size()), 0.0);
    s.u = rank_sum - na * (na + 1.0) / 2.0;

    std::vector<double> sorted = pooled;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i + 1;
        while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
        const double t = static_cast<double>(j - i);
        s.tie_term += t * t * t - t;
        i = j;
    }
    s.all_tied = sorted.front() == sorted.back();
    return s;
}

} // namespace detail

/// Normal approximation with tie-corrected variance and a 0.5 continuity
/// correction.
inline MannWhitneyResult mann_whitney_normal(std::span<const double> a, std::span<const double> b) {
    const auto s = detail::rank_summary(a, b);
    MannWhitneyResult r{s.u, 1.0, false};
    if (s.all_tied) return r;

    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    const double n = na + nb;
    const double mu = na * nb / 2.0;
    const double var = na * nb / 12.0 * ((n + 1.0) - s.tie_term / (n * (n - 1.0)));
    if (var <= 0.0) return r;

    const double z = std::max(std::abs(s.u - mu) - 0.5, 0.0) / std::sqrt(var);
    r.p_two_sided = std::min(1.0, 2.0 * normal_sf(z));
    return r;
}

/// Exact permutation distribution of U over all ways to assign the pooled
/// midranks to the first sample. Two-sided p counts assignments at least as far
/// from the null mean as the observed U.
inline MannWhitneyResult mann_whitney_exact(std::span<const double> a, std::span<const double> b) {
    const std::size_t n = a.size() + b.size();
    if (n > 20) throw ValidationError("mann_whitney_exact: combined sample size too large to enumerate");
    const auto s = detail::rank_summary(a, b);
    MannWhitneyResult r{s.u, 1.0, true};
    if (s.all_tied) return r;

    const int na = static_cast<int>(a.size());
    const double mu = static_cast<double>(a.size() * b.size()) / 2.0;
    const double observed = std::abs(s.u - mu);
    const double offset = static_cast<double>(na) * (na + 1) / 2.0;
    constexpr double eps = 1e-9;

    std::uint64_t total = 0, extreme = 0;
    for (std::uint32_t mask = 0; mask < (1U << n); ++mask) {
        if (std::popcount(mask) != na) continue;
        double rank_sum = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            if (mask & (1U << i)) rank_sum += s.ranks[i];
        ++total;
        if (std::abs(rank_sum - offset - mu) >= observed - eps) ++extreme;
    }
    r.p_two_sided = static_cast<double>(extreme) / static_cast<double>(total);
    return r;
}

/// Two-sided Mann-Whitney U test: exact for small samples, normal
/// approximation otherwise.
inline MannWhitneyResult mann_whitney_u(std::span<const double> a, std::span<const double> b) {
    if (a.size() + b.size() <= kExactMannWhitneyLimit) return mann_whitney_exact(a, b);
    return mann_whitney_normal(a, b);
}

} // namespace popbias::stats
