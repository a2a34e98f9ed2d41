#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <tuple>
#include <unordered_set>
#include <vector>

#include "popbias/dataset.hpp"
#include "popbias/error.hpp"
#include "popbias/random.hpp"

namespace popbias {

struct LongTailParams {
    std::size_t num_users = 2000;
    std::size_t num_items = 1500;
    std::size_t num_interactions = 50000;
    double exponent = 1.0;
    std::uint64_t seed = 7;
};

namespace detail {

/// Zero-padded ids so that lexicographic and numeric order agree.
inline std::vector<std::string> padded_ids(char prefix, std::size_t n) {
    const std::size_t width = std::to_string(n > 0 ? n - 1 : 0).size();
    std::vector<std::string> ids;
    ids.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::string digits = std::to_string(i);
        ids.push_back(std::string(1, prefix) + std::string(width - digits.size(), '0') + digits);
    }
    return ids;
}

/// Cumulative distribution of P(rank r) ∝ r^-exponent for r = 1..n.
class PowerLawSampler {
public:
    PowerLawSampler(std::size_t n, double exponent) : cdf_(n) {
        double total = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            total += std::pow(static_cast<double>(r + 1), -exponent);
            cdf_[r] = total;
        }
        for (auto& c : cdf_) c /= total;
    }

    double weight(std::size_t r) const { return r == 0 ? cdf_[0] : cdf_[r] - cdf_[r - 1]; }

    Index draw(Rng& rng) const {
        const double x = rng.uniform01();
        const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), x);
        return static_cast<Index>(std::min<std::size_t>(it - cdf_.begin(), cdf_.size() - 1));
    }

private:
    std::vector<double> cdf_;
};

} // namespace detail

/// Synthetic interaction structure whose user activity and item popularity both
/// follow P(rank r) ∝ r^-exponent. Index 0 is the most active user / most
/// popular item.
///
/// Every user and item is first seeded with one interaction, then pairs are
/// drawn from the product distribution and duplicates rejected. When the target
/// fills more than half of the user x item grid, or rejection stops making
/// progress, the remaining pairs are chosen by weighted sampling without
/// replacement (exponential keys) instead.
inline InteractionSkeleton generate_longtail_skeleton(const LongTailParams& p) {
    if (p.num_users == 0 || p.num_items == 0) throw ValidationError("skeleton: need at least one user and one item");
    if (!(p.exponent > 0.0)) throw ValidationError("skeleton: exponent must be positive");
    if (p.num_interactions < std::max(p.num_users, p.num_items))
        throw ValidationError("skeleton: fewer interactions than max(users, items)");
    const auto grid = static_cast<std::uint64_t>(p.num_users) * p.num_items;
    if (p.num_interactions > grid)
        throw ValidationError("skeleton: more interactions (" + std::to_string(p.num_interactions) +
                              ") than possible user-item pairs (" + std::to_string(grid) + ")");

    Rng rng(p.seed);
    const detail::PowerLawSampler user_dist(p.num_users, p.exponent);
    const detail::PowerLawSampler item_dist(p.num_items, p.exponent);

    std::unordered_set<std::uint64_t> taken;
    taken.reserve(p.num_interactions * 2);
    std::vector<Interaction> pairs;
    pairs.reserve(p.num_interactions);
    auto key = [&](Index u, Index i) { return static_cast<std::uint64_t>(u) * p.num_items + i; };
    auto add = [&](Index u, Index i) {
        if (!taken.insert(key(u, i)).second) return false;
        pairs.push_back({u, i});
        return true;
    };

    std::vector<char> item_seen(p.num_items, 0);
    for (Index u = 0; u < p.num_users; ++u) {
        const Index i = item_dist.draw(rng);
        add(u, i);
        item_seen[i] = 1;
    }
    for (Index i = 0; i < p.num_items; ++i) {
        if (item_seen[i]) continue;
        add(user_dist.draw(rng), i);  // cannot collide: i has no pair yet
    }

    // Rejection sampling stalls once the remaining free pairs carry little
    // probability mass; past this many consecutive misses switch strategies.
    constexpr std::size_t kMaxMisses = 1'000'000;
    bool dense = 2 * static_cast<std::uint64_t>(p.num_interactions) > grid;
    for (std::size_t misses = 0; !dense && pairs.size() < p.num_interactions;) {
        if (add(user_dist.draw(rng), item_dist.draw(rng))) {
            misses = 0;
        } else if (++misses == kMaxMisses) {
            dense = true;
        }
    }

    if (pairs.size() < p.num_interactions) {
        if (grid > 50'000'000) throw ValidationError("skeleton: exponent too steep to fill the requested interactions");
        // Efraimidis-Spirakis: the largest u^(1/w) keys form a weighted sample
        // without replacement; compared in log space as log(u) / w.
        struct Keyed {
            double key;
            Index user, item;
        };
        std::vector<Keyed> rest;
        rest.reserve(grid - pairs.size());
        for (Index u = 0; u < p.num_users; ++u)
            for (Index i = 0; i < p.num_items; ++i) {
                if (taken.count(key(u, i))) continue;
                const double w = user_dist.weight(u) * item_dist.weight(i);
                double x = rng.uniform01();
                while (x == 0.0) x = rng.uniform01();
                rest.push_back({std::log(x) / w, u, i});
            }
        const std::size_t need = p.num_interactions - pairs.size();
        std::partial_sort(rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(need), rest.end(),
                          [](const Keyed& a, const Keyed& b) {
                              if (a.key != b.key) return a.key > b.key;
                              return std::tie(a.user, a.item) < std::tie(b.user, b.item);
                          });
        for (std::size_t k = 0; k < need; ++k) add(rest[k].user, rest[k].item);
    }

    auto users = std::make_shared<const IdTable>(detail::padded_ids('u', p.num_users));
    auto items = std::make_shared<const IdTable>(detail::padded_ids('i', p.num_items));
    return InteractionSkeleton(std::move(users), std::move(items), std::move(pairs));
}

} // namespace popbias
