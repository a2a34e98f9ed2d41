#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "popbias/dataset.hpp"
#include "popbias/error.hpp"
#include "popbias/popularity.hpp"
#include "popbias/random.hpp"

namespace popbias {

/// The five rating-assignment rules.
enum class Scenario : int {
    NoRelation = 1,              ///< uniform ratings regardless of popularity
    PopularRatedHigher = 2,      ///< normal around normalized popularity
    PopularRatedLower = 3,       ///< normal around inverted normalized popularity
    InfluentialRateHigher = 4,   ///< uniform, but top profiles draw Poisson(popularity)
    InfluentialRateLower = 5,    ///< uniform, but top profiles draw Poisson(inverted popularity)
};

struct ScenarioSpec {
    int scenario_id = 1;
    double sigma = 1.0;
    double profile_fraction = 0.2;
    std::uint64_t seed = 0;

    void validate() const {
        if (scenario_id < 1 || scenario_id > 5)
            throw ValidationError("scenario id " + std::to_string(scenario_id) + " is not in 1..5");
        if (!(sigma > 0.0)) throw ValidationError("sigma must be positive");
        if (!(profile_fraction > 0.0 && profile_fraction <= 1.0))
            throw ValidationError("profile_fraction must be in (0, 1]");
    }

    Scenario scenario() const { return static_cast<Scenario>(scenario_id); }
};

namespace detail {

inline int clamp_rating(long long x) {
    return static_cast<int>(std::clamp<long long>(x, kMinRating, kMaxRating));
}

} // namespace detail

/// Assign one rating per interaction under `spec`.
///
/// All draws come from a single Rng seeded with spec.seed and are consumed in
/// skeleton order (sorted by user then item id). Scenarios 4 and 5 first draw a
/// uniform rating for every interaction, then redraw the top-profile users'
/// ratings in a second pass, so their base ratings coincide with Scenario 1 for
/// the same seed. Popularity is measured on the whole skeleton.
inline RatingDataset synthesize_ratings(const InteractionSkeleton& skeleton, const ScenarioSpec& spec) {
    spec.validate();
    if (skeleton.empty()) throw InputError("synthesize_ratings: empty skeleton");

    Rng rng(spec.seed);
    const auto pairs = skeleton.interactions();
    std::vector<int> ratings(pairs.size());

    switch (spec.scenario()) {
    case Scenario::NoRelation:
        for (auto& r : ratings) r = rng.uniform_int(kMinRating, kMaxRating);
        break;

    case Scenario::PopularRatedHigher:
    case Scenario::PopularRatedLower: {
        const auto mean = normalize_popularity(item_popularity(skeleton), spec.scenario() == Scenario::PopularRatedLower);
        for (std::size_t k = 0; k < pairs.size(); ++k)
            ratings[k] = detail::clamp_rating(std::llround(rng.normal(mean[pairs[k].item], spec.sigma)));
        break;
    }

    case Scenario::InfluentialRateHigher:
    case Scenario::InfluentialRateLower: {
        for (auto& r : ratings) r = rng.uniform_int(kMinRating, kMaxRating);
        const auto lambda = normalize_popularity(item_popularity(skeleton), spec.scenario() == Scenario::InfluentialRateLower);
        std::vector<char> influential(skeleton.num_users(), 0);
        for (auto u : top_profile_users(profile_stats(skeleton), spec.profile_fraction)) influential[u] = 1;
        for (std::size_t k = 0; k < pairs.size(); ++k)
            if (influential[pairs[k].user])
                ratings[k] = detail::clamp_rating(rng.poisson(lambda[pairs[k].item]));
        break;
    }
    }

    return RatingDataset::from_skeleton(skeleton, ratings);
}

} // namespace popbias
