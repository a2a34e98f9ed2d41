#pragma once

#include <string>
#include <tuple>
#include <vector>

#include "popbias/dataset.hpp"
#include "popbias/random.hpp"
#include "popbias/skeleton.hpp"

namespace testing_helpers {

using Triples = std::vector<std::tuple<std::string, std::string, int>>;

inline std::string uid(int u) { return "u" + std::to_string(100 + u); }
inline std::string iid(int i) { return "i" + std::to_string(100 + i); }

/// Random ratings on a users x items grid, each cell present with `density`.
/// Every user gets at least one rating.
inline popbias::RatingDataset random_ratings(int users, int items, double density, std::uint64_t seed) {
    popbias::Rng rng(seed);
    Triples rows;
    for (int u = 0; u < users; ++u) {
        bool any = false;
        for (int i = 0; i < items; ++i)
            if (rng.uniform01() < density) {
                rows.emplace_back(uid(u), iid(i), rng.uniform_int(1, 10));
                any = true;
            }
        if (!any) rows.emplace_back(uid(u), iid(static_cast<int>(rng.below(items))), rng.uniform_int(1, 10));
    }
    return popbias::RatingDataset::from_triples(rows);
}

inline popbias::InteractionSkeleton small_skeleton(std::uint64_t seed = 3) {
    return popbias::generate_longtail_skeleton({120, 90, 1800, 1.0, seed});
}

} // namespace testing_helpers
