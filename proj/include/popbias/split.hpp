#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "popbias/dataset.hpp"
#include "popbias/error.hpp"
#include "popbias/random.hpp"

namespace popbias {

/// Held-out ratings for a profile of `profile_size`: nearest integer to
/// frac * size, at least one when the profile has two or more ratings, and
/// always leaving one rating for training.
inline std::size_t holdout_count(std::size_t profile_size, double holdout_frac) {
    if (profile_size < 2) return 0;
    auto m = static_cast<std::size_t>(std::llround(holdout_frac * static_cast<double>(profile_size)));
    if (m < 1) m = 1;
    if (m > profile_size - 1) m = profile_size - 1;
    return m;
}

/// Per-user positions [begin, end) of each user's block in a (user, item)
/// sorted triple list. Absent users get an empty block.
inline std::vector<std::size_t> user_offsets(const RatingDataset& data) {
    std::vector<std::size_t> offsets(data.num_users() + 1, 0);
    for (const auto& t : data.triples()) ++offsets[t.user + 1];
    for (std::size_t u = 0; u < data.num_users(); ++u) offsets[u + 1] += offsets[u];
    return offsets;
}

/// Choose `count` of a user's `size` ratings (as offsets into the user block)
/// by a partial Fisher-Yates shuffle, returned in ascending order.
inline std::vector<std::size_t> choose_holdout(Rng& rng, std::size_t size, std::size_t count) {
    std::vector<std::size_t> pos(size);
    for (std::size_t k = 0; k < size; ++k) pos[k] = k;
    for (std::size_t k = 0; k < count; ++k) {
        const auto j = k + static_cast<std::size_t>(rng.below(size - k));
        std::swap(pos[k], pos[j]);
    }
    pos.resize(count);
    std::sort(pos.begin(), pos.end());
    return pos;
}

struct TrainValidation {
    RatingDataset train;
    std::vector<RatingTriple> validation;
};

/// One seeded per-user split of every user's ratings into training and a
/// held-out share.
inline TrainValidation per_user_split(const RatingDataset& data, double holdout_frac, std::uint64_t seed) {
    if (!(holdout_frac > 0.0 && holdout_frac < 1.0)) throw ValidationError("holdout fraction must be in (0, 1)");
    Rng rng(seed);
    const auto offsets = user_offsets(data);
    const auto triples = data.triples();
    std::vector<char> held(triples.size(), 0);
    std::vector<RatingTriple> validation;
    for (std::size_t u = 0; u < data.num_users(); ++u) {
        const std::size_t size = offsets[u + 1] - offsets[u];
        for (auto k : choose_holdout(rng, size, holdout_count(size, holdout_frac))) {
            held[offsets[u] + k] = 1;
            validation.push_back(triples[offsets[u] + k]);
        }
    }
    std::size_t idx = 0;
    auto train = data.filter([&](const RatingTriple&) { return !held[idx++]; });
    return {std::move(train), std::move(validation)};
}

} // namespace popbias
