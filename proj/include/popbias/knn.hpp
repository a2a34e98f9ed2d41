#pragma once

// User-based k-nearest-neighbour collaborative filtering with the three
// configuration axes that differ between common implementations: minimum
// similarity, the item scope of the similarity, and minimum neighbours.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "popbias/dataset.hpp"
#include "popbias/error.hpp"
#include "popbias/metrics.hpp"
#include "popbias/split.hpp"

namespace popbias::knn {

struct KnnConfig {
    double min_sim = 0.0;     ///< neighbours need similarity strictly above this
    bool over_common = false; ///< similarity over co-rated items only
    int min_nbrs = 1;         ///< eligible neighbours required for a prediction
    int k = 20;               ///< neighbourhood size cap

    void validate() const {
        if (!(min_sim >= -1.0 && min_sim <= 1.0)) throw ValidationError("min_sim must be in [-1, 1]");
        if (min_nbrs < 1) throw ValidationError("min_nbrs must be at least 1");
        if (k < min_nbrs) throw ValidationError("k must be at least min_nbrs");
    }

    friend bool operator==(const KnnConfig&, const KnnConfig&) = default;
};

struct Neighbour {
    Index user;
    double similarity;
};

struct Prediction {
    Index user;
    Index item;
    double score;  ///< unclamped
    int neighbours_used;
};

class UserScorer;

/// Immutable trained state: user means, mean-centred ratings in both user-major
/// and item-major order, and per-user vector norms.
class FittedModel {
public:
    const KnnConfig& config() const noexcept { return config_; }
    std::size_t num_users() const noexcept { return means_.size(); }
    std::size_t num_items() const noexcept { return item_offsets_.size() - 1; }

    bool has_user(Index u) const { return u < num_users() && user_offsets_[u + 1] > user_offsets_[u]; }
    bool in_catalog(Index i) const { return i < num_items() && item_offsets_[i + 1] > item_offsets_[i]; }

    double user_mean(Index u) const {
        require_user(u);
        return means_[u];
    }

    /// Items rated by `u`, ascending, with the matching centred ratings.
    std::span<const Index> rated_items(Index u) const { return row(user_items_, user_offsets_, u); }
    std::span<const double> centered_ratings(Index u) const { return row(user_centered_, user_offsets_, u); }

    /// Users who rated `i`, ascending, with their centred ratings of `i`.
    std::span<const Index> raters(Index i) const { return row(item_users_, item_offsets_, i); }
    std::span<const double> rater_centered(Index i) const { return row(item_centered_, item_offsets_, i); }

    /// Cosine of the mean-centred rating vectors. Over all items, missing
    /// ratings count as zero; over common items, both vectors are restricted to
    /// the co-rated set. Zero when a vector has zero norm or nothing is co-rated.
    double similarity(Index u, Index v) const {
        require_user(u);
        require_user(v);
        const auto iu = rated_items(u), iv = rated_items(v);
        const auto cu = centered_ratings(u), cv = centered_ratings(v);
        double dot = 0.0, nu = 0.0, nv = 0.0;
        std::size_t a = 0, b = 0;
        while (a < iu.size() && b < iv.size()) {
            if (iu[a] < iv[b]) {
                ++a;
            } else if (iv[b] < iu[a]) {
                ++b;
            } else {
                dot += cu[a] * cv[b];
                nu += cu[a] * cu[a];
                nv += cv[b] * cv[b];
                ++a;
                ++b;
            }
        }
        if (!config_.over_common) {
            nu = norm2_[u];
            nv = norm2_[v];
        }
        return cosine(dot, nu, nv);
    }

    inline UserScorer scorer(Index u) const;
    inline std::vector<Neighbour> neighbourhood(Index u, Index i) const;
    inline std::optional<Prediction> predict(Index u, Index i) const;
    inline std::vector<Index> recommend_top_n(Index u, std::size_t n = 10) const;

    friend FittedModel fit(const RatingDataset& train, const KnnConfig& config);

private:
    friend class UserScorer;

    template <class T>
    static std::span<const T> row(const std::vector<T>& values, const std::vector<std::size_t>& offsets, Index r) {
        if (r + 1 >= offsets.size()) return {};
        return std::span<const T>(values).subspan(offsets[r], offsets[r + 1] - offsets[r]);
    }

    static double cosine(double dot, double n2u, double n2v) {
        const double denom = std::sqrt(n2u * n2v);
        if (!(denom > 0.0)) return 0.0;
        return std::clamp(dot / denom, -1.0, 1.0);
    }

    void require_user(Index u) const {
        if (!has_user(u)) throw UnknownIdError("user index " + std::to_string(u) + " has no training ratings");
    }

    KnnConfig config_;
    std::vector<double> means_;
    std::vector<double> norm2_;
    std::vector<std::size_t> user_offsets_;
    std::vector<Index> user_items_;
    std::vector<double> user_centered_;
    std::vector<std::size_t> item_offsets_;
    std::vector<Index> item_users_;
    std::vector<double> item_centered_;
};

/// Train: per-user means, centred ratings and the item -> raters index.
inline FittedModel fit(const RatingDataset& train, const KnnConfig& config) {
    config.validate();
    if (train.empty()) throw InputError("fit: empty training data");

    const std::size_t nu = train.num_users(), ni = train.num_items();
    const auto triples = train.triples();
    FittedModel m;
    m.config_ = config;
    m.means_.assign(nu, std::numeric_limits<double>::quiet_NaN());
    m.norm2_.assign(nu, 0.0);

    m.user_offsets_.assign(nu + 1, 0);
    for (const auto& t : triples) ++m.user_offsets_[t.user + 1];
    for (std::size_t u = 0; u < nu; ++u) m.user_offsets_[u + 1] += m.user_offsets_[u];

    // Triples are sorted by (user, item), so user rows come out item-ascending.
    m.user_items_.resize(triples.size());
    m.user_centered_.resize(triples.size());
    for (std::size_t u = 0; u < nu; ++u) {
        const auto b = m.user_offsets_[u], e = m.user_offsets_[u + 1];
        if (b == e) continue;
        double sum = 0.0;
        for (auto k = b; k < e; ++k) sum += triples[k].rating;
        const double mean = sum / static_cast<double>(e - b);
        m.means_[u] = mean;
        for (auto k = b; k < e; ++k) {
            const double c = triples[k].rating - mean;
            m.user_items_[k] = triples[k].item;
            m.user_centered_[k] = c;
            m.norm2_[u] += c * c;
        }
    }

    m.item_offsets_.assign(ni + 1, 0);
    for (const auto& t : triples) ++m.item_offsets_[t.item + 1];
    for (std::size_t i = 0; i < ni; ++i) m.item_offsets_[i + 1] += m.item_offsets_[i];
    m.item_users_.resize(triples.size());
    m.item_centered_.resize(triples.size());
    std::vector<std::size_t> cursor(m.item_offsets_.begin(), m.item_offsets_.end() - 1);
    for (std::size_t k = 0; k < triples.size(); ++k) {
        const auto pos = cursor[triples[k].item]++;
        m.item_users_[pos] = triples[k].user;  // users ascending within an item
        m.item_centered_[pos] = m.user_centered_[k];
    }
    return m;
}

/// Similarities of one user to every other user, computed once and reused for
/// every item scored for that user. Holds a reference to the model.
class UserScorer {
public:
    UserScorer(const FittedModel& model, Index u) : model_(&model), user_(u) {
        model.require_user(u);
        const std::size_t n = model.num_users();
        sim_.assign(n, 0.0);
        std::vector<double> dot(n, 0.0), nu, nv;
        const bool common = model.config_.over_common;
        if (common) {
            nu.assign(n, 0.0);
            nv.assign(n, 0.0);
        }
        std::vector<char> touched(n, 0);

        // Accumulation runs over u's items in ascending order, the same order
        // as the pairwise merge in FittedModel::similarity.
        const auto items = model.rated_items(u);
        const auto cu = model.centered_ratings(u);
        for (std::size_t a = 0; a < items.size(); ++a) {
            const auto raters = model.raters(items[a]);
            const auto cv = model.rater_centered(items[a]);
            for (std::size_t b = 0; b < raters.size(); ++b) {
                const Index v = raters[b];
                if (v == u) continue;
                dot[v] += cu[a] * cv[b];
                if (common) {
                    nu[v] += cu[a] * cu[a];
                    nv[v] += cv[b] * cv[b];
                }
                touched[v] = 1;
            }
        }
        for (Index v = 0; v < n; ++v) {
            if (!touched[v]) continue;
            sim_[v] = common ? FittedModel::cosine(dot[v], nu[v], nv[v])
                             : FittedModel::cosine(dot[v], model.norm2_[u], model.norm2_[v]);
        }
    }

    Index user() const noexcept { return user_; }
    double similarity(Index v) const { return sim_.at(v); }
    std::span<const double> similarities() const noexcept { return sim_; }

    /// Raters of `i` other than the user with similarity above min_sim, sorted by
    /// similarity descending (ties: ascending user), capped at k.
    std::vector<Neighbour> neighbourhood(Index i) const {
        const auto& cfg = model_->config_;
        std::vector<Neighbour> out;
        for (const Index v : model_->raters(i)) {
            if (v == user_) continue;
            const double s = sim_[v];
            if (s > cfg.min_sim) out.push_back({v, s});
        }
        auto before = [](const Neighbour& a, const Neighbour& b) {
            if (a.similarity != b.similarity) return a.similarity > b.similarity;
            return a.user < b.user;
        };
        const auto k = static_cast<std::size_t>(cfg.k);
        if (out.size() > k) {
            std::partial_sort(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(k), out.end(), before);
            out.resize(k);
        } else {
            std::sort(out.begin(), out.end(), before);
        }
        return out;
    }

    /// mean(u) + sum s * (r(v,i) - mean(v)) / sum |s| over the neighbourhood.
    /// Empty with fewer than min_nbrs neighbours or a zero denominator.
    std::optional<Prediction> predict(Index i) const {
        if (!model_->in_catalog(i)) {
            if (i >= model_->num_items()) throw UnknownIdError("item index " + std::to_string(i) + " is unknown");
            return std::nullopt;
        }
        return score(i, neighbourhood(i));
    }

    /// The prediction for `i` from an explicit neighbourhood (any prefix of
    /// neighbourhood(i) is the neighbourhood under a smaller k).
    std::optional<Prediction> score(Index i, std::span<const Neighbour> nbrs) const {
        if (nbrs.size() < static_cast<std::size_t>(model_->config_.min_nbrs)) return std::nullopt;
        const auto raters = model_->raters(i);
        const auto centred = model_->rater_centered(i);
        double num = 0.0, den = 0.0;
        for (const auto& n : nbrs) {
            const auto pos = std::lower_bound(raters.begin(), raters.end(), n.user) - raters.begin();
            num += n.similarity * centred[static_cast<std::size_t>(pos)];
            den += std::abs(n.similarity);
        }
        if (!(den > 0.0)) return std::nullopt;
        return Prediction{user_, i, model_->means_[user_] + num / den, static_cast<int>(nbrs.size())};
    }

    /// Top-n unrated catalog items by predicted score (ties: ascending item).
    std::vector<Index> recommend(std::size_t n = 10) const {
        std::vector<char> rated(model_->num_items(), 0);
        for (auto i : model_->rated_items(user_)) rated[i] = 1;

        std::vector<std::pair<double, Index>> scored;
        for (Index i = 0; i < model_->num_items(); ++i) {
            if (rated[i] || !model_->in_catalog(i)) continue;
            if (auto p = predict(i)) scored.emplace_back(p->score, i);
        }
        auto before = [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return a.second < b.second;
        };
        const std::size_t take = std::min(n, scored.size());
        std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take), scored.end(), before);
        std::vector<Index> out;
        out.reserve(take);
        for (std::size_t k = 0; k < take; ++k) out.push_back(scored[k].second);
        return out;
    }

private:
    const FittedModel* model_;
    Index user_;
    std::vector<double> sim_;
};

inline UserScorer FittedModel::scorer(Index u) const { return UserScorer(*this, u); }

inline std::vector<Neighbour> FittedModel::neighbourhood(Index u, Index i) const { return scorer(u).neighbourhood(i); }

inline std::optional<Prediction> FittedModel::predict(Index u, Index i) const {
    if (i >= num_items()) throw UnknownIdError("item index " + std::to_string(i) + " is unknown");
    return scorer(u).predict(i);
}

inline std::vector<Index> FittedModel::recommend_top_n(Index u, std::size_t n) const { return scorer(u).recommend(n); }

struct TuneResult {
    int best_k = 0;
    std::vector<std::pair<int, std::optional<double>>> rmse_by_k;  ///< grid order
};

/// Pick k from `grid` by validation RMSE on one seeded per-user 80/20 split of
/// `train`. Grid values with no validation prediction rank last; ties go to the
/// smaller k.
inline TuneResult tune_k(const RatingDataset& train, const KnnConfig& config, std::span<const int> grid,
                         std::uint64_t seed, double holdout_frac = 0.2) {
    if (grid.empty()) throw ValidationError("tune_k: empty grid");
    for (int k : grid)
        if (k < config.min_nbrs) throw ValidationError("tune_k: grid value " + std::to_string(k) + " below min_nbrs");

    const auto split = per_user_split(train, holdout_frac, seed);
    KnnConfig widest = config;
    widest.k = *std::max_element(grid.begin(), grid.end());
    const FittedModel model = fit(split.train, widest);

    // Neighbourhoods are computed once at the largest k; a smaller k uses the
    // leading prefix of the same sorted list.
    std::vector<std::vector<metrics::ScoredPair>> pairs(grid.size());
    const auto& val = split.validation;
    for (std::size_t v = 0; v < val.size();) {
        const Index u = val[v].user;
        std::size_t end = v;
        while (end < val.size() && val[end].user == u) ++end;
        const UserScorer scorer(model, u);
        for (auto t = v; t < end; ++t) {
            const Index i = val[t].item;
            if (!model.in_catalog(i)) continue;
            const auto nbrs = scorer.neighbourhood(i);
            for (std::size_t g = 0; g < grid.size(); ++g) {
                const auto take = std::min(nbrs.size(), static_cast<std::size_t>(grid[g]));
                if (auto p = scorer.score(i, std::span(nbrs).first(take)))
                    pairs[g].push_back({p->score, double(val[t].rating)});
            }
        }
        v = end;
    }

    TuneResult result;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t g = 0; g < grid.size(); ++g) {
        const auto e = metrics::rmse(pairs[g]);
        result.rmse_by_k.emplace_back(grid[g], e);
        const double score = e.value_or(std::numeric_limits<double>::infinity());
        if (result.best_k == 0 || score < best || (score == best && grid[g] < result.best_k)) {
            best = score;
            result.best_k = grid[g];
        }
    }
    return result;
}

} // namespace popbias::knn
