#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "popbias/dataset.hpp"
#include "popbias/folds.hpp"
#include "popbias/knn.hpp"
#include "popbias/metrics.hpp"
#include "popbias/popularity.hpp"
#include "popbias/stats.hpp"
#include "popbias/synth.hpp"

namespace popbias {

/// One entry of the configuration grid. With `tune` set, k is chosen from the
/// experiment's k grid and `config.k` is ignored.
struct ConfigSpec {
    knn::KnnConfig config;
    bool tune = false;

    friend bool operator==(const ConfigSpec&, const ConfigSpec&) = default;
};

struct ExperimentOptions {
    int n_folds = 5;
    double holdout_frac = 0.2;
    std::size_t top_n = 10;
    std::uint64_t seed_folds = 1;
    std::uint64_t seed_tune = 2;
    std::vector<int> k_grid{10, 50, 200, 1000};
    double alpha = 0.005;
    unsigned threads = 0;  ///< 0: hardware concurrency
};

/// The five standard UserKNN versions, all with tuned k.
inline std::vector<ConfigSpec> default_configs() {
    return {
        {{-1.0, false, 1, 20}, true},
        {{-1.0, false, 2, 20}, true},
        {{-1.0, true, 1, 20}, true},
        {{0.0, false, 1, 20}, true},
        {{0.0, false, 2, 20}, true},
    };
}

struct MetricsRow {
    std::size_t scenario_index = 0;  ///< position in the scenario list
    int scenario_id = 0;
    std::size_t config_index = 0;
    knn::KnnConfig config;  ///< with the k actually used
    bool tuned = false;
    double pop_corr = std::numeric_limits<double>::quiet_NaN();
    double arp = std::numeric_limits<double>::quiet_NaN();
    double pl = std::numeric_limits<double>::quiet_NaN();
    double agg_div = std::numeric_limits<double>::quiet_NaN();
    std::optional<double> rmse;
    double ndcg_at_10 = std::numeric_limits<double>::quiet_NaN();
    bool arp_sig_lower = false;
    bool pl_sig_lower = false;
    double prediction_coverage = 0.0;  ///< held-out pairs that received a prediction
    std::size_t test_users = 0;        ///< users scored in some fold
    std::size_t skipped_users = 0;     ///< test users without holdout or training profile
    std::string error;                 ///< non-empty when the cell failed
};

struct UserSample {
    std::size_t scenario_index;
    int scenario_id;
    std::size_t config_index;
    Index user;
    int fold;
    double arp;
    double pl;
};

struct TuningRecord {
    std::size_t scenario_index;
    int scenario_id;
    std::size_t config_index;
    int chosen_k;
    std::vector<std::pair<int, std::optional<double>>> rmse_by_k;
};

struct ExperimentResult {
    std::vector<MetricsRow> rows;  ///< scenario-major, then config order
    std::vector<UserSample> samples;
    std::vector<TuningRecord> tuning;

    bool ok() const {
        return std::all_of(rows.begin(), rows.end(), [](const MetricsRow& r) { return r.error.empty(); });
    }
};

namespace detail {

struct CellOutput {
    MetricsRow row;
    std::vector<UserSample> samples;
    std::optional<TuningRecord> tuning;
};

inline CellOutput evaluate_cell(const RatingDataset& data, const FoldPlan& plan, std::size_t scenario_index,
                                int scenario_id, std::size_t config_index, const ConfigSpec& spec,
                                const ExperimentOptions& opt) {
    CellOutput out;
    MetricsRow& row = out.row;
    row.scenario_index = scenario_index;
    row.scenario_id = scenario_id;
    row.config_index = config_index;
    row.config = spec.config;
    row.tuned = spec.tune;

    if (spec.tune) {
        const auto t = knn::tune_k(data, spec.config, opt.k_grid, opt.seed_tune, opt.holdout_frac);
        row.config.k = t.best_k;
        out.tuning = TuningRecord{scenario_index, scenario_id, config_index, t.best_k, t.rmse_by_k};
    }
    row.config.validate();

    std::vector<metrics::ScoredPair> scored;
    std::size_t held_total = 0;
    double ndcg_sum = 0.0;
    std::size_t ndcg_n = 0;
    double pop_corr_sum = 0.0;
    std::vector<char> recommended_any(data.num_items(), 0);
    std::vector<double> arp_values, pl_values;

    for (int f = 0; f < plan.n_folds; ++f) {
        const auto train = plan.training(data, f);
        const auto model = knn::fit(train, row.config);
        const auto train_pop = item_popularity(train);

        std::vector<std::vector<Index>> recs(data.num_users()), profiles(data.num_users());
        std::vector<std::uint32_t> rec_counts(data.num_items(), 0);

        for (const Index u : plan.test_users(f)) {
            const auto held = plan.held_ratings(data, u);
            if (held.empty() || !model.has_user(u)) {
                ++row.skipped_users;
                continue;
            }
            ++row.test_users;
            const knn::UserScorer scorer(model, u);
            recs[u] = scorer.recommend(opt.top_n);
            const auto rated = model.rated_items(u);
            profiles[u].assign(rated.begin(), rated.end());

            for (const auto& [item, rating] : held) {
                ++held_total;
                if (auto p = scorer.predict(item)) scored.push_back({p->score, double(rating)});
            }
            if (auto n = metrics::ndcg_at_k(recs[u], held, 10)) {
                ndcg_sum += *n;
                ++ndcg_n;
            }
            for (auto i : recs[u]) {
                ++rec_counts[i];
                recommended_any[i] = 1;
            }
        }

        pop_corr_sum += metrics::pop_corr(train_pop, rec_counts);
        const auto a = metrics::arp(recs, train_pop);
        const auto p = metrics::pl(recs, profiles, train_pop);
        // Both summaries skip exactly the users without recommendations.
        for (std::size_t k = 0; k < a.per_user.size(); ++k) {
            out.samples.push_back({scenario_index, scenario_id, config_index, a.per_user[k].user, f, a.per_user[k].value,
                                   p.per_user[k].value});
            arp_values.push_back(a.per_user[k].value);
            pl_values.push_back(p.per_user[k].value);
        }
    }

    row.pop_corr = pop_corr_sum / plan.n_folds;
    row.arp = stats::mean(arp_values);
    row.pl = stats::mean(pl_values);
    row.agg_div = static_cast<double>(std::count(recommended_any.begin(), recommended_any.end(), 1)) /
                  static_cast<double>(data.num_items());
    row.rmse = metrics::rmse(scored);
    row.ndcg_at_10 = ndcg_n ? ndcg_sum / static_cast<double>(ndcg_n) : std::numeric_limits<double>::quiet_NaN();
    row.prediction_coverage = held_total ? static_cast<double>(scored.size()) / static_cast<double>(held_total) : 0.0;
    return out;
}

/// Runs `jobs` indices on a small pool; each job writes only its own slot.
template <class Fn>
void parallel_for(std::size_t jobs, unsigned threads, Fn&& fn) {
    if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, jobs));
    if (threads <= 1) {
        for (std::size_t j = 0; j < jobs; ++j) fn(j);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (std::size_t j = next++; j < jobs; j = next++) fn(j);
        });
    for (auto& th : pool) th.join();
}

inline void mark_significance(std::vector<MetricsRow>& rows, const std::vector<UserSample>& samples, double alpha) {
    auto values = [&](const MetricsRow& r, bool use_arp) {
        std::vector<double> v;
        for (const auto& s : samples)
            if (s.scenario_index == r.scenario_index && s.config_index == r.config_index) v.push_back(use_arp ? s.arp : s.pl);
        return v;
    };

    for (std::size_t b = 0; b < rows.size();) {
        std::size_t e = b;
        while (e < rows.size() && rows[e].scenario_index == rows[b].scenario_index) ++e;
        for (const bool use_arp : {true, false}) {
            auto metric = [&](const MetricsRow& r) { return use_arp ? r.arp : r.pl; };
            std::optional<std::size_t> top;
            for (auto k = b; k < e; ++k)
                if (!std::isnan(metric(rows[k])) && (!top || metric(rows[k]) > metric(rows[*top]))) top = k;
            if (!top) continue;
            const auto best = values(rows[*top], use_arp);
            for (auto k = b; k < e; ++k) {
                if (k == *top || std::isnan(metric(rows[k])) || !(metric(rows[k]) < metric(rows[*top]))) continue;
                const auto mine = values(rows[k], use_arp);
                if (mine.empty() || best.empty()) continue;
                const bool sig = stats::mann_whitney_u(mine, best).p_two_sided < alpha;
                (use_arp ? rows[k].arp_sig_lower : rows[k].pl_sig_lower) = sig;
            }
        }
        b = e;
    }
}

} // namespace detail

/// Full protocol: per scenario, synthesize ratings once; per configuration,
/// tune k (when requested) on the whole synthesized dataset, then run the
/// user-level folds, recommend top-n to every test user and pool the metrics
/// across folds. PopCorr is computed per fold against that fold's training
/// popularity and averaged. ARP and PL of every non-maximal configuration are
/// compared with the scenario's highest configuration by a two-sided
/// Mann-Whitney U test over the pooled per-user values.
///
/// A failing cell records its error in its row; the other cells still run.
/// Results do not depend on the thread count.
inline ExperimentResult run_experiment(const InteractionSkeleton& skeleton, const std::vector<ScenarioSpec>& scenarios,
                                       const std::vector<ConfigSpec>& configs, const ExperimentOptions& opt = {}) {
    if (scenarios.empty() || configs.empty()) throw ValidationError("run_experiment: empty scenario or config list");
    for (const auto& s : scenarios) s.validate();
    for (const auto& c : configs) {
        c.config.validate();
        if (c.tune && opt.k_grid.empty()) throw ValidationError("run_experiment: tuning requested with an empty k grid");
    }

    const FoldPlan plan = make_folds(skeleton, opt.n_folds, opt.holdout_frac, opt.seed_folds);
    std::vector<RatingDataset> datasets(scenarios.size());
    detail::parallel_for(scenarios.size(), opt.threads,
                         [&](std::size_t s) { datasets[s] = synthesize_ratings(skeleton, scenarios[s]); });

    const std::size_t cells = scenarios.size() * configs.size();
    std::vector<detail::CellOutput> outputs(cells);
    detail::parallel_for(cells, opt.threads, [&](std::size_t c) {
        const std::size_t s = c / configs.size(), k = c % configs.size();
        try {
            outputs[c] = detail::evaluate_cell(datasets[s], plan, s, scenarios[s].scenario_id, k, configs[k], opt);
        } catch (const std::exception& e) {
            auto& row = outputs[c].row;
            row.scenario_index = s;
            row.scenario_id = scenarios[s].scenario_id;
            row.config_index = k;
            row.config = configs[k].config;
            row.tuned = configs[k].tune;
            row.error = e.what();
        }
    });

    ExperimentResult result;
    for (auto& o : outputs) {
        result.rows.push_back(o.row);
        result.samples.insert(result.samples.end(), o.samples.begin(), o.samples.end());
        if (o.tuning) result.tuning.push_back(*o.tuning);
    }
    detail::mark_significance(result.rows, result.samples, opt.alpha);
    return result;
}

} // namespace popbias
