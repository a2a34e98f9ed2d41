#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "helpers.hpp"
#include "popbias/experiment.hpp"

using namespace popbias;
using testing_helpers::small_skeleton;

namespace {

ExperimentOptions quick_options(unsigned threads = 1) {
    ExperimentOptions opt;
    opt.k_grid = {5, 20};
    opt.threads = threads;
    return opt;
}

ConfigSpec fixed(double min_sim, bool common, int min_nbrs, int k) { return {{min_sim, common, min_nbrs, k}, false}; }

bool same_row(const MetricsRow& a, const MetricsRow& b) {
    auto eq = [](double x, double y) { return (std::isnan(x) && std::isnan(y)) || x == y; };
    return a.config == b.config && eq(a.pop_corr, b.pop_corr) && eq(a.arp, b.arp) && eq(a.pl, b.pl) &&
           eq(a.agg_div, b.agg_div) && a.rmse == b.rmse && eq(a.ndcg_at_10, b.ndcg_at_10) &&
           a.arp_sig_lower == b.arp_sig_lower && a.pl_sig_lower == b.pl_sig_lower && a.test_users == b.test_users &&
           a.error == b.error;
}

} // namespace

TEST(Experiment, SingleCellHasNoFlags) {
    const auto r = run_experiment(small_skeleton(), {{2, 1.0, 0.2, 5}}, {fixed(0.0, false, 1, 20)}, quick_options());
    ASSERT_EQ(r.rows.size(), 1U);
    const auto& row = r.rows[0];
    EXPECT_TRUE(row.error.empty());
    EXPECT_FALSE(row.arp_sig_lower);
    EXPECT_FALSE(row.pl_sig_lower);
    EXPECT_FALSE(row.tuned);
    EXPECT_EQ(row.config.k, 20);
    EXPECT_TRUE(r.tuning.empty());
}

TEST(Experiment, MetricRanges) {
    const auto sk = small_skeleton();
    const auto r = run_experiment(sk, {{1, 1.0, 0.2, 5}, {3, 1.0, 0.2, 5}},
                                  {fixed(-1.0, false, 1, 20), fixed(0.0, true, 2, 10)}, quick_options());
    ASSERT_EQ(r.rows.size(), 4U);
    for (const auto& row : r.rows) {
        ASSERT_TRUE(row.error.empty()) << row.error;
        EXPECT_GE(row.pop_corr, -1.0);
        EXPECT_LE(row.pop_corr, 1.0);
        EXPECT_GT(row.arp, 0.0);
        EXPECT_LE(row.arp, 1.0);
        EXPECT_GE(row.pl, -100.0);
        EXPECT_GT(row.agg_div, 0.0);
        EXPECT_LE(row.agg_div, 1.0);
        ASSERT_TRUE(row.rmse.has_value());
        EXPECT_GE(*row.rmse, 0.0);
        EXPECT_LE(*row.rmse, 9.0);
        EXPECT_GE(row.ndcg_at_10, 0.0);
        EXPECT_LE(row.ndcg_at_10, 1.0);
        EXPECT_GT(row.prediction_coverage, 0.0);
        EXPECT_LE(row.prediction_coverage, 1.0);
        EXPECT_EQ(row.test_users + row.skipped_users, sk.num_users());
    }
    EXPECT_EQ(r.rows[0].scenario_id, 1);
    EXPECT_EQ(r.rows[2].scenario_id, 3);
    EXPECT_EQ(r.rows[3].config_index, 1U);
}

TEST(Experiment, IdenticalConfigsGiveIdenticalRows) {
    const auto c = fixed(0.0, false, 1, 15);
    const auto r = run_experiment(small_skeleton(), {{4, 1.0, 0.2, 5}}, {c, c}, quick_options());
    ASSERT_EQ(r.rows.size(), 2U);
    auto a = r.rows[0], b = r.rows[1];
    b.config_index = a.config_index;
    EXPECT_TRUE(same_row(a, b));
    EXPECT_FALSE(a.arp_sig_lower || b.arp_sig_lower || a.pl_sig_lower || b.pl_sig_lower);
}

TEST(Experiment, IndependentOfThreadCount) {
    const std::vector<ScenarioSpec> sc{{1, 1.0, 0.2, 5}, {2, 1.0, 0.2, 5}};
    const std::vector<ConfigSpec> cf{{{-1.0, false, 1, 20}, true}, fixed(0.0, false, 2, 10)};
    const auto a = run_experiment(small_skeleton(), sc, cf, quick_options(1));
    const auto b = run_experiment(small_skeleton(), sc, cf, quick_options(4));
    ASSERT_EQ(a.rows.size(), b.rows.size());
    for (std::size_t k = 0; k < a.rows.size(); ++k) EXPECT_TRUE(same_row(a.rows[k], b.rows[k])) << k;
    ASSERT_EQ(a.samples.size(), b.samples.size());
    for (std::size_t k = 0; k < a.samples.size(); ++k) {
        EXPECT_EQ(a.samples[k].user, b.samples[k].user);
        EXPECT_EQ(a.samples[k].arp, b.samples[k].arp);
    }
    ASSERT_EQ(a.tuning.size(), 2U);
    EXPECT_EQ(a.tuning[0].chosen_k, b.tuning[0].chosen_k);
}

TEST(Experiment, TunedCellRecordsGrid) {
    const auto r = run_experiment(small_skeleton(), {{2, 1.0, 0.2, 5}}, {{{0.0, false, 1, 20}, true}}, quick_options());
    ASSERT_EQ(r.tuning.size(), 1U);
    EXPECT_EQ(r.tuning[0].rmse_by_k.size(), 2U);
    EXPECT_TRUE(r.rows[0].tuned);
    EXPECT_EQ(r.rows[0].config.k, r.tuning[0].chosen_k);
}

TEST(Experiment, FailingCellKeepsOthers) {
    auto opt = quick_options();
    opt.k_grid = {2};
    const auto r = run_experiment(small_skeleton(), {{1, 1.0, 0.2, 5}},
                                  {fixed(0.0, false, 1, 10), {{0.0, false, 3, 20}, true}}, opt);
    ASSERT_EQ(r.rows.size(), 2U);
    EXPECT_TRUE(r.rows[0].error.empty());
    EXPECT_NE(r.rows[1].error.find("below min_nbrs"), std::string::npos);
    EXPECT_TRUE(std::isnan(r.rows[1].arp));
}

TEST(Experiment, RejectsEmptyGrid) {
    EXPECT_THROW(run_experiment(small_skeleton(), {}, default_configs()), ValidationError);
    EXPECT_THROW(run_experiment(small_skeleton(), {{1, 1.0, 0.2, 5}}, {}), ValidationError);
}

TEST(Significance, MarksClearlyLowerConfig) {
    std::vector<MetricsRow> rows(3);
    std::vector<UserSample> samples;
    for (std::size_t c = 0; c < 3; ++c) {
        rows[c].scenario_index = 0;
        rows[c].config_index = c;
    }
    // config 0 highest; config 1 far below; config 2 slightly below and overlapping.
    const double shift[] = {0.0, -5.0, -0.05};
    for (std::size_t c = 0; c < 3; ++c) {
        double sa = 0, sp = 0;
        for (int k = 0; k < 30; ++k) {
            const double v = 10.0 + 0.1 * k + shift[c];
            samples.push_back({0, 1, c, static_cast<Index>(k), 0, v, v});
            sa += v;
            sp += v;
        }
        rows[c].arp = sa / 30;
        rows[c].pl = sp / 30;
    }
    detail::mark_significance(rows, samples, 0.005);
    EXPECT_FALSE(rows[0].arp_sig_lower);
    EXPECT_TRUE(rows[1].arp_sig_lower);
    EXPECT_TRUE(rows[1].pl_sig_lower);
    EXPECT_FALSE(rows[2].arp_sig_lower);
    EXPECT_FALSE(rows[2].pl_sig_lower);
}

TEST(Significance, ScenariosAreSeparate) {
    std::vector<MetricsRow> rows(2);
    std::vector<UserSample> samples;
    for (std::size_t s = 0; s < 2; ++s) {
        rows[s].scenario_index = s;
        rows[s].config_index = 0;
        for (int k = 0; k < 20; ++k) samples.push_back({s, int(s), 0, Index(k), 0, s * 10.0 + k, s * 10.0 + k});
        rows[s].arp = rows[s].pl = s * 10.0 + 9.5;
    }
    detail::mark_significance(rows, samples, 0.005);
    EXPECT_FALSE(rows[0].arp_sig_lower);
    EXPECT_FALSE(rows[0].pl_sig_lower);
}
