#pragma once

// Result files of an experiment run: the results table, per-user samples,
// the tuning log and a plain-text summary table.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>

#include "popbias/csv_io.hpp"
#include "popbias/dataset.hpp"
#include "popbias/error.hpp"
#include "popbias/experiment.hpp"

namespace popbias {

inline constexpr std::string_view kResultsHeader =
    "scenario,min_sim,over_common,min_nbrs,pop_corr,arp,pl,agg_div,rmse,ndcg_at_10,k,tuned,arp_sig_lower,"
    "pl_sig_lower,prediction_coverage,test_users,skipped_users,scenario_index,config_index,error,manifest_hash";

namespace detail {

inline std::string fmt_real(double x) { return std::isnan(x) ? std::string("NA") : fmt::format("{:.6f}", x); }

inline std::string fmt_real(const std::optional<double>& x) { return x ? fmt_real(*x) : std::string("NA"); }

/// Error text made safe for a comma-separated field.
inline std::string csv_text(std::string s) {
    for (auto& c : s)
        if (c == ',' || c == '\n' || c == '\r') c = ';';
    return s;
}

inline double parse_real(std::string_view s, std::size_t line) {
    if (s == "NA") return std::numeric_limits<double>::quiet_NaN();
    try {
        std::size_t used = 0;
        const double v = std::stod(std::string(s), &used);
        if (used != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw InputError("results line " + std::to_string(line) + ": bad number '" + std::string(s) + "'");
    }
}

inline long long parse_int(std::string_view s, std::size_t line) {
    long long v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size())
        throw InputError("results line " + std::to_string(line) + ": bad integer '" + std::string(s) + "'");
    return v;
}

inline bool parse_bool(std::string_view s, std::size_t line) {
    if (s == "true") return true;
    if (s == "false") return false;
    throw InputError("results line " + std::to_string(line) + ": bad flag '" + std::string(s) + "'");
}

} // namespace detail

inline void write_results_csv(std::ostream& out, const std::vector<MetricsRow>& rows, const std::string& hash) {
    using detail::fmt_real;
    out << kResultsHeader << '\n';
    for (const auto& r : rows) {
        out << r.scenario_id << ',' << fmt::format("{:g}", r.config.min_sim) << ','
            << (r.config.over_common ? "true" : "false") << ',' << r.config.min_nbrs << ',' << fmt_real(r.pop_corr)
            << ',' << fmt_real(r.arp) << ',' << fmt_real(r.pl) << ',' << fmt_real(r.agg_div) << ',' << fmt_real(r.rmse)
            << ',' << fmt_real(r.ndcg_at_10) << ',' << r.config.k << ',' << (r.tuned ? "true" : "false") << ','
            << (r.arp_sig_lower ? "true" : "false") << ',' << (r.pl_sig_lower ? "true" : "false") << ','
            << fmt_real(r.prediction_coverage) << ',' << r.test_users << ',' << r.skipped_users << ','
            << r.scenario_index << ',' << r.config_index << ',' << detail::csv_text(r.error) << ',' << hash << '\n';
    }
}

struct ResultsTable {
    std::vector<MetricsRow> rows;
    std::string manifest_hash;
};

inline ResultsTable read_results_csv(std::istream& in) {
    ResultsTable table;
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw InputError("results file is empty");
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kResultsHeader) throw InputError("results file has an unexpected header");

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto f = detail::split_commas(line);
        if (f.size() != 21) throw InputError("results line " + std::to_string(line_no) + ": expected 21 fields");
        MetricsRow r;
        const auto n = line_no;
        r.scenario_id = static_cast<int>(detail::parse_int(f[0], n));
        r.config.min_sim = detail::parse_real(f[1], n);
        r.config.over_common = detail::parse_bool(f[2], n);
        r.config.min_nbrs = static_cast<int>(detail::parse_int(f[3], n));
        r.pop_corr = detail::parse_real(f[4], n);
        r.arp = detail::parse_real(f[5], n);
        r.pl = detail::parse_real(f[6], n);
        r.agg_div = detail::parse_real(f[7], n);
        if (const double v = detail::parse_real(f[8], n); !std::isnan(v)) r.rmse = v;
        r.ndcg_at_10 = detail::parse_real(f[9], n);
        r.config.k = static_cast<int>(detail::parse_int(f[10], n));
        r.tuned = detail::parse_bool(f[11], n);
        r.arp_sig_lower = detail::parse_bool(f[12], n);
        r.pl_sig_lower = detail::parse_bool(f[13], n);
        r.prediction_coverage = detail::parse_real(f[14], n);
        r.test_users = static_cast<std::size_t>(detail::parse_int(f[15], n));
        r.skipped_users = static_cast<std::size_t>(detail::parse_int(f[16], n));
        r.scenario_index = static_cast<std::size_t>(detail::parse_int(f[17], n));
        r.config_index = static_cast<std::size_t>(detail::parse_int(f[18], n));
        r.error = std::string(f[19]);
        table.manifest_hash = std::string(f[20]);
        table.rows.push_back(std::move(r));
    }
    return table;
}

/// One line per (cell, user, fold); users written by their external id.
inline void write_samples_csv(std::ostream& out, const std::vector<UserSample>& samples, const IdTable& users,
                              const std::string& hash) {
    out << "scenario,scenario_index,config_index,user,fold,arp,pl,manifest_hash\n";
    for (const auto& s : samples)
        out << s.scenario_id << ',' << s.scenario_index << ',' << s.config_index << ',' << users.name(s.user) << ','
            << s.fold << ',' << fmt::format("{:.9g}", s.arp) << ',' << fmt::format("{:.9g}", s.pl) << ',' << hash
            << '\n';
}

inline void write_tuning_csv(std::ostream& out, const std::vector<TuningRecord>& tuning, const std::string& hash) {
    out << "scenario,scenario_index,config_index,k,validation_rmse,chosen,manifest_hash\n";
    for (const auto& t : tuning)
        for (const auto& [k, rmse] : t.rmse_by_k)
            out << t.scenario_id << ',' << t.scenario_index << ',' << t.config_index << ',' << k << ','
                << detail::fmt_real(rmse) << ',' << (k == t.chosen_k ? "true" : "false") << ',' << hash << '\n';
}

/// Plain-text results table: the
/// highest PopCorr, ARP and PL within each scenario are wrapped in `**`, and
/// ARP/PL values significantly below the scenario maximum carry `*`.
inline std::string render_summary(const std::vector<MetricsRow>& rows, const std::string& hash) {
    std::ostringstream out;
    out << "manifest " << hash << "\n\n";
    out << fmt::format("{:<9} {:>7} {:>6} {:>5} {:>5} {:>12} {:>12} {:>14} {:>8} {:>7} {:>8}\n", "scenario",
                       "min_sim", "common", "nbrs", "k", "PopCorr", "ARP", "PL", "AggDiv", "RMSE", "NDCG@10");

    for (std::size_t b = 0; b < rows.size();) {
        std::size_t e = b;
        while (e < rows.size() && rows[e].scenario_index == rows[b].scenario_index) ++e;

        auto max_of = [&](auto get) {
            double best = -std::numeric_limits<double>::infinity();
            for (auto k = b; k < e; ++k)
                if (!std::isnan(get(rows[k]))) best = std::max(best, get(rows[k]));
            return best;
        };
        const double max_pc = max_of([](const MetricsRow& r) { return r.pop_corr; });
        const double max_arp = max_of([](const MetricsRow& r) { return r.arp; });
        const double max_pl = max_of([](const MetricsRow& r) { return r.pl; });
        auto cell = [](double v, double best, bool sig, const char* spec) {
            if (std::isnan(v)) return std::string("NA");
            std::string s = fmt::format(fmt::runtime(spec), v);
            if (v == best) s = "**" + s + "**";
            if (sig) s += "*";
            return s;
        };

        for (auto k = b; k < e; ++k) {
            const auto& r = rows[k];
            if (!r.error.empty()) {
                out << fmt::format("{:<9} {:>7g} {:>6} {:>5} {:>5}  failed: {}\n", r.scenario_id, r.config.min_sim,
                                   r.config.over_common ? "true" : "false", r.config.min_nbrs, r.config.k, r.error);
                continue;
            }
            out << fmt::format("{:<9} {:>7g} {:>6} {:>5} {:>5} {:>12} {:>12} {:>14} {:>8} {:>7} {:>8}\n",
                               r.scenario_id, r.config.min_sim, r.config.over_common ? "true" : "false",
                               r.config.min_nbrs, r.config.k, cell(r.pop_corr, max_pc, false, "{:.3f}"),
                               cell(r.arp, max_arp, r.arp_sig_lower, "{:.4f}"), cell(r.pl, max_pl, r.pl_sig_lower, "{:.3f}"),
                               std::isnan(r.agg_div) ? std::string("NA") : fmt::format("{:.3f}", r.agg_div), r.rmse ? fmt::format("{:.3f}", *r.rmse) : "NA",
                               std::isnan(r.ndcg_at_10) ? std::string("NA") : fmt::format("{:.4f}", r.ndcg_at_10));
        }
        b = e;
    }
    return out.str();
}

/// Writes `content` to `path` through a temporary sibling and a rename.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out << content;
        if (!out.flush()) throw Error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

} // namespace popbias
