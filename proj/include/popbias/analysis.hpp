#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include <fmt/format.h>

#include "popbias/dataset.hpp"
#include "popbias/popularity.hpp"

namespace popbias {

/// Per-item rating and popularity data for a rating-vs-popularity plot.
struct ItemAnalysis {
    Index item;
    std::uint32_t popularity;
    double avg_rating_all;
    double avg_rating_top;  ///< NaN when no top-profile user rated the item
    std::uint32_t top_raters;
};

struct RatingAnalysis {
    std::vector<ItemAnalysis> items;
    std::optional<double> corr_all;
    std::optional<double> corr_top;
    std::size_t top_users = 0;
    double profile_fraction = 0.2;
};

inline RatingAnalysis analyze_ratings(const RatingDataset& data, double profile_fraction = 0.2) {
    RatingAnalysis out;
    out.profile_fraction = profile_fraction;
    const auto pop = item_popularity(data);
    const auto top = top_profile_users(profile_stats(data), profile_fraction);
    out.top_users = top.size();
    std::vector<char> is_top(data.num_users(), 0);
    for (auto u : top) is_top[u] = 1;

    std::vector<double> sum_all(data.num_items(), 0.0), sum_top(data.num_items(), 0.0);
    std::vector<std::uint32_t> n_top(data.num_items(), 0);
    for (const auto& t : data.triples()) {
        sum_all[t.item] += t.rating;
        if (is_top[t.user]) {
            sum_top[t.item] += t.rating;
            ++n_top[t.item];
        }
    }
    for (Index i = 0; i < data.num_items(); ++i) {
        if (!pop.contains(i)) continue;
        out.items.push_back({i, pop.counts[i], sum_all[i] / pop.counts[i],
                             n_top[i] ? sum_top[i] / n_top[i] : std::numeric_limits<double>::quiet_NaN(), n_top[i]});
    }
    out.corr_all = rating_popularity_correlation(data);
    out.corr_top = rating_popularity_correlation(data, std::span<const Index>(top));
    return out;
}

inline void write_item_analysis_csv(std::ostream& out, const RatingAnalysis& a, const IdTable& items) {
    out << "item,popularity,avg_rating_all,avg_rating_top,top_raters\n";
    for (const auto& r : a.items)
        out << items.name(r.item) << ',' << r.popularity << ',' << fmt::format("{:.6f}", r.avg_rating_all) << ','
            << (std::isnan(r.avg_rating_top) ? std::string("NA") : fmt::format("{:.6f}", r.avg_rating_top)) << ','
            << r.top_raters << '\n';
}

inline void write_analysis_summary(std::ostream& out, const RatingAnalysis& a) {
    auto f = [](const std::optional<double>& x) { return x ? fmt::format("{:.6f}", *x) : std::string("NA"); };
    out << "measure,value\n";
    out << "items," << a.items.size() << '\n';
    out << "top_users," << a.top_users << '\n';
    out << "profile_fraction," << fmt::format("{:g}", a.profile_fraction) << '\n';
    out << "corr_all," << f(a.corr_all) << '\n';
    out << "corr_top," << f(a.corr_top) << '\n';
}

} // namespace popbias
