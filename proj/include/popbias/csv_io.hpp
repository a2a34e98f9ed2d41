#pragma once

// Interaction and rating files: UTF-8, comma separated, LF line endings, an
// optional `user,item[,rating]` header line, no quoting.

#include <charconv>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "popbias/dataset.hpp"
#include "popbias/error.hpp"

namespace popbias {

namespace detail {

inline std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(',', start);
        fields.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return fields;
}

struct CsvRow {
    std::size_t line_no;
    std::string user;
    std::string item;
    std::optional<int> rating;
};

inline std::vector<CsvRow> read_rows(std::istream& in, const std::string& source, bool need_rating) {
    std::vector<CsvRow> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line_no == 1 && (line == "user,item" || line == "user,item,rating")) continue;

        const auto fields = split_commas(line);
        auto fail = [&](const std::string& why) {
            return InputError(source + ":" + std::to_string(line_no) + ": " + why);
        };
        if (fields.size() < 2 || fields.size() > 3) throw fail("expected user,item[,rating]");
        if (fields[0].empty() || fields[1].empty()) throw fail("empty user or item id");

        CsvRow row{line_no, std::string(fields[0]), std::string(fields[1]), std::nullopt};
        if (fields.size() == 3) {
            int value = 0;
            const auto f = fields[2];
            const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), value);
            if (ec != std::errc{} || ptr != f.data() + f.size()) throw fail("rating is not an integer");
            row.rating = value;
        } else if (need_rating) {
            throw fail("missing rating column");
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw InputError(source + ": no interactions (empty input)");
    return rows;
}

inline std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path.string());
    return in;
}

} // namespace detail

inline InteractionSkeleton read_interactions(std::istream& in, const std::string& source = "<stream>") {
    const auto rows = detail::read_rows(in, source, false);
    std::vector<std::pair<std::string, std::string>> pairs;
    pairs.reserve(rows.size());
    for (const auto& r : rows) pairs.emplace_back(r.user, r.item);
    try {
        return InteractionSkeleton::from_pairs(pairs);
    } catch (const InputError& e) {
        throw InputError(source + ": " + e.what());
    }
}

inline InteractionSkeleton load_interactions(const std::filesystem::path& path) {
    auto in = detail::open_input(path);
    return read_interactions(in, path.string());
}

inline RatingDataset read_ratings(std::istream& in, const std::string& source = "<stream>") {
    const auto rows = detail::read_rows(in, source, true);
    std::vector<std::tuple<std::string, std::string, int>> triples;
    triples.reserve(rows.size());
    for (const auto& r : rows) {
        if (*r.rating < kMinRating || *r.rating > kMaxRating)
            throw InputError(source + ":" + std::to_string(r.line_no) + ": rating outside 1..10");
        triples.emplace_back(r.user, r.item, *r.rating);
    }
    try {
        return RatingDataset::from_triples(triples);
    } catch (const InputError& e) {
        throw InputError(source + ": " + e.what());
    }
}

inline RatingDataset load_ratings(const std::filesystem::path& path) {
    auto in = detail::open_input(path);
    return read_ratings(in, path.string());
}

inline void write_interactions(std::ostream& out, const InteractionSkeleton& skeleton) {
    out << "user,item\n";
    for (const auto& p : skeleton.interactions())
        out << skeleton.users().name(p.user) << ',' << skeleton.items().name(p.item) << '\n';
}

inline void write_ratings(std::ostream& out, const RatingDataset& data) {
    out << "user,item,rating\n";
    for (const auto& t : data.triples())
        out << data.users().name(t.user) << ',' << data.items().name(t.item) << ',' << t.rating << '\n';
}

} // namespace popbias
