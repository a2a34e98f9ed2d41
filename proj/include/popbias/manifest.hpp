#pragma once

// Run manifest: a JSON document naming the skeleton source, the scenario and
// configuration grid, the protocol settings and the three seeds.
//
//   {
//     "skeleton": {"path": "skeleton.csv"}
//              | {"generate": {"num_users": 2000, "num_items": 1500,
//                              "num_interactions": 50000, "exponent": 1.0, "seed": 7}},
//     "scenarios": [{"id": 1, "sigma": 1.0, "profile_fraction": 0.2}, ...],
//     "configs": [{"min_sim": -1, "over_common": false, "min_nbrs": 1, "k": "tune"}, ...],
//     "k_grid": [10, 50, 200, 1000],
//     "n_folds": 5, "holdout_frac": 0.2, "top_n": 10, "alpha": 0.005,
//     "seeds": {"synth": 42, "folds": 1, "tune": 2},
//     "output_dir": "out", "threads": 0
//   }
//
// Every key is optional; unknown keys are rejected.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "popbias/error.hpp"
#include "popbias/experiment.hpp"
#include "popbias/hash.hpp"
#include "popbias/skeleton.hpp"
#include "popbias/synth.hpp"

namespace popbias {

struct ScenarioEntry {
    int id = 1;
    double sigma = 1.0;
    double profile_fraction = 0.2;

    friend bool operator==(const ScenarioEntry&, const ScenarioEntry&) = default;
};

struct RunManifest {
    std::optional<std::filesystem::path> skeleton_path;  ///< when empty, `generator` is used
    LongTailParams generator;
    std::vector<ScenarioEntry> scenarios{{1}, {2}, {3}, {4}, {5}};
    std::vector<ConfigSpec> configs = default_configs();
    ExperimentOptions options;
    std::uint64_t seed_synth = 42;
    std::filesystem::path output_dir = "out";

    std::vector<ScenarioSpec> scenario_specs() const {
        std::vector<ScenarioSpec> out;
        for (const auto& s : scenarios) out.push_back({s.id, s.sigma, s.profile_fraction, seed_synth});
        return out;
    }

    void validate() const {
        if (skeleton_path && !std::filesystem::exists(*skeleton_path))
            throw ValidationError("skeleton file not found: " + skeleton_path->string());
        if (scenarios.empty()) throw ValidationError("manifest: no scenarios");
        if (configs.empty()) throw ValidationError("manifest: no configs");
        for (const auto& s : scenario_specs()) s.validate();
        for (const auto& c : configs) {
            c.config.validate();
            if (!c.tune) continue;
            if (options.k_grid.empty()) throw ValidationError("manifest: tuned config with empty k_grid");
            for (int k : options.k_grid)
                if (k < c.config.min_nbrs)
                    throw ValidationError("manifest: k_grid value " + std::to_string(k) + " below min_nbrs");
        }
        if (options.n_folds < 2) throw ValidationError("manifest: n_folds must be at least 2");
        if (!(options.holdout_frac > 0.0 && options.holdout_frac < 1.0))
            throw ValidationError("manifest: holdout_frac must be in (0, 1)");
        if (options.top_n < 1) throw ValidationError("manifest: top_n must be positive");
        if (!(options.alpha > 0.0 && options.alpha < 1.0)) throw ValidationError("manifest: alpha must be in (0, 1)");
    }
};

namespace detail {

using nlohmann::json;

inline void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& where) {
    if (!obj.is_object()) throw ValidationError("manifest: " + where + " must be an object");
    for (const auto& [key, _] : obj.items())
        if (!known.count(key)) throw ValidationError("manifest: unknown key '" + key + "' in " + where);
}

template <class T>
void read_if(const json& obj, const char* key, T& into) {
    if (!obj.contains(key)) return;
    try {
        into = obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ValidationError(std::string("manifest: bad value for '") + key + "': " + e.what());
    }
}

inline json config_to_json(const ConfigSpec& c) {
    json j{{"min_sim", c.config.min_sim}, {"over_common", c.config.over_common}, {"min_nbrs", c.config.min_nbrs}};
    if (c.tune)
        j["k"] = "tune";
    else
        j["k"] = c.config.k;
    return j;
}

inline ConfigSpec config_from_json(const json& j) {
    reject_unknown(j, {"min_sim", "over_common", "min_nbrs", "k"}, "config");
    ConfigSpec c;
    c.tune = true;
    read_if(j, "min_sim", c.config.min_sim);
    read_if(j, "over_common", c.config.over_common);
    read_if(j, "min_nbrs", c.config.min_nbrs);
    if (j.contains("k")) {
        const auto& k = j.at("k");
        if (k.is_string() && k.get<std::string>() == "tune") {
            c.tune = true;
        } else if (k.is_number_integer()) {
            c.tune = false;
            c.config.k = k.get<int>();
        } else {
            throw ValidationError("manifest: config k must be an integer or \"tune\"");
        }
    }
    if (c.tune) c.config.k = c.config.min_nbrs;
    return c;
}

} // namespace detail

/// Canonical JSON form. `threads` and `output_dir` are included for
/// round-tripping; `manifest_hash` ignores them.
inline nlohmann::json to_json(const RunManifest& m) {
    using nlohmann::json;
    json j;
    if (m.skeleton_path) {
        j["skeleton"] = {{"path", m.skeleton_path->generic_string()}};
    } else {
        const auto& g = m.generator;
        j["skeleton"] = {{"generate",
                          {{"num_users", g.num_users},
                           {"num_items", g.num_items},
                           {"num_interactions", g.num_interactions},
                           {"exponent", g.exponent},
                           {"seed", g.seed}}}};
    }
    j["scenarios"] = json::array();
    for (const auto& s : m.scenarios)
        j["scenarios"].push_back({{"id", s.id}, {"sigma", s.sigma}, {"profile_fraction", s.profile_fraction}});
    j["configs"] = json::array();
    for (const auto& c : m.configs) j["configs"].push_back(detail::config_to_json(c));
    const auto& o = m.options;
    j["k_grid"] = o.k_grid;
    j["n_folds"] = o.n_folds;
    j["holdout_frac"] = o.holdout_frac;
    j["top_n"] = o.top_n;
    j["alpha"] = o.alpha;
    j["seeds"] = {{"synth", m.seed_synth}, {"folds", o.seed_folds}, {"tune", o.seed_tune}};
    j["output_dir"] = m.output_dir.generic_string();
    j["threads"] = o.threads;
    return j;
}

/// Parses a manifest on top of the defaults. Relative paths resolve against
/// `base_dir`.
inline RunManifest manifest_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {}) {
    using detail::read_if;
    detail::reject_unknown(j,
                           {"skeleton", "scenarios", "configs", "k_grid", "n_folds", "holdout_frac", "top_n", "alpha",
                            "seeds", "output_dir", "threads"},
                           "manifest");
    RunManifest m;
    auto resolve = [&](const std::string& p) {
        std::filesystem::path path(p);
        return path.is_relative() && !base_dir.empty() ? base_dir / path : path;
    };

    if (j.contains("skeleton")) {
        const auto& s = j.at("skeleton");
        detail::reject_unknown(s, {"path", "generate"}, "skeleton");
        if (s.contains("path") == s.contains("generate"))
            throw ValidationError("manifest: skeleton needs exactly one of 'path' or 'generate'");
        if (s.contains("path")) {
            std::string p;
            read_if(s, "path", p);
            m.skeleton_path = resolve(p);
        } else {
            const auto& g = s.at("generate");
            detail::reject_unknown(g, {"num_users", "num_items", "num_interactions", "exponent", "seed"}, "generate");
            read_if(g, "num_users", m.generator.num_users);
            read_if(g, "num_items", m.generator.num_items);
            read_if(g, "num_interactions", m.generator.num_interactions);
            read_if(g, "exponent", m.generator.exponent);
            read_if(g, "seed", m.generator.seed);
        }
    }
    if (j.contains("scenarios")) {
        if (!j.at("scenarios").is_array()) throw ValidationError("manifest: scenarios must be an array");
        m.scenarios.clear();
        for (const auto& s : j.at("scenarios")) {
            ScenarioEntry e;
            if (s.is_number_integer()) {
                e.id = s.get<int>();
            } else {
                detail::reject_unknown(s, {"id", "sigma", "profile_fraction"}, "scenario");
                read_if(s, "id", e.id);
                read_if(s, "sigma", e.sigma);
                read_if(s, "profile_fraction", e.profile_fraction);
            }
            m.scenarios.push_back(e);
        }
    }
    if (j.contains("configs")) {
        if (!j.at("configs").is_array()) throw ValidationError("manifest: configs must be an array");
        m.configs.clear();
        for (const auto& c : j.at("configs")) m.configs.push_back(detail::config_from_json(c));
    }
    auto& o = m.options;
    read_if(j, "k_grid", o.k_grid);
    read_if(j, "n_folds", o.n_folds);
    read_if(j, "holdout_frac", o.holdout_frac);
    read_if(j, "top_n", o.top_n);
    read_if(j, "alpha", o.alpha);
    read_if(j, "threads", o.threads);
    if (j.contains("seeds")) {
        const auto& s = j.at("seeds");
        detail::reject_unknown(s, {"synth", "folds", "tune"}, "seeds");
        read_if(s, "synth", m.seed_synth);
        read_if(s, "folds", o.seed_folds);
        read_if(s, "tune", o.seed_tune);
    }
    if (j.contains("output_dir")) {
        std::string p;
        read_if(j, "output_dir", p);
        m.output_dir = resolve(p);
    }
    return m;
}

inline RunManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open manifest " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("manifest " + path.string() + ": " + e.what());
    }
    return manifest_from_json(j, path.parent_path());
}

/// SHA-256 of the canonical JSON form without `threads` and `output_dir`.
/// The skeleton file contributes its content hash rather than its path.
inline std::string manifest_hash(const RunManifest& m) {
    auto j = to_json(m);
    j.erase("threads");
    j.erase("output_dir");
    if (m.skeleton_path) {
        std::ifstream in(*m.skeleton_path, std::ios::binary);
        if (!in) throw ValidationError("cannot open skeleton " + m.skeleton_path->string());
        std::ostringstream buf;
        buf << in.rdbuf();
        j["skeleton"] = {{"sha256", sha256_hex(buf.str())}};
    }
    return sha256_hex(j.dump());
}

} // namespace popbias
