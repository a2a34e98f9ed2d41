// popbias: skeleton generation, rating synthesis, rating analysis,
// experiment grid and report rendering.
//
// Exit codes: 0 success, 2 validation or input error, 1 runtime failure.

#include <CLI11.hpp>
#include <fmt/format.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "popbias/popbias.hpp"

namespace fs = std::filesystem;
using namespace popbias;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitValidation = 2;

struct Overrides {
    std::string manifest;
    std::optional<std::uint64_t> seed_synth, seed_folds, seed_tune;
    std::optional<std::string> out;
    std::optional<std::string> scenarios;
    std::vector<std::string> configs;
    std::optional<unsigned> threads;
    std::optional<std::string> skeleton;
};

void add_common(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--manifest", o.manifest, "Run manifest (JSON)");
    cmd->add_option("--seed-synth", o.seed_synth, "Rating synthesis seed");
    cmd->add_option("--seed-folds", o.seed_folds, "Fold assignment seed");
    cmd->add_option("--seed-tune", o.seed_tune, "Tuning split seed");
    cmd->add_option("--out", o.out, "Output directory");
    cmd->add_option("--scenario", o.scenarios, "Scenario ids, comma separated");
    cmd->add_option("--config", o.configs, "min_sim,over_common,min_nbrs,k (k may be 'tune'); repeatable");
    cmd->add_option("--threads", o.threads, "Worker threads (0: all cores)");
    cmd->add_option("--skeleton", o.skeleton, "Interaction file used instead of the generator");
}

bool parse_flag(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (s == "true" || s == "1" || s == "common") return true;
    if (s == "false" || s == "0" || s == "all") return false;
    throw ValidationError("bad over_common value '" + s + "'");
}

ConfigSpec parse_config(const std::string& text) {
    std::vector<std::string> f;
    std::stringstream ss(text);
    for (std::string part; std::getline(ss, part, ',');) f.push_back(part);
    if (f.size() != 4) throw ValidationError("--config expects min_sim,over_common,min_nbrs,k; got '" + text + "'");
    ConfigSpec c;
    try {
        c.config.min_sim = std::stod(f[0]);
        c.config.over_common = parse_flag(f[1]);
        c.config.min_nbrs = std::stoi(f[2]);
        if (f[3] == "tune") {
            c.tune = true;
            c.config.k = c.config.min_nbrs;
        } else {
            c.config.k = std::stoi(f[3]);
        }
    } catch (const std::logic_error&) {
        throw ValidationError("--config has a non-numeric field: '" + text + "'");
    }
    return c;
}

std::vector<int> parse_ids(const std::string& text) {
    std::vector<int> ids;
    std::stringstream ss(text);
    for (std::string part; std::getline(ss, part, ',');) {
        try {
            std::size_t used = 0;
            ids.push_back(std::stoi(part, &used));
            if (used != part.size()) throw std::invalid_argument(part);
        } catch (const std::logic_error&) {
            throw ValidationError("bad scenario id '" + part + "'");
        }
    }
    if (ids.empty()) throw ValidationError("--scenario is empty");
    return ids;
}

/// Defaults, then the manifest, then command-line flags.
RunManifest effective_manifest(const Overrides& o) {
    RunManifest m = o.manifest.empty() ? RunManifest{} : load_manifest(o.manifest);
    if (o.seed_synth) m.seed_synth = *o.seed_synth;
    if (o.seed_folds) m.options.seed_folds = *o.seed_folds;
    if (o.seed_tune) m.options.seed_tune = *o.seed_tune;
    if (o.out) m.output_dir = *o.out;
    if (o.threads) m.options.threads = *o.threads;
    if (o.skeleton) m.skeleton_path = fs::path(*o.skeleton);
    if (o.scenarios) {
        const auto defaults = m.scenarios.empty() ? ScenarioEntry{} : m.scenarios.front();
        m.scenarios.clear();
        for (int id : parse_ids(*o.scenarios)) m.scenarios.push_back({id, defaults.sigma, defaults.profile_fraction});
    }
    if (!o.configs.empty()) {
        m.configs.clear();
        for (const auto& c : o.configs) m.configs.push_back(parse_config(c));
    }
    m.validate();
    return m;
}

InteractionSkeleton load_skeleton(const RunManifest& m) {
    return m.skeleton_path ? load_interactions(*m.skeleton_path) : generate_longtail_skeleton(m.generator);
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error("cannot create " + dir.string() + ": " + ec.message());
}

std::string to_string_of(auto&& writer) {
    std::ostringstream s;
    writer(s);
    return s.str();
}

int cmd_skeleton(const Overrides& o, LongTailParams p, bool users_set, bool items_set, bool inter_set, bool exp_set,
                 bool seed_set) {
    const RunManifest m = effective_manifest(o);
    LongTailParams g = m.generator;
    if (users_set) g.num_users = p.num_users;
    if (items_set) g.num_items = p.num_items;
    if (inter_set) g.num_interactions = p.num_interactions;
    if (exp_set) g.exponent = p.exponent;
    if (seed_set) g.seed = p.seed;

    const auto skeleton = generate_longtail_skeleton(g);
    ensure_dir(m.output_dir);
    const auto path = m.output_dir / "skeleton.csv";
    const std::string csv = to_string_of([&](std::ostream& s) { write_interactions(s, skeleton); });
    write_file_atomic(path, csv);

    RunManifest generated = m;
    generated.skeleton_path.reset();
    generated.generator = g;
    nlohmann::json side = to_json(generated)["skeleton"];
    side["sha256"] = sha256_hex(csv);
    side["manifest_hash"] = manifest_hash(generated);
    write_file_atomic(m.output_dir / "skeleton.json", side.dump(2) + "\n");
    std::cout << fmt::format("{}: {} users, {} items, {} interactions, mean item count {:.2f}\n", path.string(),
                             skeleton.num_users(), skeleton.num_items(), skeleton.size(),
                             static_cast<double>(skeleton.size()) / static_cast<double>(skeleton.num_items()));
    return kExitOk;
}

int cmd_synth(const Overrides& o, std::optional<double> sigma, std::optional<double> fraction) {
    RunManifest m = effective_manifest(o);
    for (auto& s : m.scenarios) {
        if (sigma) s.sigma = *sigma;
        if (fraction) s.profile_fraction = *fraction;
    }
    std::set<int> seen;
    for (const auto& s : m.scenarios)
        if (!seen.insert(s.id).second) throw ValidationError("scenario " + std::to_string(s.id) + " listed twice");
    m.validate();

    const auto skeleton = load_skeleton(m);
    ensure_dir(m.output_dir);
    const std::string hash = manifest_hash(m);
    for (const auto& spec : m.scenario_specs()) {
        spec.validate();
        const auto data = synthesize_ratings(skeleton, spec);
        const std::string csv = to_string_of([&](std::ostream& s) { write_ratings(s, data); });
        const auto base = fmt::format("ratings_s{}", spec.scenario_id);
        write_file_atomic(m.output_dir / (base + ".csv"), csv);

        nlohmann::json side;
        side["scenario"] = spec.scenario_id;
        side["sigma"] = spec.sigma;
        side["profile_fraction"] = spec.profile_fraction;
        side["seed"] = spec.seed;
        side["skeleton"] = to_json(m)["skeleton"];
        side["ratings"] = data.size();
        side["sha256"] = sha256_hex(csv);
        side["manifest_hash"] = hash;
        write_file_atomic(m.output_dir / (base + ".json"), side.dump(2) + "\n");
        std::cout << (m.output_dir / (base + ".csv")).string() << '\n';
    }
    return kExitOk;
}

int cmd_analyze(const std::string& ratings, double fraction, const std::optional<std::string>& out) {
    const auto data = load_ratings(ratings);
    const auto a = analyze_ratings(data, fraction);
    if (out) {
        ensure_dir(*out);
        write_file_atomic(fs::path(*out) / "analysis_items.csv",
                          to_string_of([&](std::ostream& s) { write_item_analysis_csv(s, a, data.items()); }));
        write_file_atomic(fs::path(*out) / "analysis_summary.csv",
                          to_string_of([&](std::ostream& s) { write_analysis_summary(s, a); }));
        const nlohmann::json side{{"ratings", ratings}, {"sha256", sha256_hex(slurp(ratings))},
                                  {"profile_fraction", fraction}};
        write_file_atomic(fs::path(*out) / "analysis.json", side.dump(2) + "\n");
    }
    write_analysis_summary(std::cout, a);
    return kExitOk;
}

int cmd_run(const Overrides& o) {
    const RunManifest m = effective_manifest(o);
    const std::string hash = manifest_hash(m);
    const auto skeleton = load_skeleton(m);
    const auto result = run_experiment(skeleton, m.scenario_specs(), m.configs, m.options);

    ensure_dir(m.output_dir);
    const auto& dir = m.output_dir;
    write_file_atomic(dir / "results.csv",
                      to_string_of([&](std::ostream& s) { write_results_csv(s, result.rows, hash); }));
    write_file_atomic(dir / "samples.csv", to_string_of([&](std::ostream& s) {
                          write_samples_csv(s, result.samples, skeleton.users(), hash);
                      }));
    write_file_atomic(dir / "tuning.csv",
                      to_string_of([&](std::ostream& s) { write_tuning_csv(s, result.tuning, hash); }));
    write_file_atomic(dir / "summary.txt", render_summary(result.rows, hash));

    auto effective = to_json(m);
    effective["manifest_hash"] = hash;
    write_file_atomic(dir / "manifest.json", effective.dump(2) + "\n");

    std::ostringstream log;
    log << "manifest " << hash << '\n';
    for (const auto& r : result.rows)
        log << fmt::format("scenario {} config {} (min_sim {:g}, over_common {}, min_nbrs {}, k {}): {}\n",
                           r.scenario_id, r.config_index, r.config.min_sim, r.config.over_common, r.config.min_nbrs,
                           r.config.k, r.error.empty() ? "ok" : "failed: " + r.error);
    write_file_atomic(dir / "run.log", log.str());

    std::cout << render_summary(result.rows, hash);
    if (!result.ok()) {
        std::cerr << "some cells failed; see " << (dir / "run.log").string() << '\n';
        return kExitRuntime;
    }
    return kExitOk;
}

int cmd_report(const std::string& results, const std::optional<std::string>& out) {
    std::ifstream in(results);
    if (!in) throw InputError("cannot open " + results);
    const auto table = read_results_csv(in);
    const auto text = render_summary(table.rows, table.manifest_hash);
    if (out)
        write_file_atomic(*out, text);
    else
        std::cout << text;
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Popularity-bias experiments with a configurable UserKNN"};
    app.require_subcommand(1);

    Overrides o;

    auto* skeleton = app.add_subcommand("skeleton", "Generate a long-tail interaction skeleton");
    add_common(skeleton, o);
    LongTailParams p;
    auto* o_users = skeleton->add_option("--users", p.num_users, "Number of users");
    auto* o_items = skeleton->add_option("--items", p.num_items, "Number of items");
    auto* o_inter = skeleton->add_option("--interactions", p.num_interactions, "Number of interactions");
    auto* o_exp = skeleton->add_option("--exponent", p.exponent, "Power-law exponent");
    auto* o_seed = skeleton->add_option("--seed", p.seed, "Generator seed");

    auto* synth = app.add_subcommand("synth", "Synthesize rating files for scenarios");
    add_common(synth, o);
    std::optional<double> sigma, fraction;
    synth->add_option("--sigma", sigma, "Standard deviation of normal draws");
    synth->add_option("--profile-fraction", fraction, "Share of largest profiles");

    auto* analyze = app.add_subcommand("analyze", "Item rating versus popularity analysis");
    std::string ratings_path;
    double analyze_fraction = 0.2;
    std::optional<std::string> analyze_out;
    analyze->add_option("ratings", ratings_path, "Rating file")->required();
    analyze->add_option("--profile-fraction", analyze_fraction, "Share of largest profiles");
    analyze->add_option("--out", analyze_out, "Output directory");

    auto* run = app.add_subcommand("run", "Run the scenario x configuration grid");
    add_common(run, o);

    auto* report = app.add_subcommand("report", "Render the summary table from a results file");
    std::string results_path;
    std::optional<std::string> report_out;
    report->add_option("results", results_path, "Results CSV")->required();
    report->add_option("--out", report_out, "Output file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitValidation;
    }

    try {
        if (*skeleton)
            return cmd_skeleton(o, p, o_users->count() > 0, o_items->count() > 0, o_inter->count() > 0,
                                o_exp->count() > 0, o_seed->count() > 0);
        if (*synth) return cmd_synth(o, sigma, fraction);
        if (*analyze) return cmd_analyze(ratings_path, analyze_fraction, analyze_out);
        if (*run) return cmd_run(o);
        if (*report) return cmd_report(results_path, report_out);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const UnknownIdError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitRuntime;
}
