// cffedsr: federated sequential-recommendation simulator front end.
//
// Subcommands:
//   run      one experiment (possibly over several seeds), emits CSV + JSON
//   compare  side-by-side metric table for stored result bundles
//   ablate   cf_fedsr plus the three ablation variants on shared data
//   sweep    one experiment per value of a hyper-parameter

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "cffedsr/config.hpp"
#include "cffedsr/dataio.hpp"
#include "cffedsr/fedcore.hpp"
#include "cffedsr/serialize.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace cffedsr;

namespace {

std::string fmtd(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::uint64_t log_hash(const InteractionLog& log) {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&](long long v) {
        for (int i = 0; i < 8; ++i) {
            h ^= static_cast<unsigned char>(v >> (8 * i));
            h *= 1099511628211ULL;
        }
    };
    mix(log.num_users);
    mix(log.num_items);
    for (const auto& r : log.records) {
        mix(r.user);
        mix(r.item);
        mix(r.timestamp);
    }
    return h;
}

InteractionLog load_dataset(const AppConfig& cfg) {
    if (!cfg.dataset_path.empty()) return load_interactions(cfg.dataset_path);
    return generate_synthetic(cfg.syn);
}

void write_per_round_csv(const ExperimentResult& res, const fs::path& path) {
    std::ofstream out(path);
    out << "round,hr5,ndcg5,hr10,ndcg10,fairness_variance,participants,cumulative_bytes\n";
    long long cum = 0;
    for (const auto& r : res.rounds) {
        cum += r.bytes;
        out << r.round << ',' << fmtd(r.mean_hr5) << ',' << fmtd(r.mean_ndcg5) << ','
            << fmtd(r.mean_hr10) << ',' << fmtd(r.mean_ndcg10) << ','
            << fmtd(r.fairness_variance) << ',' << r.participants.size() << ',' << cum << '\n';
    }
}

struct BundleSummary {
    std::string path;
    json j;
};

// Runs the experiment once per seed and writes the bundle directory.
json run_bundle(const AppConfig& base, const std::vector<int>& seeds, const fs::path& dir) {
    fs::create_directories(dir);
    InteractionLog log = load_dataset(base);
    std::vector<ClientDataset> clients = build_clients(log, base.min_len, base.syn.seed,
                                                       base.max_train_len);

    json per_seed = json::array();
    double hr5 = 0, ndcg5 = 0, hr10 = 0, ndcg10 = 0, fair = 0, conv = 0, bytes = 0;
    for (int s : seeds) {
        AppConfig cfg = base;
        cfg.run.seed = static_cast<std::uint64_t>(s);
        ExperimentResult res = cfg.run.algorithm == Algorithm::central
                                   ? run_central(cfg.run, clients, log.num_items)
                                   : run_experiment(cfg.run, clients, log.num_items);
        fs::path sdir = dir / ("seed_" + std::to_string(s));
        fs::create_directories(sdir);
        write_per_round_csv(res, sdir / "per_round.csv");
        json sj = summary_json(res);
        sj["seed"] = s;
        std::ofstream(sdir / "summary.json") << sj.dump(2) << '\n';
        hr5 += res.hr5;
        ndcg5 += res.ndcg5;
        hr10 += res.hr10;
        ndcg10 += res.ndcg10;
        fair += res.fairness_variance;
        conv += res.convergence_round.value_or(res.rounds_executed);
        bytes += static_cast<double>(res.total_bytes);
        sj.erase("client_outcomes");
        per_seed.push_back(sj);
    }
    const double n = static_cast<double>(seeds.size());
    json top;
    top["algorithm"] = to_string(base.run.algorithm);
    top["seeds"] = seeds;
    top["hr5"] = hr5 / n;
    top["ndcg5"] = ndcg5 / n;
    top["hr10"] = hr10 / n;
    top["ndcg10"] = ndcg10 / n;
    top["fairness_variance"] = fair / n;
    top["convergence_round"] = conv / n;
    top["total_bytes"] = bytes / n;
    top["per_seed"] = per_seed;
    top["dataset_hash"] = log_hash(log);
    json echo = json::object();
    for (const auto& [k, v] : config_echo(base)) echo[k] = v;
    top["config"] = echo;
    std::ofstream(dir / "summary.json") << top.dump(2) << '\n';

    std::ofstream cf(dir / "config.txt");
    for (const auto& [k, v] : config_echo(base)) cf << k << " = " << v << '\n';
    return top;
}

std::vector<int> parse_seeds(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stoi(tok));
    if (out.empty()) throw ConfigError("empty seed list");
    return out;
}

AppConfig load_config(const std::string& path, const std::vector<std::string>& sets) {
    AppConfig cfg = path.empty() ? AppConfig{} : parse_config_file(path);
    for (const auto& kv : sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
        apply_override(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    return cfg;
}

const std::vector<std::string> kCompareMetrics = {"hr5", "ndcg5", "hr10", "ndcg10",
                                                  "fairness_variance", "convergence_round"};

// Side-by-side table with relative improvement over the first bundle.
void compare_bundles(const std::vector<BundleSummary>& bundles, const fs::path& csv_out) {
    for (const auto& b : bundles)
        for (const auto& m : kCompareMetrics)
            if (!b.j.contains(m))
                throw std::runtime_error(b.path + ": missing metric '" + m + "'");

    std::ofstream csv(csv_out);
    csv << "bundle";
    for (const auto& m : kCompareMetrics) csv << ',' << m << ',' << m << "_impro_pct";
    csv << '\n';

    std::printf("%-28s", "bundle");
    for (const auto& m : kCompareMetrics) std::printf(" %18s", m.c_str());
    std::printf("\n");
    const json& base = bundles[0].j;
    for (const auto& b : bundles) {
        std::string name = fs::path(b.path).filename().string();
        if (name.empty()) name = b.j.value("algorithm", b.path);
        std::printf("%-28s", name.c_str());
        csv << name;
        for (const auto& m : kCompareMetrics) {
            const double v = b.j[m].get<double>();
            const double bv = base[m].get<double>();
            const double impro = bv != 0.0 ? (v - bv) / bv * 100.0 : 0.0;
            std::printf(" %10.4f %+6.2f%%", v, impro);
            csv << ',' << fmtd(v) << ',' << fmtd(impro);
        }
        std::printf("\n");
        csv << '\n';
    }
}

BundleSummary read_bundle(const std::string& path) {
    std::ifstream in(fs::path(path) / "summary.json");
    if (!in) throw std::runtime_error("cannot read bundle summary in " + path);
    BundleSummary b;
    b.path = path;
    in >> b.j;
    return b;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"CF-FedSR federated sequential recommendation simulator"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out", seeds_str = "1";
    std::vector<std::string> sets;
    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "config file (key = value lines)");
        cmd->add_option("--set", sets, "override, key=value (repeatable)");
        cmd->add_option("--out", out_dir, "output directory");
        cmd->add_option("--seeds", seeds_str, "comma-separated seed list");
    };

    auto* run = app.add_subcommand("run", "run one experiment");
    add_common(run);

    auto* compare = app.add_subcommand("compare", "compare stored result bundles");
    std::vector<std::string> bundle_paths;
    compare->add_option("bundles", bundle_paths, "bundle directories")->expected(-2);
    std::string compare_csv = "comparison.csv";
    compare->add_option("--out", compare_csv, "comparison CSV path");

    auto* ablate = app.add_subcommand("ablate", "cf_fedsr vs variations 1-3");
    add_common(ablate);

    auto* sweep = app.add_subcommand("sweep", "hyper-parameter sweep");
    add_common(sweep);
    std::string sweep_param, sweep_values;
    sweep->add_option("--param", sweep_param, "one of: d, k, gamma, alpha_beta")->required();
    sweep->add_option("--values", sweep_values, "comma-separated values")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) ? 1 : 0;
    }

    try {
        if (run->parsed()) {
            AppConfig cfg = load_config(config_path, sets);
            cfg.run.validate();
            std::vector<int> seeds = parse_seeds(seeds_str);
            fs::path dir = fs::path(out_dir) / (config_hash(cfg) + "_" + to_string(cfg.run.algorithm));
            json top = run_bundle(cfg, seeds, dir);
            std::printf("bundle: %s\n", dir.string().c_str());
            std::printf("hr10=%.4f ndcg10=%.4f fairness_variance=%.6f convergence_round=%.1f\n",
                        top["hr10"].get<double>(), top["ndcg10"].get<double>(),
                        top["fairness_variance"].get<double>(),
                        top["convergence_round"].get<double>());
        } else if (compare->parsed()) {
            std::vector<BundleSummary> bundles;
            for (const auto& p : bundle_paths) bundles.push_back(read_bundle(p));
            if (bundles.size() < 2) throw ConfigError("compare needs at least 2 bundles");
            compare_bundles(bundles, compare_csv);
        } else if (ablate->parsed()) {
            AppConfig cfg = load_config(config_path, sets);
            std::vector<int> seeds = parse_seeds(seeds_str);
            std::vector<BundleSummary> bundles;
            for (const char* alg : {"cf_fedsr", "variation1", "variation2", "variation3"}) {
                AppConfig c = cfg;
                c.run.algorithm = algorithm_from_string(alg);
                c.run.validate();
                fs::path dir = fs::path(out_dir) / (config_hash(c) + "_" + alg);
                bundles.push_back({dir.string(), run_bundle(c, seeds, dir)});
            }
            compare_bundles(bundles, fs::path(out_dir) / "ablation.csv");
        } else if (sweep->parsed()) {
            AppConfig cfg = load_config(config_path, sets);
            std::vector<int> seeds = parse_seeds(seeds_str);
            std::vector<BundleSummary> bundles;
            std::stringstream ss(sweep_values);
            std::string val;
            while (std::getline(ss, val, ',')) {
                AppConfig c = cfg;
                if (sweep_param == "d") apply_override(c, "d", val);
                else if (sweep_param == "k") apply_override(c, "k", val);
                else if (sweep_param == "gamma") apply_override(c, "gamma", val);
                else if (sweep_param == "alpha_beta") {
                    const auto colon = val.find(':');
                    if (colon == std::string::npos)
                        throw ConfigError("alpha_beta values look like alpha:beta");
                    apply_override(c, "alpha", val.substr(0, colon));
                    apply_override(c, "beta", val.substr(colon + 1));
                } else throw ConfigError("unknown sweep param '" + sweep_param + "'");
                c.run.validate();
                fs::path dir = fs::path(out_dir) /
                               (config_hash(c) + "_" + sweep_param + "_" + val);
                bundles.push_back({dir.string(), run_bundle(c, seeds, dir)});
            }
            if (bundles.empty()) throw ConfigError("no sweep values given");
            if (bundles.size() > 1) compare_bundles(bundles, fs::path(out_dir) / "sweep.csv");
        }
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
