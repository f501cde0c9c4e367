#include "cffedsr/config.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

namespace cffedsr {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

int parse_int(const std::string& key, const std::string& v) {
    try {
        std::size_t pos;
        int out = std::stoi(v, &pos);
        if (pos != v.size()) throw std::exception();
        return out;
    } catch (...) {
        throw ConfigError("key '" + key + "': expected integer, got '" + v + "'");
    }
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos;
        double out = std::stod(v, &pos);
        if (pos != v.size()) throw std::exception();
        return out;
    } catch (...) {
        throw ConfigError("key '" + key + "': expected number, got '" + v + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError("key '" + key + "': expected true/false, got '" + v + "'");
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void apply_override(AppConfig& c, const std::string& key, const std::string& value) {
    RunConfig& r = c.run;
    if (key == "algorithm") {
        try {
            r.algorithm = algorithm_from_string(value);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    } else if (key == "clients_per_round") r.clients_per_round = parse_int(key, value);
    else if (key == "total_rounds") r.total_rounds = parse_int(key, value);
    else if (key == "local_epochs") r.local_epochs = parse_int(key, value);
    else if (key == "lr") r.lr = parse_double(key, value);
    else if (key == "dropout") r.dropout = parse_double(key, value);
    else if (key == "d") r.dim = parse_int(key, value);
    else if (key == "k") r.k = parse_int(key, value);
    else if (key == "lambda1") r.lambda1 = parse_int(key, value);
    else if (key == "lambda2") r.lambda2 = parse_int(key, value);
    else if (key == "v1") r.v1 = parse_int(key, value);
    else if (key == "v2") r.v2 = parse_int(key, value);
    else if (key == "alpha") r.alpha = parse_double(key, value);
    else if (key == "beta") r.beta = parse_double(key, value);
    else if (key == "gamma") r.gamma = parse_double(key, value);
    else if (key == "ft_steps") r.ft_steps = parse_int(key, value);
    else if (key == "ft_lr") r.ft_lr = parse_double(key, value);
    else if (key == "patience") r.patience = parse_int(key, value);
    else if (key == "conv_patience") r.conv_patience = parse_int(key, value);
    else if (key == "kmeans_max_iter") r.kmeans_max_iter = parse_int(key, value);
    else if (key == "train_negatives") r.train_negatives = parse_int(key, value);
    else if (key == "literal_eq5_eq8") r.literal_eq5_eq8 = parse_bool(key, value);
    else if (key == "interpolate_each_round") r.interpolate_each_round = parse_bool(key, value);
    else if (key == "reset_optimizer_each_round")
        r.reset_optimizer_each_round = parse_bool(key, value);
    else if (key == "full_eval_every") r.full_eval_every = parse_int(key, value);
    else if (key == "threads") r.threads = parse_int(key, value);
    else if (key == "central_epochs") r.central_epochs = parse_int(key, value);
    else if (key == "seed") r.seed = static_cast<std::uint64_t>(parse_int(key, value));
    else if (key == "dataset") c.dataset_path = value;
    else if (key == "min_len") c.min_len = parse_int(key, value);
    else if (key == "max_train_len") c.max_train_len = parse_int(key, value);
    else if (key == "syn_clients") c.syn.num_clients = parse_int(key, value);
    else if (key == "syn_items") c.syn.num_items = parse_int(key, value);
    else if (key == "syn_clusters") c.syn.num_clusters = parse_int(key, value);
    else if (key == "syn_len_min") c.syn.seq_len_min = parse_int(key, value);
    else if (key == "syn_len_max") c.syn.seq_len_max = parse_int(key, value);
    else if (key == "syn_noise") c.syn.noise = parse_double(key, value);
    else throw ConfigError("unknown key '" + key + "'");
}

AppConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    AppConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + " line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        try {
            apply_override(cfg, key, value);
        } catch (const ConfigError& e) {
            throw ConfigError(path + " line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return cfg;
}

std::map<std::string, std::string> config_echo(const AppConfig& c) {
    const RunConfig& r = c.run;
    std::map<std::string, std::string> m;
    m["algorithm"] = to_string(r.algorithm);
    m["clients_per_round"] = std::to_string(r.clients_per_round);
    m["total_rounds"] = std::to_string(r.total_rounds);
    m["local_epochs"] = std::to_string(r.local_epochs);
    m["lr"] = fmt(r.lr);
    m["dropout"] = fmt(r.dropout);
    m["d"] = std::to_string(r.dim);
    m["k"] = std::to_string(r.k);
    m["lambda1"] = std::to_string(r.lambda1);
    m["lambda2"] = std::to_string(r.lambda2);
    m["v1"] = std::to_string(r.v1);
    m["v2"] = std::to_string(r.v2);
    m["alpha"] = fmt(r.alpha);
    m["beta"] = fmt(r.beta);
    m["gamma"] = fmt(r.gamma);
    m["ft_steps"] = std::to_string(r.ft_steps);
    m["ft_lr"] = fmt(r.ft_lr);
    m["patience"] = std::to_string(r.patience);
    m["conv_patience"] = std::to_string(r.conv_patience);
    m["kmeans_max_iter"] = std::to_string(r.kmeans_max_iter);
    m["train_negatives"] = std::to_string(r.train_negatives);
    m["literal_eq5_eq8"] = r.literal_eq5_eq8 ? "true" : "false";
    m["interpolate_each_round"] = r.interpolate_each_round ? "true" : "false";
    m["reset_optimizer_each_round"] = r.reset_optimizer_each_round ? "true" : "false";
    m["full_eval_every"] = std::to_string(r.full_eval_every);
    m["threads"] = std::to_string(r.threads);
    m["central_epochs"] = std::to_string(r.central_epochs);
    m["seed"] = std::to_string(r.seed);
    m["dataset"] = c.dataset_path;
    m["min_len"] = std::to_string(c.min_len);
    m["max_train_len"] = std::to_string(c.max_train_len);
    m["syn_clients"] = std::to_string(c.syn.num_clients);
    m["syn_items"] = std::to_string(c.syn.num_items);
    m["syn_clusters"] = std::to_string(c.syn.num_clusters);
    m["syn_len_min"] = std::to_string(c.syn.seq_len_min);
    m["syn_len_max"] = std::to_string(c.syn.seq_len_max);
    m["syn_noise"] = fmt(c.syn.noise);
    return m;
}

std::string config_hash(const AppConfig& c) {
    std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
    for (const auto& [k, v] : config_echo(c)) {
        for (char ch : k + "=" + v + "\n") {
            h ^= static_cast<unsigned char>(ch);
            h *= 1099511628211ULL;
        }
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace cffedsr
