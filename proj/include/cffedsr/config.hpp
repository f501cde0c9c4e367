#pragma once

#include <map>
#include <string>

#include "cffedsr/dataio.hpp"
#include "cffedsr/fedcore.hpp"

namespace cffedsr {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Experiment configuration: the federation knobs plus the data source
// (a CSV path or the synthetic generator).
struct AppConfig {
    RunConfig run;
    std::string dataset_path;  // empty -> synthetic
    SyntheticConfig syn;
    int min_len = 3;
    int max_train_len = 50;
};

// Line-oriented `key = value` file; '#' starts a comment. Unknown keys are
// rejected with the offending line.
AppConfig parse_config_file(const std::string& path);

// `key=value` override as given on the command line.
void apply_override(AppConfig& cfg, const std::string& key, const std::string& value);

// Every knob with its effective value, in a fixed key order; feeding the
// echo back reproduces the run.
std::map<std::string, std::string> config_echo(const AppConfig& cfg);

std::string config_hash(const AppConfig& cfg);

}  // namespace cffedsr
