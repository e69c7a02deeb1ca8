#pragma once

#include <map>
#include <optional>
#include <string>

#include "imcmc/experiment.hpp"

#include "json.hpp"

namespace imcmc {

// Declarative experiment description. TOML (subset: tables, scalar values,
// nested arrays, comments) or an equivalent JSON document.
struct ExperimentConfig {
    std::string model = "fk3";
    std::optional<nlohmann::json> inline_model;
    std::uint64_t seed = 0;
    bool has_seed = false;
    std::int64_t horizon = 1 << 14;
    int replicates = 200;
    int workers = 0;
    std::string out_dir = "out";
    std::vector<std::string> suites = {"rates"};
    std::string kernel = "direct-phi";  // default for levels >= 1
    std::map<int, std::string> kernel_overrides;
    int mh_steps = 1;
    int path_levels = 2;
    std::int64_t burn_in = 0;
};

// Minimal TOML reader covering the config surface; returns the equivalent
// JSON document. Throws ConfigError with line information.
nlohmann::json parse_toml(const std::string& text);

ExperimentConfig config_from_json(const nlohmann::json& j);

// Dispatches on extension: .json parses as JSON, anything else as TOML.
ExperimentConfig load_config(const std::string& path);

// Inline model document -> validated model.
FeynmanKacModel model_from_json(const nlohmann::json& j);

// Resolves the model, kernel specs and suites into a runnable plan.
ExperimentPlan make_plan(const ExperimentConfig& config);

}  // namespace imcmc
