#pragma once

#include <map>
#include <optional>
#include <string>

#include "imcmc/continuous.hpp"
#include "imcmc/diagnostics.hpp"
#include "imcmc/exact_oracle.hpp"
#include "imcmc/samplers.hpp"

#include "json.hpp"

namespace imcmc {

// Known diagnostic suites: rates, concentration, path-space, normalizers,
// stability, uniform.
const std::vector<std::string>& known_suites();

struct ExperimentPlan {
    std::string model_name = "fk3";
    std::optional<FeynmanKacModel> model;
    std::optional<ContinuousModel> continuous;
    ContinuousKernel continuous_kernel = ContinuousKernel::DirectPhi;
    std::vector<LevelKernelSpec> specs;  // finite models, one per level
    std::string kernel_label = "direct-phi";
    std::int64_t horizon = 1 << 14;
    std::vector<std::int64_t> checkpoints;  // defaults to dyadic 2^6..2^14
    int replicates = 200;
    std::uint64_t seed = 0;
    int workers = 0;
    std::vector<std::string> suites = {"rates"};
    int path_track_levels = 2;   // joint occupation over levels 0..this
    std::int64_t burn_in = 0;    // occupation reset after this many ticks; off by default
};

std::vector<std::int64_t> dyadic_checkpoints(int lo_exp, int hi_exp, std::int64_t horizon);

struct ExperimentResult {
    DiagnosticsSeries series;
    nlohmann::json summary;
    std::optional<ExactFlow> exact_flow;
};

ExperimentResult run_experiment(const ExperimentPlan& plan);

// Long-format CSV (RFC 4180: header row, CRLF) of the error records,
// sorted by (n, level, replicate, function) for byte-stable output.
std::string render_csv(const DiagnosticsSeries& series);

// Self-contained gnuplot script with the aggregated RMSE curves inlined.
std::string render_plot_script(const DiagnosticsSeries& series, const std::string& title);

// Stages files in a temp directory next to `out_dir` and renames them into
// place, so no artifact is ever partially written.
void write_artifacts(const std::string& out_dir, const std::map<std::string, std::string>& files);

}  // namespace imcmc
