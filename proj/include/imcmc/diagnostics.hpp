#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "imcmc/kernels.hpp"

namespace imcmc {

// One signed error observation. level -1 tags path-space (joint occupation)
// records; the function id names the test function.
struct ErrorRecord {
    std::int64_t n = 0;
    int level = 0;
    int replicate = 0;
    std::string function;
    double error = 0.0;
};

struct DiagnosticsSeries {
    std::vector<ErrorRecord> records;
    std::string model_id;
    std::string kernel_id;
    std::uint64_t seed = 0;

    void append(const DiagnosticsSeries& other);
};

// Named test functions on one space: every coordinate indicator plus one
// seeded +/-1 function (covers the oscillation-one functions the error
// bounds quantify over).
struct TestFunction {
    std::string name;
    std::vector<double> values;
};

std::vector<TestFunction> test_function_basis(const SpacePtr& space, std::uint64_t seed);

using CurveKey = std::pair<int, std::string>;  // (level, function)

// Monte Carlo L_r norm across replicates, per (level, function, checkpoint):
// E(|err|^r)^(1/r). Needs >= 2 replicates and r >= 1.
std::map<CurveKey, std::vector<std::pair<std::int64_t, double>>> lr_error_curve(
    const DiagnosticsSeries& series, double r);

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;  // in log space
    double residual = 0.0;   // rms of log residuals
    std::int64_t n_lo = 0;
    std::int64_t n_hi = 0;
};

// Least-squares slope of log(curve) against log(n). Curve values must be
// positive; needs >= 5 checkpoints.
RateFit rate_fit(const std::vector<std::pair<std::int64_t, double>>& curve);

// One-sided Mann-Kendall test for an upward trend; returns the p-value of
// the "no upward trend" null (small p = significant upward trend).
double mann_kendall_upward_p(const std::vector<double>& values);

struct TailPoint {
    std::int64_t n;
    double threshold;
    double empirical;  // fraction of replicates with |err| > threshold
    double bound;      // theoretical overlay (2exp(...) form), clipped to 1
};

struct ConcentrationConstants {
    int n0 = 1;
    double b = 0.0;
    double c = 0.0;
};

// Empirical exceedance frequencies per checkpoint with the explicit
// theoretical overlay evaluated from certified constants.
std::vector<TailPoint> concentration_tail(const DiagnosticsSeries& series, int level,
                                          const std::string& function,
                                          const std::vector<double>& thresholds,
                                          const ConcentrationConstants& constants);

// Threshold t(n, delta) of the occupation-flow concentration bound:
// (2 n0/(1-b))^2 sqrt(2/(n+1)) (sqrt(log(2/delta)) + 2(1+c)).
double simc_concentration_threshold(std::int64_t n, double delta,
                                    const ConcentrationConstants& constants);

struct StabilityProfile {
    std::vector<int> ks;
    std::vector<double> sup_beta;  // sup over l of beta(P_{l,l+k})
    double lambda1 = 0.0;
    double lambda2 = 0.0;  // +inf sentinel when beta hits exactly 0
    int k0 = -1;           // smallest k with fit residual < 10%, -1 if none
    bool stable = false;
};

// Exact beta(P_{l,l+k}) sweep over the given ranges and a log-linear decay
// fit of the sup-over-l profile.
StabilityProfile stability_profile(const FeynmanKacModel& model, int l_min, int l_max,
                                   int k_min, int k_max);

struct UniformLevelProfile {
    std::vector<std::pair<std::int64_t, double>> sup_curve;  // sup over levels of L_r error
    double fitted_exponent = 0.0;                            // of n^{-x} (x = -slope)
    double predicted_alpha = 0.0;                            // lambda2/(lambda2+log B)
    bool b_is_one = false;
    bool surrogate_constants = true;
};

// Per-checkpoint sup over levels of the L_r error against the predicted
// n^{-alpha/2} envelope. Requires the stability profile (dependency) and
// the flow constants for B.
UniformLevelProfile uniform_level_profile(const DiagnosticsSeries& series, double r,
                                          const StabilityProfile& stability,
                                          const RegularityConstants& constants);

// L_r curves restricted to path-space records (level -1).
std::map<CurveKey, std::vector<std::pair<std::int64_t, double>>> path_space_error(
    const DiagnosticsSeries& series, double r);

}  // namespace imcmc
