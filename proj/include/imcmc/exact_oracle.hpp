#pragma once

#include <span>

#include "imcmc/kernels.hpp"
#include "imcmc/rng.hpp"

#include "json.hpp"

namespace imcmc {

// Exact solution of the flow on a finite model: targets pi^(l), log
// normalizing constants, and the per-level potential means that build them.
struct ExactFlow {
    std::vector<DiscreteMeasure> targets;   // pi^(l), l = 0..m
    std::vector<double> log_gamma1;         // log gamma^(l)(1), l = 0..m
    std::vector<double> potentials_means;   // pi^(k)(G_k), k = 0..m-1

    nlohmann::json to_json() const;
};

// pi^(l+1) = Phi_{l+1}(pi^(l)), log gamma^(l)(1) = sum_{k<l} log pi^(k)(G_k).
ExactFlow solve_flow(const FeynmanKacModel& model);

// gamma^(l)(f) by full path enumeration:
//   sum over (y_0..y_l) of pi^(0)(y_0) prod L(y_k,y_{k+1}) prod G_k(y_k) f(y_l).
// Independent of solve_flow; the two must agree through the identity
// gamma^(l)(f) = pi^(l)(f) gamma^(l)(1). Guarded at `max_paths` paths.
double brute_force_gamma(const FeynmanKacModel& model, int l, std::span<const double> f,
                         std::size_t max_paths = 10'000'000);

// Tensor product pi^(0) x ... x pi^(m') on the product space.
DiscreteMeasure exact_path_target(const FeynmanKacModel& model, int up_to_level,
                                  std::size_t max_points = 10'000'000);
DiscreteMeasure exact_path_target(const FeynmanKacModel& model);

// Random small model for property tests: transition entries uniform then
// row-normalized, potentials log-uniform in [1/e, e], initial uniform-drawn
// then normalized. Condition (G) holds by construction.
FeynmanKacModel random_model(std::uint64_t seed, std::size_t n_states, int n_levels);

}  // namespace imcmc
