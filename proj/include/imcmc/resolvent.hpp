#pragma once

#include <functional>
#include <optional>

#include "imcmc/diagnostics.hpp"
#include "imcmc/kernels.hpp"
#include "imcmc/rng.hpp"

#include "json.hpp"

namespace imcmc {

// Smallest power n0 <= max_power with beta(K^n0) <= threshold, together
// with that beta. Empty when none exists (treated as non-ergodic; bounds
// degenerate as beta -> 1, so the cutoff keeps constants meaningful).
std::optional<std::pair<int, double>> contracting_power(const FiniteKernel& kernel,
                                                        double threshold = 0.95,
                                                        int max_power = 64);

// Unique stationary probability of an ergodic kernel (dense partial-pivot
// solve of the stationarity system). Throws NonErgodicError when no
// contracting power exists within the search budget.
DiscreteMeasure invariant_measure(const FiniteKernel& kernel);

struct PoissonResiduals {
    double invariance = 0.0;  // || omega K - omega ||
    double poisson = 0.0;     // max-norm of (K - I)P - (1omega - I)
    double centering = 0.0;   // max |omega P|
    double max() const;
};

// Solution of the Poisson equation: P = (I - K + 1omega)^{-1} - 1omega,
// acting on functions, with the identity defects recorded.
struct PoissonSolution {
    FiniteKernel kernel;
    DiscreteMeasure omega;
    std::vector<double> resolvent;  // square, row-major
    PoissonResiduals residuals;

    std::size_t dim() const { return omega.weights.size(); }
    double resolvent_at(std::size_t x, std::size_t y) const {
        return resolvent[x * dim() + y];
    }
    double norm() const;  // operator norm: max row absolute sum
    double beta() const;  // Dobrushin coefficient of the mass-zero kernel P
};

PoissonSolution poisson_solve(const FiniteKernel& kernel);

// alpha(K) = sum_n beta(K^n), summed until the term drops below 1e-14 with
// the geometric tail added; returns the upper endpoint.
double alpha_of(const FiniteKernel& kernel);

// Measure-indexed kernel family K_mu on E driven by probability measures
// on F, with fast row/invariant accessors for simulation. flow space F and
// state space E coincide in self-interacting mode.
struct ChainDriver {
    SpacePtr flow_space;
    SpacePtr state_space;
    std::function<FiniteKernel(const DiscreteMeasure&)> kernel;
    std::function<DiscreteMeasure(const DiscreteMeasure&)> invariant;
    std::function<DiscreteMeasure(const DiscreteMeasure&, std::size_t)> row;
    std::string name;
};

ChainDriver constant_driver(const FiniteKernel& kernel);
// K_mu(x, .) = Phi_{l+1}(mu): F = S^(l), E = S^(l+1).
ChainDriver direct_phi_driver(const FeynmanKacModel& model, int l);
// K_mu = (1-theta) K + theta (1 x muL) on E = F.
ChainDriver mixture_driver(const FiniteKernel& base, const FiniteKernel& feedback, double theta);

// || K_eta - K_mu ||: max over rows of the row total variation.
double kernel_distance(const FiniteKernel& a, const FiniteKernel& b);

struct LipschitzPair {
    double flow_distance;       // ||eta - mu||
    double omega_distance;      // ||omega(eta) - omega(mu)||
    double delta_bound;         // c_hat n0 / (1 - min beta(K^n0)) * ||eta - mu||
    double resolvent_distance;  // ||P_eta - P_mu||
    double resolvent_bound;     // alpha(eta)(2 c_hat alpha(mu) + delta) ||eta-mu||
    int n0;
    bool omega_ok;
    bool resolvent_ok;
};

struct LipschitzReport {
    double c_hat = 0.0;  // max ||K_eta - K_mu|| / ||eta - mu|| over samples
    std::vector<LipschitzPair> pairs;
    bool all_ok = true;

    nlohmann::json to_json() const;
};

// Empirical Lipschitz constant and per-pair verification of the invariant
// measure and resolvent perturbation bounds over random measure pairs.
LipschitzReport lipschitz_certificates(const ChainDriver& driver, int samples,
                                       std::uint64_t seed);

enum class FlowMode { External, SelfInteracting };

struct InhomogeneousRunReport {
    DiagnosticsSeries series;  // errors eta_n(f) - omega_bar_n(f)
    bool variation_bounds_ok = true;  // self mode: eps(n) and mean variation
    double max_eps_excess = 0.0;
};

// Simulates X_{n+1} ~ K_{mu_n}(X_n, .) over replicates with independent
// (seed, replicate) streams, recording occupation-vs-averaged-invariant
// errors at the checkpoints. In self-interacting mode mu_n is the chain's
// own occupation measure and the occupation variation bounds are asserted
// per step.
InhomogeneousRunReport run_inhomogeneous(
    const ChainDriver& driver, FlowMode mode,
    const std::function<DiscreteMeasure(std::int64_t)>& external_flow, std::int64_t n_max,
    int replicates, std::uint64_t seed, const std::vector<std::int64_t>& checkpoints,
    const std::vector<TestFunction>& functions);

}  // namespace imcmc
