#pragma once

#include <functional>
#include <string>
#include <vector>

#include "imcmc/diagnostics.hpp"
#include "imcmc/rng.hpp"

namespace imcmc {

// Continuous-state base chain driving a path-space flow: samplers and
// densities instead of matrices. The exact oracle does not apply; only
// rate-shape diagnostics run on these models.
struct ContinuousModel {
    std::string name;
    int levels = 0;  // m
    std::function<double(Rng&)> sample_initial;
    // index l-1 holds Ltilde_l: sample and density of the move into level l
    std::vector<std::function<double(double, Rng&)>> sample_transition;
    std::vector<std::function<double(double, double)>> transition_density;
    // Gtilde_l evaluated at the last coordinate, l = 0..m-1
    std::vector<std::function<double(double)>> potential;
};

// Bi-Laplace drift chain: L_l(x, dy) ~ (c/2) exp(-c |y - tanh(x)|) dy with
// c = 1, a bounded-oscillation drift, and potentials bounded away from 0.
ContinuousModel bilaplace_model(int levels = 3);

enum class ContinuousKernel { DirectPhi, MetropolisHastings };

// Laplace independence-type proposal for MH moves on a continuous path
// model (density available pointwise).
struct ContinuousProposal {
    std::function<double(double, Rng&)> sample;        // z ~ K(u_last, .)
    std::function<double(double, double)> density;     // K(u_last, z)
};
ContinuousProposal bilaplace_proposal();

// Scalar observables of the last coordinate, recorded per level.
struct ContinuousObservable {
    std::string name;
    std::function<double(double)> f;
};
std::vector<ContinuousObservable> continuous_observables();

// One self-interacting run over the continuous path model; occupation
// measures store raw paths. Returns eta_n^(k)(f) VALUES per checkpoint
// (references are pooled across replicates by the caller).
struct ContinuousValues {
    std::vector<ErrorRecord> values;  // error field holds the raw value
};

ContinuousValues run_continuous_replicate(const ContinuousModel& model, ContinuousKernel kernel,
                                          const ContinuousProposal& proposal, std::int64_t horizon,
                                          const std::vector<std::int64_t>& checkpoints,
                                          std::uint64_t seed, int replicate,
                                          const std::vector<ContinuousObservable>& obs);

}  // namespace imcmc
