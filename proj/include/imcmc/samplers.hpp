#pragma once

#include <variant>

#include "imcmc/kernels.hpp"
#include "imcmc/rng.hpp"

#include "json.hpp"

namespace imcmc {

// Per-level transition choices of the self-interacting chain.
//
// BaseMcmc: level-0 only, a fixed kernel M^(0) with invariant pi^(0).
// DirectPhi: sample X_{n+1}^(k) ~ Phi_k(eta_n^(k-1)) directly (select an
//   ancestor proportional to its potential, then mutate).
// MetropolisHastings: proposal mu x K_l targeting Phi_l(mu); path-space
//   models only, so the reference kernel R_l of the acceptance ratio exists.
struct BaseMcmcSpec {
    FiniteKernel kernel;
};
struct DirectPhiSpec {};
struct MetropolisHastingsSpec {
    FiniteKernel proposal;  // K_l from S^(l-1) into E'_l
    int steps = 1;          // proposals per tick
};
using LevelKernelSpec = std::variant<BaseMcmcSpec, DirectPhiSpec, MetropolisHastingsSpec>;

std::string kernel_spec_name(const LevelKernelSpec& spec);

// Default level-0 chain: Metropolis targeting pi^(0) with uniform proposal.
LevelKernelSpec default_base_spec(const FeynmanKacModel& model);

// Multi-level SIMC state. All levels share one tick; occupation measures
// hold exactly tick+1 states per level (initial state included). Hybrid
// initialization may blend a particle approximation into every occupation
// read. Deterministic given (seed, replicate).
class IMcmcRun {
public:
    IMcmcRun(FeynmanKacModel model, std::vector<LevelKernelSpec> specs,
             std::vector<DiscreteMeasure> init, std::uint64_t seed, std::uint64_t replicate = 0);

    // Convenience: uniform initial laws at every level.
    IMcmcRun(FeynmanKacModel model, std::vector<LevelKernelSpec> specs, std::uint64_t seed,
             std::uint64_t replicate = 0);

    const FeynmanKacModel& model() const { return model_; }
    std::int64_t tick() const { return tick_; }
    int levels() const { return model_.num_levels(); }
    std::size_t state(int level) const { return states_.at(level); }
    const OccupationMeasure& occupation(int level) const { return occupations_.at(level); }

    // Occupation measure as seen by the transitions: the plain occupation,
    // or the particle blend ((n+1) eta + N pi_N) / (N + n + 1) when enabled.
    DiscreteMeasure effective_occupation(int level) const;

    // Advance every level one step simultaneously: all levels read the
    // occupation snapshots of tick n, then all pushes happen at once.
    void advance();

    // Particle blending (hybrid scheme): all occupation reads mix in the
    // particle measure with weight N/(N+n+1).
    void enable_blend(std::vector<DiscreteMeasure> particle_measures, std::uint64_t particle_count);

    // Fresh run (tick 0) with the same configuration but new initial laws.
    IMcmcRun with_initial(std::vector<DiscreteMeasure> init) const;

    // Burn-in is a diagnostic option, off by default: drops everything seen
    // so far from the occupation measures and restarts them from the
    // current states (the flow itself defines no discard).
    void reset_occupations();

    // log gammahat^(l)(1) = sum_{k<l} log eta_n^(k)(G_k), l = 0..m.
    std::vector<double> estimate_normalizers() const;

private:
    std::size_t draw_level(int k);

    FeynmanKacModel model_;
    std::vector<LevelKernelSpec> specs_;
    std::uint64_t seed_ = 0;
    std::uint64_t replicate_ = 0;
    std::vector<std::size_t> states_;
    std::vector<OccupationMeasure> occupations_;
    std::vector<Rng> level_rngs_;
    std::int64_t tick_ = 0;
    std::vector<DiscreteMeasure> blend_;
    std::uint64_t blend_count_ = 0;
};

IMcmcRun imcmc_tick(IMcmcRun run);

// Checkpoint dump: tick, per-level current states, occupation counts, and
// the running log-normalizer estimates.
nlohmann::json checkpoint_json(const IMcmcRun& run);

// One draw of the direct-Phi mechanism: ancestor q with probability
// proportional to G_{k-1}(X_q), then one move through L_k. The marginal
// law is exactly Phi_k(eta).
std::size_t direct_phi_draw(const OccupationMeasure& eta, const FeynmanKacModel& model, int k,
                            Rng& rng);

// The induced transition row of the direct-Phi mechanism (independent of
// the current state): Phi_k(eta) as an exact probability computation.
DiscreteMeasure direct_phi_row(const DiscreteMeasure& eta, const FeynmanKacModel& model, int k);

// Acceptance ratio r_l((u,v),(w,z)) = [K_l(u,v) R_l(w,z)] / [R_l(u,v) K_l(w,z)].
// Throws AbsoluteContinuityError when the denominator vanishes under a
// positive numerator; both-zero degenerates to 1.
double mh_acceptance_ratio(const FeynmanKacModel& model, int l, const FiniteKernel& proposal,
                           std::size_t current, std::size_t candidate);

// One Metropolis-Hastings proposal/accept move of the measure-indexed
// kernel with proposal mu x K_l and invariant Phi_l(mu).
std::size_t mh_step(std::size_t state, const DiscreteMeasure& mu, const FeynmanKacModel& model,
                    int l, const FiniteKernel& proposal, Rng& rng);

// Exact transition matrix of mh_step for a frozen mu (for invariance
// certificates); `steps` composes the kernel with itself.
FiniteKernel mh_transition_matrix(const DiscreteMeasure& mu, const FeynmanKacModel& model, int l,
                                  const FiniteKernel& proposal, int steps = 1);

// Uniform-in-mu Dobrushin bound 1 - 1/C_l for the MH kernel, with C_l the
// dominance constant of the reference kernel over the proposal.
double mh_dobrushin_bound(const FeynmanKacModel& model, int l, const FiniteKernel& proposal);

// Exact level-k transition matrix on S^(k) for a frozen flow measure.
FiniteKernel level_kernel_matrix(const FeynmanKacModel& model, int k, const LevelKernelSpec& spec,
                                 const DiscreteMeasure& mu);

// Product kernel K_eta^(m) on E_m assembled from the level kernels at the
// marginals of eta, and its predicted invariant measure
// pi^(0) x Phi_1(eta^(0)) x ... x Phi_m(eta^(m-1)).
FiniteKernel product_kernel(const FeynmanKacModel& model,
                            const std::vector<LevelKernelSpec>& specs,
                            const std::vector<DiscreteMeasure>& eta_marginals,
                            std::size_t max_points = 10'000'000);
DiscreteMeasure omega_of(const FeynmanKacModel& model,
                         const std::vector<DiscreteMeasure>& eta_marginals,
                         std::size_t max_points = 10'000'000);

// N-particle baseline: multinomial selection proportional to G_{l-1}, then
// mutation through L_l; accumulates the unbiased normalizer estimate.
struct ParticleRun {
    const FeynmanKacModel* model = nullptr;
    std::size_t n_particles = 0;
    std::vector<std::vector<std::size_t>> clouds;  // per level
    std::vector<double> normalizer_log;            // log gamma_N^(l)(1), l = 0..m

    DiscreteMeasure empirical(int level) const;
};

ParticleRun smc_run(const FeynmanKacModel& model, std::size_t n_particles, std::uint64_t seed);

enum class HybridMode { InitOnly, Blended };

// Particle-fed initialization of the SIMC: re-draws the initial states
// from the particle measures (init-only), or additionally blends the
// particle measures into every occupation read (blended).
IMcmcRun hybrid_init(IMcmcRun run, const ParticleRun& particles, HybridMode mode);

}  // namespace imcmc
