#pragma once

#include <optional>
#include <span>
#include <vector>

#include "imcmc/measures.hpp"

namespace imcmc {

// Row-stochastic matrix between two finite state spaces. Rows are stored
// row-major; validate() enforces nonnegativity and row sums within 1e-10.
struct FiniteKernel {
    SpacePtr from;
    SpacePtr to;
    std::vector<double> rows;

    FiniteKernel() = default;
    FiniteKernel(SpacePtr from_, SpacePtr to_, std::vector<double> rows_);

    std::size_t n_from() const { return from->size(); }
    std::size_t n_to() const { return to->size(); }
    double at(std::size_t x, std::size_t y) const { return rows[x * n_to() + y]; }
    double& at(std::size_t x, std::size_t y) { return rows[x * n_to() + y]; }
    std::span<const double> row(std::size_t x) const {
        return std::span<const double>(rows).subspan(x * n_to(), n_to());
    }

    void validate(double tol = 1e-10) const;

    // K(f): pullback of a function on `to` to a function on `from`.
    std::vector<double> apply(std::span<const double> f) const;
    // mu K: pushforward of a measure on `from` to a measure on `to`.
    DiscreteMeasure transport(const DiscreteMeasure& mu) const;

    static FiniteKernel identity(SpacePtr space);
    // All rows equal to `row` (a probability on `to`).
    static FiniteKernel rank_one(SpacePtr from, const DiscreteMeasure& row);
    static FiniteKernel compose(const FiniteKernel& a, const FiniteKernel& b);
    // K^n on a square kernel.
    static FiniteKernel power(const FiniteKernel& k, unsigned n);
};

// Dobrushin contraction coefficient: (1/2) max over row pairs of the total
// variation between rows. Validates stochasticity first.
double dobrushin(const FiniteKernel& kernel);

// Metropolis kernel on a finite space targeting `target` with proposal S
// (Hastings-corrected, so S need not be symmetric).
FiniteKernel metropolis_kernel(const DiscreteMeasure& target, const FiniteKernel& proposal);

// Path-space structure: level l lives on the product E'_0 x ... x E'_l of
// base coordinate spaces, transitions extend the path by one coordinate
// drawn from the base chain, and potentials read the last coordinate.
struct PathStructure {
    std::vector<SpacePtr> base_spaces;                 // E'_l
    std::vector<FiniteKernel> base_transitions;        // Ltilde_{l+1}: E'_l -> E'_{l+1}, index l
    std::vector<std::vector<double>> base_potentials;  // Gtilde_l on E'_l

    // Path state index <-> (prefix on S^(l-1), new coordinate on E'_l).
    std::size_t path_index(int level, std::size_t prefix, std::size_t coord) const;
    std::size_t prefix_of(int level, std::size_t path) const;
    std::size_t coord_of(int level, std::size_t path) const;
    std::size_t last_coord(int level, std::size_t path) const;

    // R_l(u, v) = Ltilde_l(last(u), v) * Gtilde_{l-1}(last(u)), the reference
    // kernel from S^(l-1) into E'_l.
    double reference_density(int level, std::size_t prefix, std::size_t coord) const;
};

// Per-level state spaces, strictly positive potentials G_l, and Markov
// transitions L_{l+1}; defines the maps Phi_{l+1}(mu) = Psi_{G_l}(mu) L_{l+1}.
struct FeynmanKacModel {
    std::vector<SpacePtr> spaces;                 // levels 0..m
    DiscreteMeasure initial;                      // pi^(0)
    std::vector<std::vector<double>> potentials;  // G_l on spaces[l], l = 0..m-1
    std::vector<FiniteKernel> transitions;        // L_{l+1}: spaces[l] -> spaces[l+1], index l
    std::optional<PathStructure> path;

    int num_levels() const { return static_cast<int>(spaces.size()) - 1; }
    const FiniteKernel& transition(int l) const { return transitions.at(l - 1); }  // L_l, l>=1
    const std::vector<double>& potential(int l) const { return potentials.at(l); }

    void validate() const;  // shapes, stochasticity, condition (G)
};

// Builds the path-space model over a base chain (spaces, kernels,
// potentials on the base coordinates).
FeynmanKacModel make_path_model(std::vector<SpacePtr> base_spaces,
                                DiscreteMeasure base_initial,
                                std::vector<FiniteKernel> base_transitions,
                                std::vector<std::vector<double>> base_potentials,
                                std::size_t max_points = 10'000'000);

// One Feynman-Kac step: Phi_{l+1}(mu) on S^(l+1) from mu on S^(l).
DiscreteMeasure phi_step(const DiscreteMeasure& mu, const FeynmanKacModel& model, int l);

// Q_l(f) = G_{l-1} x L_l(f), a function on S^(l-1). 1 <= l <= m.
std::vector<double> q_apply(const FeynmanKacModel& model, int l, std::span<const double> f);

// Q_{l,k} = Q_l Q_{l+1} ... Q_k as a dense (unnormalized) matrix.
std::vector<double> q_chain_matrix(const FeynmanKacModel& model, int l, int k);

// P_{l,k}(f) = Q_{l,k}(f) / Q_{l,k}(1); P_{l,k}(1) = 1 identically.
std::vector<double> semigroup_p(const FeynmanKacModel& model, int l, int k,
                                std::span<const double> f);
FiniteKernel p_matrix(const FeynmanKacModel& model, int l, int k);

// H_{l,k} = Q_{l,k}(1) / Q_{l,k-1}(1) pointwise on S^(l-1); H_{l,l} = G_{l-1}.
std::vector<double> h_ratio(const FeynmanKacModel& model, int l, int k);

// Exact Dobrushin coefficient of P_{l,k} (rows evaluated at Dirac inputs).
double beta_p(const FeynmanKacModel& model, int l, int k);

// Regularity constants of the flow: potential ratio floors, m-step kernel
// minorization floors, Lipschitz constants, and the aggregates driving the
// uniform-in-level rate. Lambda is a surrogate (max(1, c_l)); it is an
// input to predicted exponents, never a certified quantity.
struct RegularityConstants {
    int m_window = 1;
    std::vector<double> eps_g;    // index l = 0..m-1
    std::vector<double> eps_l;    // index l = 0..m-m_window (0 when minorization fails)
    std::vector<double> c;        // index l = 1..m at [l]; [0] unused = 0
    std::vector<int> n_l;         // per level, 1 for direct sampling
    std::vector<double> b_l;      // per level, 0 for direct sampling
    std::vector<double> lambda;   // surrogate, index as c
    double a_aggregate = 0.0;     // sup_l (1+c_l) (n_l/(1-b_l))^2
    double b_aggregate = 0.0;     // 2 sup_l lambda_l
    bool lambda_is_surrogate = true;
};

// lambda_override replaces the surrogate at every level (the constant is
// an input to predicted exponents; callers may certify their own value).
RegularityConstants mixing_constants(const FeynmanKacModel& model, int m_window = 1,
                                     std::optional<double> lambda_override = std::nullopt);

// Product bound on beta(P_{l,k}) from the regularity constants; 1 when the
// minorization fails (vacuous).
double contraction_bound(const FeynmanKacModel& model, int l, int k, int m_window = 1);
double contraction_bound(const RegularityConstants& constants, int l, int k);

// Simplified (1 - eps(L)^2)^(k-l+1) bound with eps(L) = inf_l eps_l(L),
// valid for m_window = 1.
double contraction_bound_uniform(const RegularityConstants& constants, int l, int k);

// Running Cesaro average of phi_step over a flow prefix on S^(l-1):
// out[n] = (1/(n+1)) sum_{p<=n} Phi_l(flow[p]).
std::vector<DiscreteMeasure> time_averaged_phi(std::span<const DiscreteMeasure> flow,
                                               const FeynmanKacModel& model, int l);

}  // namespace imcmc
