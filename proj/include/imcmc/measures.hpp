#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "imcmc/errors.hpp"

namespace imcmc {

// Finite ordered state space for one level. Labels are opaque and the
// ordering is fixed for the lifetime of a run: all measures and kernels
// address states by index.
struct StateSpace {
    int id = 0;
    std::vector<std::string> labels;

    StateSpace() = default;
    StateSpace(int id_, std::vector<std::string> labels_);

    std::size_t size() const { return labels.size(); }

    // n anonymous states "s0".."s{n-1}" at level `id`.
    static std::shared_ptr<const StateSpace> make(int id, std::size_t n);
    static std::shared_ptr<const StateSpace> make(int id, std::vector<std::string> labels);
};

using SpacePtr = std::shared_ptr<const StateSpace>;

bool same_space(const SpacePtr& a, const SpacePtr& b);
void require_same_space(const SpacePtr& a, const SpacePtr& b, const char* where);

// Product of per-level spaces, mixed-radix with level 0 most significant.
// Guarded: throws TooLargeError past `max_points`.
SpacePtr product_space(std::span<const SpacePtr> spaces, std::size_t max_points = 10'000'000);

std::size_t product_index(std::span<const std::size_t> dims, std::span<const std::size_t> coords);
std::vector<std::size_t> product_coords(std::span<const std::size_t> dims, std::size_t index);

// Finite measure: one real weight per point. Probability measures keep
// weights >= 0 summing to 1 within 1e-12 after normalize(); signed
// measures are permitted only where an operation says so.
struct DiscreteMeasure {
    SpacePtr space;
    std::vector<double> weights;

    DiscreteMeasure() = default;
    DiscreteMeasure(SpacePtr space_, std::vector<double> weights_);

    static DiscreteMeasure dirac(SpacePtr space, std::size_t point);
    static DiscreteMeasure uniform(SpacePtr space);

    double mass() const;
    // Rescales to unit mass. Drift beyond 1e-9 is treated as a logic error.
    void normalize(double drift_tolerance = 1e-9);
    bool is_probability(double tol = 1e-12) const;
};

// Total variation norm of (mu - nu): sum_i |mu_i - nu_i|, in [0, 2] for
// probability pairs.
double total_variation(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

double integrate(const DiscreteMeasure& mu, std::span<const double> f);
double integrate(const DiscreteMeasure& mu, const std::function<double(std::size_t)>& f);

// Reweight by a nonnegative potential and normalize: new weights
// proportional to mu_i G_i. Throws DegeneratePotentialError when mu(G) = 0.
DiscreteMeasure boltzmann_gibbs(const DiscreteMeasure& mu, std::span<const double> potential);

// Occupation measure of a chain from time 0 through n (initial state
// included, total = n+1). Keeps both per-point counts and the push
// history; the history is what makes the joint path-space occupation
// reconstructible. Single writer; copies are safe snapshots.
struct OccupationMeasure {
    SpacePtr space;
    std::vector<std::uint64_t> counts;
    std::uint64_t total = 0;
    std::vector<std::uint32_t> history;

    OccupationMeasure() = default;
    explicit OccupationMeasure(SpacePtr space_);

    void push(std::size_t state);
    DiscreteMeasure measure() const;
    double mean(std::span<const double> f) const;
};

OccupationMeasure occupation_push(OccupationMeasure eta, std::size_t state);

// Joint occupation of the tuples (X_p^(0), ..., X_p^(m)), p = 0..n, over
// the product of the level spaces. All levels must hold the same total.
OccupationMeasure product_occupation(std::span<const OccupationMeasure> levels,
                                     std::size_t max_points = 10'000'000);

}  // namespace imcmc
