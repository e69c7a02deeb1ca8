#include "imcmc/measures.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace imcmc {

StateSpace::StateSpace(int id_, std::vector<std::string> labels_)
    : id(id_), labels(std::move(labels_)) {
    if (labels.empty()) throw InvalidParameterError("state space needs at least one point");
    std::unordered_set<std::string> seen;
    for (const auto& l : labels) {
        if (!seen.insert(l).second)
            throw InvalidParameterError("duplicate state label '" + l + "'");
    }
}

std::shared_ptr<const StateSpace> StateSpace::make(int id, std::size_t n) {
    std::vector<std::string> labels;
    labels.reserve(n);
    for (std::size_t i = 0; i < n; ++i) labels.push_back("s" + std::to_string(i));
    return std::make_shared<const StateSpace>(id, std::move(labels));
}

std::shared_ptr<const StateSpace> StateSpace::make(int id, std::vector<std::string> labels) {
    return std::make_shared<const StateSpace>(id, std::move(labels));
}

bool same_space(const SpacePtr& a, const SpacePtr& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    return a->id == b->id && a->labels == b->labels;
}

void require_same_space(const SpacePtr& a, const SpacePtr& b, const char* where) {
    if (!same_space(a, b))
        throw SpaceMismatchError(std::string(where) + ": measures live on different state spaces");
}

SpacePtr product_space(std::span<const SpacePtr> spaces, std::size_t max_points) {
    if (spaces.empty()) throw InvalidParameterError("product of zero spaces");
    std::size_t n = 1;
    for (const auto& s : spaces) {
        if (s->size() != 0 && n > max_points / s->size())
            throw TooLargeError("product space exceeds enumeration guard");
        n *= s->size();
    }
    std::vector<std::string> labels(n);
    std::vector<std::size_t> dims;
    for (const auto& s : spaces) dims.push_back(s->size());
    for (std::size_t i = 0; i < n; ++i) {
        auto coords = product_coords(dims, i);
        std::string l = "(";
        for (std::size_t k = 0; k < coords.size(); ++k) {
            if (k) l += ",";
            l += spaces[k]->labels[coords[k]];
        }
        l += ")";
        labels[i] = std::move(l);
    }
    return StateSpace::make(spaces.back()->id, std::move(labels));
}

std::size_t product_index(std::span<const std::size_t> dims, std::span<const std::size_t> coords) {
    std::size_t idx = 0;
    for (std::size_t k = 0; k < dims.size(); ++k) idx = idx * dims[k] + coords[k];
    return idx;
}

std::vector<std::size_t> product_coords(std::span<const std::size_t> dims, std::size_t index) {
    std::vector<std::size_t> coords(dims.size());
    for (std::size_t k = dims.size(); k-- > 0;) {
        coords[k] = index % dims[k];
        index /= dims[k];
    }
    return coords;
}

DiscreteMeasure::DiscreteMeasure(SpacePtr space_, std::vector<double> weights_)
    : space(std::move(space_)), weights(std::move(weights_)) {
    if (!space || weights.size() != space->size())
        throw SpaceMismatchError("measure weight vector does not match its space");
}

DiscreteMeasure DiscreteMeasure::dirac(SpacePtr space, std::size_t point) {
    std::vector<double> w(space->size(), 0.0);
    if (point >= w.size()) throw SpaceMismatchError("dirac point outside space");
    w[point] = 1.0;
    return DiscreteMeasure(std::move(space), std::move(w));
}

DiscreteMeasure DiscreteMeasure::uniform(SpacePtr space) {
    std::vector<double> w(space->size(), 1.0 / static_cast<double>(space->size()));
    return DiscreteMeasure(std::move(space), std::move(w));
}

double DiscreteMeasure::mass() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
}

void DiscreteMeasure::normalize(double drift_tolerance) {
    double s = mass();
    if (!(s > 0.0)) throw DegeneratePotentialError("normalize: zero total mass");
    if (std::abs(s - 1.0) > drift_tolerance)
        throw InvalidParameterError("normalize: mass drifted beyond tolerance");
    for (double& w : weights) w /= s;
}

bool DiscreteMeasure::is_probability(double tol) const {
    double s = 0.0;
    for (double w : weights) {
        if (w < -tol) return false;
        s += w;
    }
    return std::abs(s - 1.0) <= tol;
}

double total_variation(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
    require_same_space(mu.space, nu.space, "total_variation");
    double s = 0.0;
    for (std::size_t i = 0; i < mu.weights.size(); ++i) s += std::abs(mu.weights[i] - nu.weights[i]);
    return s;
}

double integrate(const DiscreteMeasure& mu, std::span<const double> f) {
    if (f.size() != mu.weights.size())
        throw SpaceMismatchError("integrate: function not defined on all points");
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += mu.weights[i] * f[i];
    return s;
}

double integrate(const DiscreteMeasure& mu, const std::function<double(std::size_t)>& f) {
    double s = 0.0;
    for (std::size_t i = 0; i < mu.weights.size(); ++i) s += mu.weights[i] * f(i);
    return s;
}

DiscreteMeasure boltzmann_gibbs(const DiscreteMeasure& mu, std::span<const double> potential) {
    if (potential.size() != mu.weights.size())
        throw SpaceMismatchError("boltzmann_gibbs: potential not defined on all points");
    std::vector<double> w(mu.weights.size());
    double total = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        w[i] = mu.weights[i] * potential[i];
        total += w[i];
    }
    if (!(total > 0.0)) throw DegeneratePotentialError("boltzmann_gibbs: mu(G) = 0");
    for (double& x : w) x /= total;
    return DiscreteMeasure(mu.space, std::move(w));
}

OccupationMeasure::OccupationMeasure(SpacePtr space_)
    : space(std::move(space_)), counts(space->size(), 0) {}

void OccupationMeasure::push(std::size_t state) {
    if (state >= counts.size()) throw SpaceMismatchError("occupation push of unknown state");
    ++counts[state];
    ++total;
    history.push_back(static_cast<std::uint32_t>(state));
}

DiscreteMeasure OccupationMeasure::measure() const {
    if (total == 0) throw DesyncError("occupation measure is empty");
    std::vector<double> w(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i)
        w[i] = static_cast<double>(counts[i]) / static_cast<double>(total);
    return DiscreteMeasure(space, std::move(w));
}

double OccupationMeasure::mean(std::span<const double> f) const {
    if (total == 0) throw DesyncError("occupation measure is empty");
    if (f.size() != counts.size())
        throw SpaceMismatchError("occupation mean: function not defined on all points");
    double s = 0.0;
    for (std::size_t i = 0; i < counts.size(); ++i) s += static_cast<double>(counts[i]) * f[i];
    return s / static_cast<double>(total);
}

OccupationMeasure occupation_push(OccupationMeasure eta, std::size_t state) {
    eta.push(state);
    return eta;
}

OccupationMeasure product_occupation(std::span<const OccupationMeasure> levels,
                                     std::size_t max_points) {
    if (levels.empty()) throw InvalidParameterError("product occupation of zero levels");
    const std::uint64_t total = levels.front().total;
    for (const auto& eta : levels) {
        if (eta.total != total || eta.history.size() != total)
            throw DesyncError("product_occupation: level totals disagree");
    }
    std::vector<SpacePtr> spaces;
    std::vector<std::size_t> dims;
    for (const auto& eta : levels) {
        spaces.push_back(eta.space);
        dims.push_back(eta.space->size());
    }
    OccupationMeasure joint(product_space(spaces, max_points));
    std::vector<std::size_t> coords(levels.size());
    for (std::uint64_t p = 0; p < total; ++p) {
        for (std::size_t k = 0; k < levels.size(); ++k) coords[k] = levels[k].history[p];
        joint.push(product_index(dims, coords));
    }
    return joint;
}

}  // namespace imcmc
