#include "imcmc/exact_oracle.hpp"

#include <cmath>

namespace imcmc {

nlohmann::json ExactFlow::to_json() const {
    nlohmann::json j;
    j["levels"] = targets.size();
    j["log_gamma1"] = log_gamma1;
    j["potentials_means"] = potentials_means;
    auto& tg = j["targets"] = nlohmann::json::array();
    for (const auto& t : targets) {
        nlohmann::json row;
        row["level"] = t.space->id;
        row["labels"] = t.space->labels;
        row["weights"] = t.weights;
        tg.push_back(std::move(row));
    }
    return j;
}

ExactFlow solve_flow(const FeynmanKacModel& model) {
    const int m = model.num_levels();
    ExactFlow flow;
    flow.targets.reserve(m + 1);
    flow.targets.push_back(model.initial);
    flow.log_gamma1.assign(m + 1, 0.0);
    for (int l = 0; l < m; ++l) {
        double mean = integrate(flow.targets[l], model.potentials[l]);
        if (!(mean > 0.0)) throw DegeneratePotentialError("solve_flow: pi^(l)(G_l) = 0");
        flow.potentials_means.push_back(mean);
        flow.log_gamma1[l + 1] = flow.log_gamma1[l] + std::log(mean);
        flow.targets.push_back(phi_step(flow.targets[l], model, l));
    }
    return flow;
}

double brute_force_gamma(const FeynmanKacModel& model, int l, std::span<const double> f,
                         std::size_t max_paths) {
    if (l < 0 || l > model.num_levels())
        throw InvalidParameterError("brute_force_gamma: level out of range");
    if (f.size() != model.spaces[l]->size())
        throw SpaceMismatchError("brute_force_gamma: function size mismatch");
    std::size_t paths = 1;
    for (int k = 0; k <= l; ++k) {
        std::size_t n = model.spaces[k]->size();
        if (paths > max_paths / n) throw TooLargeError("path enumeration guard exceeded");
        paths *= n;
    }

    // Odometer over (y_0, ..., y_l).
    std::vector<std::size_t> y(l + 1, 0);
    double total = 0.0;
    while (true) {
        double w = model.initial.weights[y[0]];
        for (int k = 0; k < l && w != 0.0; ++k)
            w *= model.potentials[k][y[k]] * model.transitions[k].at(y[k], y[k + 1]);
        total += w * f[y[l]];

        int pos = l;
        while (pos >= 0) {
            if (++y[pos] < model.spaces[pos]->size()) break;
            y[pos] = 0;
            --pos;
        }
        if (pos < 0) break;
    }
    return total;
}

DiscreteMeasure exact_path_target(const FeynmanKacModel& model, int up_to_level,
                                  std::size_t max_points) {
    if (up_to_level < 0 || up_to_level > model.num_levels())
        throw InvalidParameterError("exact_path_target: level out of range");
    ExactFlow flow = solve_flow(model);
    std::vector<SpacePtr> spaces(model.spaces.begin(), model.spaces.begin() + up_to_level + 1);
    SpacePtr joint = product_space(spaces, max_points);
    std::vector<double> w(joint->size(), 1.0);
    std::vector<std::size_t> dims;
    for (const auto& s : spaces) dims.push_back(s->size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        auto coords = product_coords(dims, i);
        for (int k = 0; k <= up_to_level; ++k) w[i] *= flow.targets[k].weights[coords[k]];
    }
    return DiscreteMeasure(joint, std::move(w));
}

DiscreteMeasure exact_path_target(const FeynmanKacModel& model) {
    return exact_path_target(model, model.num_levels());
}

FeynmanKacModel random_model(std::uint64_t seed, std::size_t n_states, int n_levels) {
    if (n_levels < 0 || n_states == 0)
        throw InvalidParameterError("random_model: bad dimensions");
    Rng rng = Rng(seed).stream("random-model", 0);
    FeynmanKacModel model;
    for (int l = 0; l <= n_levels; ++l) model.spaces.push_back(StateSpace::make(l, n_states));

    std::vector<double> init(n_states);
    double s = 0.0;
    for (double& v : init) {
        v = 0.05 + rng.next_double();
        s += v;
    }
    for (double& v : init) v /= s;
    model.initial = DiscreteMeasure(model.spaces[0], std::move(init));

    for (int l = 0; l < n_levels; ++l) {
        std::vector<double> g(n_states);
        for (double& v : g) v = std::exp(-1.0 + 2.0 * rng.next_double());
        model.potentials.push_back(std::move(g));

        std::vector<double> rows(n_states * n_states);
        for (std::size_t x = 0; x < n_states; ++x) {
            double rs = 0.0;
            for (std::size_t y = 0; y < n_states; ++y) {
                double v = 0.05 + rng.next_double();
                rows[x * n_states + y] = v;
                rs += v;
            }
            for (std::size_t y = 0; y < n_states; ++y) rows[x * n_states + y] /= rs;
        }
        model.transitions.emplace_back(model.spaces[l], model.spaces[l + 1], std::move(rows));
    }
    model.validate();
    return model;
}

}  // namespace imcmc
