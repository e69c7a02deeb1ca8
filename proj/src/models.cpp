#include "imcmc/models.hpp"

#include <cmath>

namespace imcmc {

namespace {

const std::vector<double> kFk3Rows = {0.6, 0.3, 0.1,   //
                                      0.2, 0.5, 0.3,   //
                                      0.1, 0.4, 0.5};

const std::vector<std::vector<double>> kFk3Potentials = {
    {1.0, 2.0, 0.5},
    {0.8, 1.5, 1.2},
    {2.0, 0.7, 1.0},
};

std::vector<std::string> fk3_labels() { return {"a", "b", "c"}; }

}  // namespace

FeynmanKacModel fk3_model() {
    FeynmanKacModel model;
    for (int l = 0; l <= 3; ++l) model.spaces.push_back(StateSpace::make(l, fk3_labels()));
    model.initial = DiscreteMeasure::uniform(model.spaces[0]);
    model.potentials = kFk3Potentials;
    for (int l = 0; l < 3; ++l)
        model.transitions.emplace_back(model.spaces[l], model.spaces[l + 1], kFk3Rows);
    model.validate();
    return model;
}

FeynmanKacModel fk3_deep_model(int levels) {
    if (levels < 1) throw InvalidParameterError("fk3_deep_model: need at least one level");
    FeynmanKacModel model;
    for (int l = 0; l <= levels; ++l) model.spaces.push_back(StateSpace::make(l, fk3_labels()));
    model.initial = DiscreteMeasure::uniform(model.spaces[0]);
    for (int l = 0; l < levels; ++l) {
        model.potentials.push_back(kFk3Potentials[l % kFk3Potentials.size()]);
        model.transitions.emplace_back(model.spaces[l], model.spaces[l + 1], kFk3Rows);
    }
    model.validate();
    return model;
}

FeynmanKacModel fk3_path_model() {
    std::vector<SpacePtr> base;
    for (int l = 0; l <= 3; ++l) base.push_back(StateSpace::make(l, fk3_labels()));
    DiscreteMeasure init = DiscreteMeasure::uniform(base[0]);
    std::vector<FiniteKernel> trans;
    for (int l = 0; l < 3; ++l) trans.emplace_back(base[l], base[l + 1], kFk3Rows);
    return make_path_model(base, init, std::move(trans), kFk3Potentials);
}

FiniteKernel fk3_path_proposal(const FeynmanKacModel& path_model, int level) {
    if (!path_model.path) throw InvalidParameterError("proposal needs a path-space model");
    const auto& ps = *path_model.path;
    const auto& lt = ps.base_transitions.at(level - 1);
    std::size_t n_from = path_model.spaces[level - 1]->size();
    std::size_t base_prev = ps.base_spaces[level - 1]->size();
    std::size_t n_to = ps.base_spaces[level]->size();
    std::vector<double> rows(n_from * n_to);
    for (std::size_t u = 0; u < n_from; ++u) {
        std::size_t u_last = u % base_prev;
        for (std::size_t v = 0; v < n_to; ++v)
            rows[u * n_to + v] = 0.5 / static_cast<double>(n_to) + 0.5 * lt.at(u_last, v);
    }
    return FiniteKernel(path_model.spaces[level - 1], ps.base_spaces[level], std::move(rows));
}

FeynmanKacModel annealing_model(int levels) {
    if (levels < 1) throw InvalidParameterError("annealing_model: need at least one level");
    const std::vector<double> v = {0.0, 1.0, 0.5};
    const double beta_step = 0.25;
    const std::size_t n = v.size();

    FeynmanKacModel model;
    for (int l = 0; l <= levels; ++l) model.spaces.push_back(StateSpace::make(l, n));
    model.initial = DiscreteMeasure::uniform(model.spaces[0]);  // beta_0 = 0

    for (int l = 0; l < levels; ++l) {
        std::vector<double> g(n);
        for (std::size_t i = 0; i < n; ++i) g[i] = std::exp(-beta_step * v[i]);
        model.potentials.push_back(std::move(g));

        // Target at the next level, used for the reversible move.
        double beta_next = beta_step * static_cast<double>(l + 1);
        std::vector<double> target(n);
        double z = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            target[i] = std::exp(-beta_next * v[i]);
            z += target[i];
        }
        for (double& t : target) t /= z;
        DiscreteMeasure tgt(model.spaces[l + 1], std::move(target));
        FiniteKernel uniform_prop =
            FiniteKernel::rank_one(model.spaces[l + 1], DiscreteMeasure::uniform(model.spaces[l + 1]));
        FiniteKernel move = metropolis_kernel(tgt, uniform_prop);
        model.transitions.emplace_back(model.spaces[l], model.spaces[l + 1], move.rows);
    }
    model.validate();
    return model;
}

const std::vector<BundledModelInfo>& bundled_models() {
    static const std::vector<BundledModelInfo> kModels = {
        {"fk3", "3-state, 4-level Feynman-Kac flow; canonical certification fixture", true},
        {"fk3-deep", "fk3 tables cycled over 8 levels; uniform-in-level diagnostics", true},
        {"fk3-path", "path-space version of fk3 (tuple-valued levels, MH-capable)", true},
        {"annealing-3state", "annealed Boltzmann targets on a 3-point grid, 8 levels", true},
        {"bilaplace-continuous",
         "bi-Laplace drift chain on the real line (continuous; rate diagnostics only)", false},
    };
    return kModels;
}

FeynmanKacModel make_bundled_model(const std::string& name) {
    if (name == "fk3") return fk3_model();
    if (name == "fk3-deep") return fk3_deep_model();
    if (name == "fk3-path") return fk3_path_model();
    if (name == "annealing-3state") return annealing_model();
    if (name == "bilaplace-continuous")
        throw ConfigError("bilaplace-continuous has no finite representation; "
                          "use the continuous pipeline");
    throw ConfigError("unknown bundled model '" + name + "'");
}

}  // namespace imcmc
