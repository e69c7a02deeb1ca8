#include "imcmc/samplers.hpp"

#include <algorithm>
#include <cmath>

namespace imcmc {

std::string kernel_spec_name(const LevelKernelSpec& spec) {
    if (std::holds_alternative<BaseMcmcSpec>(spec)) return "base-mcmc";
    if (std::holds_alternative<DirectPhiSpec>(spec)) return "direct-phi";
    return "mh";
}

LevelKernelSpec default_base_spec(const FeynmanKacModel& model) {
    FiniteKernel uniform_prop =
        FiniteKernel::rank_one(model.spaces[0], DiscreteMeasure::uniform(model.spaces[0]));
    return BaseMcmcSpec{metropolis_kernel(model.initial, uniform_prop)};
}

IMcmcRun::IMcmcRun(FeynmanKacModel model, std::vector<LevelKernelSpec> specs,
                   std::vector<DiscreteMeasure> init, std::uint64_t seed, std::uint64_t replicate)
    : model_(std::move(model)), specs_(std::move(specs)) {
    const int m = model_.num_levels();
    if (static_cast<int>(specs_.size()) != m + 1)
        throw ConfigError("need one kernel spec per level 0..m");
    if (static_cast<int>(init.size()) != m + 1)
        throw ConfigError("need one initial distribution per level 0..m");
    for (int k = 0; k <= m; ++k) {
        if (std::holds_alternative<MetropolisHastingsSpec>(specs_[k])) {
            if (!model_.path)
                throw ConfigError("Metropolis-Hastings level kernels need a path-space model");
            if (k == 0) throw ConfigError("level 0 cannot use a measure-indexed kernel");
            const auto& mh = std::get<MetropolisHastingsSpec>(specs_[k]);
            require_same_space(mh.proposal.from, model_.spaces[k - 1], "MH proposal domain");
            require_same_space(mh.proposal.to, model_.path->base_spaces[k], "MH proposal range");
            if (mh.steps < 1) throw ConfigError("MH step count must be >= 1");
        }
        if (std::holds_alternative<BaseMcmcSpec>(specs_[k])) {
            if (k != 0) throw ConfigError("fixed base kernels are level-0 only");
            const auto& base = std::get<BaseMcmcSpec>(specs_[k]);
            base.kernel.validate();
            DiscreteMeasure pushed = base.kernel.transport(model_.initial);
            if (total_variation(pushed, model_.initial) > 1e-8)
                throw ConfigError("level-0 kernel does not leave pi^(0) invariant");
        }
    }
    seed_ = seed;
    replicate_ = replicate;
    Rng root = Rng(seed).stream("imcmc-run", replicate);
    for (int k = 0; k <= m; ++k) level_rngs_.push_back(root.stream(k));

    for (int k = 0; k <= m; ++k) {
        require_same_space(init[k].space, model_.spaces[k], "initial distribution");
        occupations_.emplace_back(model_.spaces[k]);
        std::size_t x0 = level_rngs_[k].next_categorical(init[k].weights, init[k].mass());
        states_.push_back(x0);
        occupations_[k].push(x0);
    }
}

IMcmcRun::IMcmcRun(FeynmanKacModel model, std::vector<LevelKernelSpec> specs, std::uint64_t seed,
                   std::uint64_t replicate)
    : IMcmcRun(model,
               std::move(specs),
               [&model] {
                   std::vector<DiscreteMeasure> init;
                   for (const auto& s : model.spaces) init.push_back(DiscreteMeasure::uniform(s));
                   return init;
               }(),
               seed, replicate) {}

DiscreteMeasure IMcmcRun::effective_occupation(int level) const {
    const OccupationMeasure& eta = occupations_.at(level);
    if (blend_.empty() || blend_count_ == 0) return eta.measure();
    const DiscreteMeasure& part = blend_.at(level);
    double denom = static_cast<double>(blend_count_) + static_cast<double>(eta.total);
    std::vector<double> w(eta.counts.size());
    for (std::size_t i = 0; i < w.size(); ++i)
        w[i] = (static_cast<double>(eta.counts[i]) +
                static_cast<double>(blend_count_) * part.weights[i]) /
               denom;
    return DiscreteMeasure(eta.space, std::move(w));
}

std::size_t IMcmcRun::draw_level(int k) {
    Rng& rng = level_rngs_[k];
    const LevelKernelSpec& spec = specs_[k];

    if (std::holds_alternative<BaseMcmcSpec>(spec)) {
        const FiniteKernel& kern = std::get<BaseMcmcSpec>(spec).kernel;
        auto row = kern.row(states_[k]);
        return rng.next_categorical(row, 1.0);
    }

    if (std::holds_alternative<DirectPhiSpec>(spec)) {
        if (k == 0)
            return rng.next_categorical(model_.initial.weights, model_.initial.mass());
        const auto& g = model_.potentials[k - 1];
        const OccupationMeasure& eta = occupations_[k - 1];
        if (eta.total == 0) throw DesyncError("empty occupation at level " + std::to_string(k - 1));
        std::size_t ancestor;
        if (blend_.empty() || blend_count_ == 0) {
            std::vector<double> w(g.size());
            double total = 0.0;
            for (std::size_t i = 0; i < w.size(); ++i) {
                w[i] = static_cast<double>(eta.counts[i]) * g[i];
                total += w[i];
            }
            if (!(total > 0.0)) throw DegeneratePotentialError("eta(G) = 0 in direct-phi draw");
            ancestor = rng.next_categorical(w, total);
        } else {
            DiscreteMeasure eff = effective_occupation(k - 1);
            std::vector<double> w(g.size());
            double total = 0.0;
            for (std::size_t i = 0; i < w.size(); ++i) {
                w[i] = eff.weights[i] * g[i];
                total += w[i];
            }
            if (!(total > 0.0)) throw DegeneratePotentialError("eta(G) = 0 in direct-phi draw");
            ancestor = rng.next_categorical(w, total);
        }
        auto row = model_.transition(k).row(ancestor);
        return rng.next_categorical(row, 1.0);
    }

    const auto& mh = std::get<MetropolisHastingsSpec>(spec);
    DiscreteMeasure mu = effective_occupation(k - 1);
    std::size_t x = states_[k];
    for (int s = 0; s < mh.steps; ++s) x = mh_step(x, mu, model_, k, mh.proposal, rng);
    return x;
}

void IMcmcRun::advance() {
    const int m = levels();
    std::vector<std::size_t> next(m + 1);
    for (int k = 0; k <= m; ++k) next[k] = draw_level(k);
    for (int k = 0; k <= m; ++k) occupations_[k].push(next[k]);
    states_ = std::move(next);
    ++tick_;
}

void IMcmcRun::enable_blend(std::vector<DiscreteMeasure> particle_measures,
                            std::uint64_t particle_count) {
    if (static_cast<int>(particle_measures.size()) != levels() + 1)
        throw ConfigError("blend needs one particle measure per level");
    for (int k = 0; k <= levels(); ++k)
        require_same_space(particle_measures[k].space, model_.spaces[k], "blend measure");
    blend_ = std::move(particle_measures);
    blend_count_ = particle_count;
}

IMcmcRun IMcmcRun::with_initial(std::vector<DiscreteMeasure> init) const {
    return IMcmcRun(model_, specs_, std::move(init), seed_, replicate_);
}

void IMcmcRun::reset_occupations() {
    for (int k = 0; k <= levels(); ++k) {
        occupations_[k] = OccupationMeasure(model_.spaces[k]);
        occupations_[k].push(states_[k]);
    }
}

std::vector<double> IMcmcRun::estimate_normalizers() const {
    const int m = levels();
    std::vector<double> logs(m + 1, 0.0);
    for (int l = 1; l <= m; ++l) {
        DiscreteMeasure eta = effective_occupation(l - 1);
        double mean = integrate(eta, model_.potentials[l - 1]);
        if (!(mean > 0.0))
            throw DegeneratePotentialError("eta(G) = 0 in normalizer estimate at level " +
                                           std::to_string(l - 1));
        logs[l] = logs[l - 1] + std::log(mean);
    }
    return logs;
}

IMcmcRun imcmc_tick(IMcmcRun run) {
    run.advance();
    return run;
}

nlohmann::json checkpoint_json(const IMcmcRun& run) {
    nlohmann::json j;
    j["tick"] = run.tick();
    j["levels"] = nlohmann::json::array();
    for (int k = 0; k <= run.levels(); ++k) {
        const OccupationMeasure& eta = run.occupation(k);
        nlohmann::json level;
        level["level"] = k;
        level["state"] = eta.space->labels[run.state(k)];
        level["counts"] = eta.counts;
        j["levels"].push_back(std::move(level));
    }
    j["log_normalizers"] = run.estimate_normalizers();
    return j;
}

std::size_t direct_phi_draw(const OccupationMeasure& eta, const FeynmanKacModel& model, int k,
                            Rng& rng) {
    if (k < 1 || k > model.num_levels())
        throw InvalidParameterError("direct_phi_draw: level out of range");
    require_same_space(eta.space, model.spaces[k - 1], "direct_phi_draw");
    if (eta.total == 0) throw DesyncError("direct_phi_draw: empty occupation");
    const auto& g = model.potentials[k - 1];
    std::vector<double> w(g.size());
    double total = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        w[i] = static_cast<double>(eta.counts[i]) * g[i];
        total += w[i];
    }
    if (!(total > 0.0)) throw DegeneratePotentialError("direct_phi_draw: eta(G) = 0");
    std::size_t ancestor = rng.next_categorical(w, total);
    return rng.next_categorical(model.transition(k).row(ancestor), 1.0);
}

DiscreteMeasure direct_phi_row(const DiscreteMeasure& eta, const FeynmanKacModel& model, int k) {
    return phi_step(eta, model, k - 1);
}

double mh_acceptance_ratio(const FeynmanKacModel& model, int l, const FiniteKernel& proposal,
                           std::size_t current, std::size_t candidate) {
    if (!model.path) throw ConfigError("MH acceptance ratio needs a path-space model");
    const auto& ps = *model.path;
    std::size_t u = ps.prefix_of(l, current), v = ps.coord_of(l, current);
    std::size_t w = ps.prefix_of(l, candidate), z = ps.coord_of(l, candidate);
    double num = proposal.at(u, v) * ps.reference_density(l, w, z);
    double den = ps.reference_density(l, u, v) * proposal.at(w, z);
    if (den == 0.0) {
        if (num == 0.0) return 1.0;
        throw AbsoluteContinuityError("MH ratio undefined: proposal or reference vanished");
    }
    return num / den;
}

std::size_t mh_step(std::size_t state, const DiscreteMeasure& mu, const FeynmanKacModel& model,
                    int l, const FiniteKernel& proposal, Rng& rng) {
    if (!model.path) throw ConfigError("mh_step needs a path-space model");
    const auto& ps = *model.path;
    std::size_t w = rng.next_categorical(mu.weights, mu.mass());
    std::size_t z = rng.next_categorical(proposal.row(w), 1.0);
    std::size_t candidate = ps.path_index(l, w, z);
    double r = mh_acceptance_ratio(model, l, proposal, state, candidate);
    if (r >= 1.0 || rng.next_double() < r) return candidate;
    return state;
}

FiniteKernel mh_transition_matrix(const DiscreteMeasure& mu, const FeynmanKacModel& model, int l,
                                  const FiniteKernel& proposal, int steps) {
    if (!model.path) throw ConfigError("mh_transition_matrix needs a path-space model");
    const auto& ps = *model.path;
    require_same_space(mu.space, model.spaces[l - 1], "mh_transition_matrix");
    const std::size_t n = model.spaces[l]->size();
    const std::size_t base_n = ps.base_spaces[l]->size();
    std::vector<double> rows(n * n, 0.0);
    for (std::size_t x = 0; x < n; ++x) {
        double moved = 0.0;
        for (std::size_t w = 0; w < mu.weights.size(); ++w) {
            double mw = mu.weights[w];
            if (mw == 0.0) continue;
            for (std::size_t z = 0; z < base_n; ++z) {
                double q = mw * proposal.at(w, z);
                if (q == 0.0) continue;
                std::size_t y = ps.path_index(l, w, z);
                double accept = std::min(1.0, mh_acceptance_ratio(model, l, proposal, x, y));
                rows[x * n + y] += q * accept;
                moved += q * accept;
            }
        }
        rows[x * n + x] += 1.0 - moved;
    }
    FiniteKernel kernel(model.spaces[l], model.spaces[l], std::move(rows));
    if (steps > 1) kernel = FiniteKernel::power(kernel, steps);
    return kernel;
}

double mh_dobrushin_bound(const FeynmanKacModel& model, int l, const FiniteKernel& proposal) {
    if (!model.path) throw ConfigError("mh_dobrushin_bound needs a path-space model");
    const auto& ps = *model.path;
    // Uniform-in-mu normalizer: mu(G_{l-1}) >= min Gtilde_{l-1}.
    double g_min = *std::min_element(ps.base_potentials[l - 1].begin(),
                                     ps.base_potentials[l - 1].end());
    const std::size_t n_prefix = model.spaces[l - 1]->size();
    const std::size_t base_n = ps.base_spaces[l]->size();
    double c = 1.0;
    for (std::size_t u = 0; u < n_prefix; ++u)
        for (std::size_t v = 0; v < base_n; ++v) {
            double r = ps.reference_density(l, u, v);
            if (r == 0.0) continue;
            double k = proposal.at(u, v);
            if (k == 0.0)
                throw AbsoluteContinuityError("proposal vanishes where the reference is positive");
            c = std::max(c, r / (k * g_min));
        }
    return 1.0 - 1.0 / c;
}

FiniteKernel level_kernel_matrix(const FeynmanKacModel& model, int k, const LevelKernelSpec& spec,
                                 const DiscreteMeasure& mu) {
    if (std::holds_alternative<BaseMcmcSpec>(spec)) return std::get<BaseMcmcSpec>(spec).kernel;
    if (std::holds_alternative<DirectPhiSpec>(spec)) {
        if (k == 0) return FiniteKernel::rank_one(model.spaces[0], model.initial);
        return FiniteKernel::rank_one(model.spaces[k], phi_step(mu, model, k - 1));
    }
    const auto& mh = std::get<MetropolisHastingsSpec>(spec);
    return mh_transition_matrix(mu, model, k, mh.proposal, mh.steps);
}

FiniteKernel product_kernel(const FeynmanKacModel& model,
                            const std::vector<LevelKernelSpec>& specs,
                            const std::vector<DiscreteMeasure>& eta_marginals,
                            std::size_t max_points) {
    const int m = model.num_levels();
    if (static_cast<int>(specs.size()) != m + 1)
        throw ConfigError("product_kernel: need one spec per level");
    if (static_cast<int>(eta_marginals.size()) < m)
        throw ConfigError("product_kernel: need marginals for levels 0..m-1");
    std::vector<FiniteKernel> level_kernels;
    for (int k = 0; k <= m; ++k)
        level_kernels.push_back(
            level_kernel_matrix(model, k, specs[k], k == 0 ? model.initial : eta_marginals[k - 1]));

    SpacePtr joint = product_space(model.spaces, max_points);
    std::vector<std::size_t> dims;
    for (const auto& s : model.spaces) dims.push_back(s->size());
    const std::size_t n = joint->size();
    if (n > max_points / n) throw TooLargeError("product kernel exceeds enumeration guard");
    std::vector<double> rows(n * n);
    for (std::size_t x = 0; x < n; ++x) {
        auto xc = product_coords(dims, x);
        for (std::size_t y = 0; y < n; ++y) {
            auto yc = product_coords(dims, y);
            double v = 1.0;
            for (int k = 0; k <= m && v != 0.0; ++k) v *= level_kernels[k].at(xc[k], yc[k]);
            rows[x * n + y] = v;
        }
    }
    return FiniteKernel(joint, joint, std::move(rows));
}

DiscreteMeasure omega_of(const FeynmanKacModel& model,
                         const std::vector<DiscreteMeasure>& eta_marginals,
                         std::size_t max_points) {
    const int m = model.num_levels();
    if (static_cast<int>(eta_marginals.size()) < m)
        throw ConfigError("omega_of: need marginals for levels 0..m-1");
    std::vector<DiscreteMeasure> factors;
    factors.push_back(model.initial);
    for (int k = 1; k <= m; ++k) factors.push_back(phi_step(eta_marginals[k - 1], model, k - 1));

    SpacePtr joint = product_space(model.spaces, max_points);
    std::vector<std::size_t> dims;
    for (const auto& s : model.spaces) dims.push_back(s->size());
    std::vector<double> w(joint->size(), 1.0);
    for (std::size_t i = 0; i < w.size(); ++i) {
        auto coords = product_coords(dims, i);
        for (int k = 0; k <= m; ++k) w[i] *= factors[k].weights[coords[k]];
    }
    return DiscreteMeasure(joint, std::move(w));
}

DiscreteMeasure ParticleRun::empirical(int level) const {
    if (!model) throw InvalidParameterError("empty particle run");
    const auto& cloud = clouds.at(level);
    std::vector<double> w(model->spaces[level]->size(), 0.0);
    for (std::size_t x : cloud) w[x] += 1.0;
    for (double& v : w) v /= static_cast<double>(cloud.size());
    return DiscreteMeasure(model->spaces[level], std::move(w));
}

ParticleRun smc_run(const FeynmanKacModel& model, std::size_t n_particles, std::uint64_t seed) {
    if (n_particles < 1) throw InvalidParameterError("smc_run: need at least one particle");
    ParticleRun run;
    run.model = &model;
    run.n_particles = n_particles;
    const int m = model.num_levels();
    run.normalizer_log.assign(m + 1, 0.0);
    Rng rng = Rng(seed).stream("smc", 0);

    std::vector<std::size_t> cloud(n_particles);
    for (auto& x : cloud)
        x = rng.next_categorical(model.initial.weights, model.initial.mass());
    run.clouds.push_back(cloud);

    for (int l = 1; l <= m; ++l) {
        const auto& g = model.potentials[l - 1];
        std::vector<double> weights(n_particles);
        double total = 0.0;
        for (std::size_t i = 0; i < n_particles; ++i) {
            weights[i] = g[cloud[i]];
            total += weights[i];
        }
        if (!(total > 0.0))
            throw DegeneratePotentialError("smc_run: potential vanished on the whole cloud");
        run.normalizer_log[l] =
            run.normalizer_log[l - 1] + std::log(total / static_cast<double>(n_particles));
        std::vector<std::size_t> next(n_particles);
        for (std::size_t i = 0; i < n_particles; ++i) {
            std::size_t ancestor = rng.next_categorical(weights, total);
            next[i] = rng.next_categorical(model.transition(l).row(cloud[ancestor]), 1.0);
        }
        cloud = std::move(next);
        run.clouds.push_back(cloud);
    }
    return run;
}

IMcmcRun hybrid_init(IMcmcRun run, const ParticleRun& particles, HybridMode mode) {
    if (particles.n_particles == 0) return run;
    if (!particles.model || particles.model->num_levels() != run.levels())
        throw ConfigError("hybrid_init: particle run over a different model");
    for (int k = 0; k <= run.levels(); ++k)
        require_same_space(particles.model->spaces[k], run.model().spaces[k], "hybrid_init");

    std::vector<DiscreteMeasure> measures;
    for (int k = 0; k <= run.levels(); ++k) measures.push_back(particles.empirical(k));

    if (mode == HybridMode::InitOnly) {
        if (run.tick() != 0) throw ConfigError("init-only hybrid start needs a fresh run");
        return run.with_initial(measures);
    }
    run.enable_blend(std::move(measures), particles.n_particles);
    return run;
}

}  // namespace imcmc
