#include "imcmc/continuous.hpp"

#include <algorithm>
#include <cmath>

namespace imcmc {

namespace {

double laplace_density(double center, double scale_c, double y) {
    return 0.5 * scale_c * std::exp(-scale_c * std::abs(y - center));
}

}  // namespace

ContinuousModel bilaplace_model(int levels) {
    if (levels < 1) throw InvalidParameterError("bilaplace_model: need at least one level");
    ContinuousModel m;
    m.name = "bilaplace-continuous";
    m.levels = levels;
    const double c = 1.0;
    m.sample_initial = [](Rng& rng) { return rng.next_normal(); };
    for (int l = 1; l <= levels; ++l) {
        m.sample_transition.emplace_back(
            [c](double x, Rng& rng) { return std::tanh(x) + rng.next_laplace(c); });
        m.transition_density.emplace_back(
            [c](double x, double y) { return laplace_density(std::tanh(x), c, y); });
    }
    for (int l = 0; l < levels; ++l)
        m.potential.emplace_back([](double x) { return 0.5 + 0.5 * std::exp(-x * x); });
    return m;
}

ContinuousProposal bilaplace_proposal() {
    const double c = 0.7;
    ContinuousProposal p;
    p.sample = [c](double u_last, Rng& rng) { return std::tanh(u_last) + rng.next_laplace(c); };
    p.density = [c](double u_last, double z) { return laplace_density(std::tanh(u_last), c, z); };
    return p;
}

std::vector<ContinuousObservable> continuous_observables() {
    return {
        {"tanh", [](double x) { return std::tanh(x); }},
        {"pos", [](double x) { return x > 0.0 ? 1.0 : 0.0; }},
        {"clip", [](double x) { return std::clamp(x, -2.0, 2.0); }},
    };
}

ContinuousValues run_continuous_replicate(const ContinuousModel& model, ContinuousKernel kernel,
                                          const ContinuousProposal& proposal, std::int64_t horizon,
                                          const std::vector<std::int64_t>& checkpoints,
                                          std::uint64_t seed, int replicate,
                                          const std::vector<ContinuousObservable>& obs) {
    const int m = model.levels;
    Rng root = Rng(seed).stream("continuous", replicate);
    std::vector<Rng> rngs;
    for (int k = 0; k <= m; ++k) rngs.push_back(root.stream(k));

    // Raw-point occupation: per level, the history of paths (a path at
    // level k is its k+1 coordinates).
    std::vector<std::vector<std::vector<double>>> paths(m + 1);
    std::vector<std::vector<double>> current(m + 1);
    // Running eta_n(f circ last) sums per level/observable.
    std::vector<std::vector<double>> sums(m + 1, std::vector<double>(obs.size(), 0.0));
    // Potential sums over occupations feed the ancestor selection.
    std::vector<std::vector<double>> pot_history(m + 1);

    for (int k = 0; k <= m; ++k) {
        std::vector<double> p;
        p.push_back(model.sample_initial(rngs[k]));
        for (int j = 1; j <= k; ++j) p.push_back(model.sample_transition[j - 1](p.back(), rngs[k]));
        current[k] = p;
        paths[k].push_back(p);
        if (k < m) pot_history[k].push_back(model.potential[k](p.back()));
        for (std::size_t i = 0; i < obs.size(); ++i) sums[k][i] += obs[i].f(p.back());
    }

    ContinuousValues out;
    std::vector<std::int64_t> cps = checkpoints;
    std::sort(cps.begin(), cps.end());
    auto cp = cps.begin();

    for (std::int64_t n = 0; n <= horizon; ++n) {
        while (cp != cps.end() && *cp == n) {
            double inv = 1.0 / static_cast<double>(n + 1);
            for (int k = 0; k <= m; ++k)
                for (std::size_t i = 0; i < obs.size(); ++i)
                    out.values.push_back({n, k, replicate, obs[i].name, sums[k][i] * inv});
            ++cp;
        }
        if (n == horizon) break;

        std::vector<std::vector<double>> next(m + 1);
        for (int k = 0; k <= m; ++k) {
            Rng& rng = rngs[k];
            if (k == 0) {
                next[0] = {model.sample_initial(rng)};
                continue;
            }
            if (kernel == ContinuousKernel::DirectPhi) {
                // Ancestor from the level-(k-1) occupation, proportional to
                // its potential value, then one base move.
                const auto& pots = pot_history[k - 1];
                double total = 0.0;
                for (double g : pots) total += g;
                std::size_t q = rng.next_categorical(pots, total);
                std::vector<double> p = paths[k - 1][q];
                p.push_back(model.sample_transition[k - 1](p.back(), rng));
                next[k] = std::move(p);
            } else {
                // Independence-type MH over (prefix, new coordinate).
                const auto& occ = paths[k - 1];
                std::size_t w = rng.next_index(occ.size());
                double w_last = occ[w].back();
                double z = proposal.sample(w_last, rng);
                const auto& cur = current[k];
                double u_last = cur[cur.size() - 2];
                double v = cur.back();
                double num = proposal.density(u_last, v) * model.transition_density[k - 1](w_last, z) *
                             model.potential[k - 1](w_last);
                double den = model.transition_density[k - 1](u_last, v) *
                             model.potential[k - 1](u_last) * proposal.density(w_last, z);
                bool accept;
                if (den == 0.0) {
                    if (num > 0.0)
                        throw AbsoluteContinuityError("continuous MH: reference vanished");
                    accept = true;
                } else {
                    double r = num / den;
                    accept = r >= 1.0 || rng.next_double() < r;
                }
                if (accept) {
                    std::vector<double> p = occ[w];
                    p.push_back(z);
                    next[k] = std::move(p);
                } else {
                    next[k] = cur;
                }
            }
        }
        for (int k = 0; k <= m; ++k) {
            current[k] = next[k];
            paths[k].push_back(next[k]);
            if (k < m) pot_history[k].push_back(model.potential[k](next[k].back()));
            for (std::size_t i = 0; i < obs.size(); ++i) sums[k][i] += obs[i].f(next[k].back());
        }
    }
    return out;
}

}  // namespace imcmc
