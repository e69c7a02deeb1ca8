#include "imcmc/resolvent.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

namespace imcmc {

namespace {

constexpr std::size_t kMaxStates = 256;

Eigen::MatrixXd to_eigen(const FiniteKernel& k) {
    Eigen::MatrixXd m(k.n_from(), k.n_to());
    for (std::size_t x = 0; x < k.n_from(); ++x)
        for (std::size_t y = 0; y < k.n_to(); ++y) m(x, y) = k.at(x, y);
    return m;
}

// Dobrushin coefficient without the stochasticity re-check; high kernel
// powers accumulate row-sum drift of order n*eps that would trip the
// validating entry point.
double raw_beta(const FiniteKernel& kernel) {
    double beta = 0.0;
    for (std::size_t x = 0; x < kernel.n_from(); ++x)
        for (std::size_t y = x + 1; y < kernel.n_from(); ++y) {
            double tv = 0.0;
            for (std::size_t z = 0; z < kernel.n_to(); ++z)
                tv += std::abs(kernel.at(x, z) - kernel.at(y, z));
            beta = std::max(beta, 0.5 * tv);
        }
    return beta;
}

}  // namespace

std::optional<std::pair<int, double>> contracting_power(const FiniteKernel& kernel,
                                                        double threshold, int max_power) {
    require_same_space(kernel.from, kernel.to, "contracting_power");
    kernel.validate();
    FiniteKernel acc = kernel;
    for (int n = 1; n <= max_power; ++n) {
        double b = raw_beta(acc);
        if (b <= threshold) return std::make_pair(n, b);
        acc = FiniteKernel::compose(acc, kernel);
    }
    return std::nullopt;
}

DiscreteMeasure invariant_measure(const FiniteKernel& kernel) {
    if (kernel.n_from() > kMaxStates) throw TooLargeError("invariant_measure: space too large");
    if (!contracting_power(kernel))
        throw NonErgodicError("no contracting power of the kernel within n0 <= 64");
    const auto n = static_cast<Eigen::Index>(kernel.n_from());
    // Stationarity rows K^T - I with the last row replaced by normalization.
    Eigen::MatrixXd a = to_eigen(kernel).transpose() - Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    a.row(n - 1).setOnes();
    rhs(n - 1) = 1.0;
    Eigen::VectorXd w = a.partialPivLu().solve(rhs);
    std::vector<double> weights(kernel.n_from());
    double mass = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        weights[i] = std::max(0.0, w(i));  // clip solver noise
        mass += weights[i];
    }
    if (!(mass > 0.0)) throw NonErgodicError("stationary solve produced a null vector");
    for (double& x : weights) x /= mass;
    return DiscreteMeasure(kernel.from, std::move(weights));
}

double PoissonResiduals::max() const { return std::max({invariance, poisson, centering}); }

double PoissonSolution::norm() const {
    double best = 0.0;
    for (std::size_t x = 0; x < dim(); ++x) {
        double s = 0.0;
        for (std::size_t y = 0; y < dim(); ++y) s += std::abs(resolvent_at(x, y));
        best = std::max(best, s);
    }
    return best;
}

double PoissonSolution::beta() const {
    double best = 0.0;
    for (std::size_t x = 0; x < dim(); ++x)
        for (std::size_t y = x + 1; y < dim(); ++y) {
            double s = 0.0;
            for (std::size_t z = 0; z < dim(); ++z)
                s += std::abs(resolvent_at(x, z) - resolvent_at(y, z));
            best = std::max(best, 0.5 * s);
        }
    return best;
}

PoissonSolution poisson_solve(const FiniteKernel& kernel) {
    PoissonSolution sol;
    sol.kernel = kernel;
    sol.omega = invariant_measure(kernel);
    const auto n = static_cast<Eigen::Index>(kernel.n_from());
    Eigen::MatrixXd k = to_eigen(kernel);
    Eigen::VectorXd w(n);
    for (Eigen::Index i = 0; i < n; ++i) w(i) = sol.omega.weights[i];
    Eigen::MatrixXd one_omega = Eigen::VectorXd::Ones(n) * w.transpose();
    Eigen::MatrixXd fundamental = Eigen::MatrixXd::Identity(n, n) - k + one_omega;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(fundamental);
    // A singular fundamental matrix would mean 1 is not a simple eigenvalue.
    Eigen::MatrixXd z = lu.solve(Eigen::MatrixXd::Identity(n, n));
    if (!z.allFinite()) throw NonErgodicError("fundamental matrix solve failed");
    Eigen::MatrixXd p = z - one_omega;

    sol.resolvent.resize(kernel.n_from() * kernel.n_from());
    for (Eigen::Index x = 0; x < n; ++x)
        for (Eigen::Index y = 0; y < n; ++y) sol.resolvent[x * n + y] = p(x, y);

    // Residuals of the defining identities.
    Eigen::RowVectorXd wk = w.transpose() * k;
    sol.residuals.invariance = (wk - w.transpose()).cwiseAbs().sum();
    Eigen::MatrixXd defect = (k - Eigen::MatrixXd::Identity(n, n)) * p -
                             (one_omega - Eigen::MatrixXd::Identity(n, n));
    sol.residuals.poisson = defect.cwiseAbs().maxCoeff();
    sol.residuals.centering = (w.transpose() * p).cwiseAbs().maxCoeff();
    return sol;
}

double alpha_of(const FiniteKernel& kernel) {
    auto power = contracting_power(kernel);
    if (!power) throw NonErgodicError("alpha_of: no contracting power within n0 <= 64");
    const auto [n0, beta_n0] = *power;

    double total = 0.0;
    FiniteKernel acc = FiniteKernel::identity(kernel.from);
    double beta = raw_beta(acc);  // beta(K^0)
    std::size_t steps = 0;
    while (beta >= 1e-14) {
        total += beta;
        acc = FiniteKernel::compose(acc, kernel);
        beta = raw_beta(acc);
        if (++steps > 100000) break;  // unreachable under the ergodicity gate
    }
    // Tail from submultiplicativity in blocks of n0: sum_{n >= T} beta(K^n)
    // <= n0 beta(K^T) / (1 - beta(K^n0)).
    double tail = static_cast<double>(n0) * beta / (1.0 - beta_n0);
    return total + tail;
}

ChainDriver constant_driver(const FiniteKernel& kernel) {
    require_same_space(kernel.from, kernel.to, "constant_driver");
    ChainDriver d;
    d.flow_space = kernel.from;
    d.state_space = kernel.from;
    d.name = "constant";
    DiscreteMeasure omega = invariant_measure(kernel);
    d.kernel = [kernel](const DiscreteMeasure&) { return kernel; };
    d.invariant = [omega](const DiscreteMeasure&) { return omega; };
    d.row = [kernel](const DiscreteMeasure&, std::size_t x) {
        std::vector<double> w(kernel.row(x).begin(), kernel.row(x).end());
        return DiscreteMeasure(kernel.to, std::move(w));
    };
    return d;
}

ChainDriver direct_phi_driver(const FeynmanKacModel& model, int l) {
    if (l < 0 || l >= model.num_levels())
        throw InvalidParameterError("direct_phi_driver: level out of range");
    ChainDriver d;
    d.flow_space = model.spaces[l];
    d.state_space = model.spaces[l + 1];
    d.name = "direct-phi";
    // Captured by value so the driver owns its model.
    d.kernel = [model, l](const DiscreteMeasure& mu) {
        return FiniteKernel::rank_one(model.spaces[l + 1], phi_step(mu, model, l));
    };
    d.invariant = [model, l](const DiscreteMeasure& mu) { return phi_step(mu, model, l); };
    d.row = [model, l](const DiscreteMeasure& mu, std::size_t) {
        return phi_step(mu, model, l);
    };
    return d;
}

ChainDriver mixture_driver(const FiniteKernel& base, const FiniteKernel& feedback,
                           double theta) {
    require_same_space(base.from, base.to, "mixture_driver");
    require_same_space(base.from, feedback.from, "mixture_driver");
    require_same_space(base.from, feedback.to, "mixture_driver");
    if (!(theta >= 0.0 && theta <= 1.0))
        throw InvalidParameterError("mixture weight outside [0,1]");
    ChainDriver d;
    d.flow_space = base.from;
    d.state_space = base.from;
    d.name = "mixture";

    // omega solves omega (I - (1-theta) K) = theta (mu L); precompute the
    // transposed inverse once.
    const auto n = static_cast<Eigen::Index>(base.n_from());
    Eigen::MatrixXd sys = Eigen::MatrixXd::Identity(n, n) - (1.0 - theta) * to_eigen(base);
    Eigen::MatrixXd inv_t = sys.transpose().partialPivLu().solve(
        Eigen::MatrixXd::Identity(n, n));
    auto space = base.from;

    d.kernel = [base, feedback, theta, space](const DiscreteMeasure& mu) {
        DiscreteMeasure fed = feedback.transport(mu);
        std::size_t n_states = space->size();
        std::vector<double> rows(n_states * n_states);
        for (std::size_t x = 0; x < n_states; ++x)
            for (std::size_t y = 0; y < n_states; ++y)
                rows[x * n_states + y] = (1.0 - theta) * base.at(x, y) + theta * fed.weights[y];
        return FiniteKernel(space, space, std::move(rows));
    };
    d.row = [base, feedback, theta, space](const DiscreteMeasure& mu, std::size_t x) {
        DiscreteMeasure fed = feedback.transport(mu);
        std::vector<double> w(space->size());
        for (std::size_t y = 0; y < w.size(); ++y)
            w[y] = (1.0 - theta) * base.at(x, y) + theta * fed.weights[y];
        return DiscreteMeasure(space, std::move(w));
    };
    if (theta == 0.0) {
        DiscreteMeasure omega = invariant_measure(base);
        d.invariant = [omega](const DiscreteMeasure&) { return omega; };
    } else {
        d.invariant = [feedback, theta, inv_t, space, n](const DiscreteMeasure& mu) {
            DiscreteMeasure fed = feedback.transport(mu);
            Eigen::VectorXd rhs(n);
            for (Eigen::Index i = 0; i < n; ++i) rhs(i) = theta * fed.weights[i];
            Eigen::VectorXd w = inv_t * rhs;
            std::vector<double> weights(space->size());
            double mass = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                weights[i] = std::max(0.0, w(i));
                mass += weights[i];
            }
            for (double& x : weights) x /= mass;
            return DiscreteMeasure(space, std::move(weights));
        };
    }
    return d;
}

double kernel_distance(const FiniteKernel& a, const FiniteKernel& b) {
    require_same_space(a.from, b.from, "kernel_distance");
    require_same_space(a.to, b.to, "kernel_distance");
    double best = 0.0;
    for (std::size_t x = 0; x < a.n_from(); ++x) {
        double tv = 0.0;
        for (std::size_t y = 0; y < a.n_to(); ++y) tv += std::abs(a.at(x, y) - b.at(x, y));
        best = std::max(best, tv);
    }
    return best;
}

nlohmann::json LipschitzReport::to_json() const {
    nlohmann::json j;
    j["c_hat"] = c_hat;
    j["all_ok"] = all_ok;
    j["pairs"] = nlohmann::json::array();
    for (const auto& p : pairs) {
        j["pairs"].push_back({{"flow_distance", p.flow_distance},
                              {"omega_distance", p.omega_distance},
                              {"delta_bound", p.delta_bound},
                              {"resolvent_distance", p.resolvent_distance},
                              {"resolvent_bound", p.resolvent_bound},
                              {"n0", p.n0},
                              {"omega_ok", p.omega_ok},
                              {"resolvent_ok", p.resolvent_ok}});
    }
    return j;
}

namespace {

DiscreteMeasure random_probability(const SpacePtr& space, Rng& rng) {
    std::vector<double> w(space->size());
    double s = 0.0;
    for (double& x : w) {
        x = 0.02 + rng.next_double();
        s += x;
    }
    for (double& x : w) x /= s;
    return DiscreteMeasure(space, std::move(w));
}

double resolvent_distance(const PoissonSolution& a, const PoissonSolution& b) {
    double best = 0.0;
    for (std::size_t x = 0; x < a.dim(); ++x) {
        double s = 0.0;
        for (std::size_t y = 0; y < a.dim(); ++y)
            s += std::abs(a.resolvent_at(x, y) - b.resolvent_at(x, y));
        best = std::max(best, s);
    }
    return best;
}

}  // namespace

LipschitzReport lipschitz_certificates(const ChainDriver& driver, int samples,
                                       std::uint64_t seed) {
    LipschitzReport report;
    Rng root = Rng(seed).stream("lipschitz", 0);
    std::vector<std::pair<DiscreteMeasure, DiscreteMeasure>> pairs;
    pairs.reserve(samples);
    for (int i = 0; i < samples; ++i) {
        Rng rng = root.stream(i);
        pairs.emplace_back(random_probability(driver.flow_space, rng),
                           random_probability(driver.flow_space, rng));
    }

    // Pass 1: the empirical Lipschitz constant of the kernel family.
    for (int i = 0; i < samples; ++i) {
        const auto& [eta, mu] = pairs[i];
        double d = total_variation(eta, mu);
        if (d < 1e-12) continue;
        double kd = kernel_distance(driver.kernel(eta), driver.kernel(mu));
        report.c_hat = std::max(report.c_hat, kd / d);
    }

    // Pass 2: perturbation bounds pair by pair.
    const double slack = 1e-9;
    for (int i = 0; i < samples; ++i) {
        const auto& [eta, mu] = pairs[i];
        double d = total_variation(eta, mu);
        if (d < 1e-12) continue;
        FiniteKernel k_eta = driver.kernel(eta);
        FiniteKernel k_mu = driver.kernel(mu);
        auto p_eta = contracting_power(k_eta);
        auto p_mu = contracting_power(k_mu);
        if (!p_eta || !p_mu)
            throw NonErgodicError("lipschitz_certificates: non-ergodic family member at pair " +
                                  std::to_string(i));
        LipschitzPair rec{};
        // Common power: beta is submultiplicative, so the larger power
        // contracts for both members.
        rec.n0 = std::max(p_eta->first, p_mu->first);
        double beta_eta = dobrushin(FiniteKernel::power(k_eta, rec.n0));
        double beta_mu = dobrushin(FiniteKernel::power(k_mu, rec.n0));
        double delta = report.c_hat * rec.n0 / (1.0 - std::min(beta_eta, beta_mu));
        PoissonSolution s_eta = poisson_solve(k_eta);
        PoissonSolution s_mu = poisson_solve(k_mu);
        rec.flow_distance = d;
        rec.omega_distance = total_variation(s_eta.omega, s_mu.omega);
        rec.delta_bound = delta * d;
        rec.resolvent_distance = resolvent_distance(s_eta, s_mu);
        double alpha_eta = alpha_of(k_eta);
        double alpha_mu = alpha_of(k_mu);
        rec.resolvent_bound = alpha_eta * (2.0 * report.c_hat * alpha_mu + delta) * d;
        rec.omega_ok = rec.omega_distance <= rec.delta_bound + slack;
        rec.resolvent_ok = rec.resolvent_distance <= rec.resolvent_bound + slack;
        report.all_ok = report.all_ok && rec.omega_ok && rec.resolvent_ok;
        report.pairs.push_back(rec);
    }
    return report;
}

InhomogeneousRunReport run_inhomogeneous(
    const ChainDriver& driver, FlowMode mode,
    const std::function<DiscreteMeasure(std::int64_t)>& external_flow, std::int64_t n_max,
    int replicates, std::uint64_t seed, const std::vector<std::int64_t>& checkpoints,
    const std::vector<TestFunction>& functions) {
    if (mode == FlowMode::SelfInteracting &&
        !same_space(driver.flow_space, driver.state_space))
        throw InvalidParameterError("self-interacting mode needs F = E");
    if (mode == FlowMode::External && !external_flow)
        throw InvalidParameterError("external flow mode needs a flow");

    InhomogeneousRunReport report;
    report.series.kernel_id = driver.name;
    report.series.seed = seed;
    const std::size_t n_states = driver.state_space->size();

    std::vector<std::int64_t> cps = checkpoints;
    std::sort(cps.begin(), cps.end());
    cps.erase(std::unique(cps.begin(), cps.end()), cps.end());
    while (!cps.empty() && cps.back() > n_max) cps.pop_back();

    for (int rep = 0; rep < replicates; ++rep) {
        Rng rng = Rng(seed).stream("inhomogeneous", rep);
        OccupationMeasure eta(driver.state_space);
        std::size_t x = rng.next_index(n_states);
        eta.push(x);

        std::vector<double> omega_bar(n_states, 0.0);  // running sum of omega(mu_p)
        DiscreteMeasure prev_occ = eta.measure();
        double eps_sum = 0.0;
        auto cp = cps.begin();

        for (std::int64_t n = 0; n <= n_max; ++n) {
            DiscreteMeasure mu_n = mode == FlowMode::SelfInteracting ? eta.measure()
                                                                     : external_flow(n);
            DiscreteMeasure w = driver.invariant(mu_n);
            for (std::size_t i = 0; i < n_states; ++i) omega_bar[i] += w.weights[i];

            while (cp != cps.end() && *cp == n) {
                DiscreteMeasure occ = eta.measure();
                double inv = 1.0 / static_cast<double>(n + 1);
                for (const auto& f : functions) {
                    double err = 0.0;
                    for (std::size_t i = 0; i < n_states; ++i)
                        err += (occ.weights[i] - omega_bar[i] * inv) * f.values[i];
                    report.series.records.push_back({n, 0, rep, f.name, err});
                }
                ++cp;
            }
            if (n == n_max) break;

            DiscreteMeasure row = driver.row(mu_n, x);
            x = rng.next_categorical(row.weights, row.mass());
            eta.push(x);

            if (mode == FlowMode::SelfInteracting) {
                DiscreteMeasure occ = eta.measure();
                double eps = total_variation(occ, prev_occ);
                double bound = 2.0 / static_cast<double>(n + 2);
                if (eps > bound + 1e-12) {
                    report.variation_bounds_ok = false;
                    report.max_eps_excess = std::max(report.max_eps_excess, eps - bound);
                }
                eps_sum += eps;
                double mean_var = eps_sum / static_cast<double>(n + 1);
                double mean_bound = 2.0 / static_cast<double>(n + 1) *
                                    std::log(static_cast<double>(n + 2));
                if (mean_var > mean_bound + 1e-12) report.variation_bounds_ok = false;
                prev_occ = std::move(occ);
            }
        }
    }
    return report;
}

}  // namespace imcmc
