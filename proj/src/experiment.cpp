#include "imcmc/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "imcmc/parallel.hpp"
#include "imcmc/resolvent.hpp"

namespace imcmc {

namespace fs = std::filesystem;

const std::vector<std::string>& known_suites() {
    static const std::vector<std::string> kSuites = {
        "rates", "concentration", "path-space", "normalizers", "stability", "uniform"};
    return kSuites;
}

std::vector<std::int64_t> dyadic_checkpoints(int lo_exp, int hi_exp, std::int64_t horizon) {
    std::vector<std::int64_t> cps;
    for (int e = lo_exp; e <= hi_exp; ++e) {
        std::int64_t n = std::int64_t{1} << e;
        if (n <= horizon) cps.push_back(n);
    }
    return cps;
}

namespace {

bool has_suite(const ExperimentPlan& plan, const std::string& name) {
    return std::find(plan.suites.begin(), plan.suites.end(), name) != plan.suites.end();
}

struct PathTracking {
    std::vector<std::size_t> dims;
    std::vector<TestFunction> functions;  // on the joint space
    std::vector<double> target_values;    // pibar^[m'](f) per function
    int levels = 0;                       // m'
};

// Product-indicator test functions: the diagonal tuples plus the product
// of the per-level +/-1 functions.
PathTracking make_path_tracking(const FeynmanKacModel& model, int m_prime,
                                const std::vector<std::vector<TestFunction>>& basis,
                                std::uint64_t /*seed*/) {
    PathTracking pt;
    pt.levels = m_prime;
    std::size_t joint = 1;
    for (int k = 0; k <= m_prime; ++k) {
        pt.dims.push_back(model.spaces[k]->size());
        joint *= model.spaces[k]->size();
        if (joint > 200000) throw TooLargeError("path tracking: joint space too large");
    }

    std::size_t min_states = model.spaces[0]->size();
    for (int k = 1; k <= m_prime; ++k) min_states = std::min(min_states, model.spaces[k]->size());
    for (std::size_t s = 0; s < min_states; ++s) {
        std::vector<double> v(joint, 0.0);
        std::vector<std::size_t> coords(m_prime + 1, s);
        v[product_index(pt.dims, coords)] = 1.0;
        pt.functions.push_back({"path:diag" + std::to_string(s), std::move(v)});
    }
    std::vector<double> prod(joint, 1.0);
    for (std::size_t i = 0; i < joint; ++i) {
        auto coords = product_coords(pt.dims, i);
        for (int k = 0; k <= m_prime; ++k) {
            const auto& pm = basis[k].back();  // the +/-1 member
            prod[i] *= pm.values[coords[k]];
        }
    }
    pt.functions.push_back({"path:pm1prod", std::move(prod)});

    DiscreteMeasure target = exact_path_target(model, m_prime);
    for (const auto& f : pt.functions)
        pt.target_values.push_back(integrate(target, f.values));
    return pt;
}

DiagnosticsSeries finite_replicate(const ExperimentPlan& plan, const FeynmanKacModel& model,
                                   const ExactFlow& flow,
                                   const std::vector<std::vector<TestFunction>>& basis,
                                   const PathTracking* path, bool normalizers,
                                   const std::vector<std::int64_t>& cps, int rep) {
    DiagnosticsSeries out;
    IMcmcRun run(model, plan.specs, plan.seed, static_cast<std::uint64_t>(rep));
    const int m = model.num_levels();

    for (std::int64_t b = 0; b < plan.burn_in; ++b) run.advance();
    if (plan.burn_in > 0) run.reset_occupations();

    std::vector<std::uint64_t> joint_counts;
    std::vector<std::size_t> coords;
    if (path) {
        joint_counts.assign(path->functions.front().values.size(), 0);
        coords.resize(path->levels + 1);
        for (int k = 0; k <= path->levels; ++k) coords[k] = run.state(k);
        ++joint_counts[product_index(path->dims, coords)];
    }

    auto cp = cps.begin();
    for (std::int64_t n = 0; n <= plan.horizon; ++n) {
        if (n > 0) {
            run.advance();
            if (path) {
                for (int k = 0; k <= path->levels; ++k) coords[k] = run.state(k);
                ++joint_counts[product_index(path->dims, coords)];
            }
        }
        while (cp != cps.end() && *cp == n) {
            const double inv = 1.0 / static_cast<double>(n + 1);
            for (int k = 0; k <= m; ++k) {
                const OccupationMeasure& eta = run.occupation(k);
                for (const auto& f : basis[k]) {
                    double mean = 0.0;
                    for (std::size_t i = 0; i < f.values.size(); ++i)
                        mean += static_cast<double>(eta.counts[i]) * f.values[i];
                    mean *= inv;
                    double target = integrate(flow.targets[k], f.values);
                    out.records.push_back({n, k, rep, f.name, mean - target});
                }
            }
            if (path) {
                for (std::size_t fi = 0; fi < path->functions.size(); ++fi) {
                    const auto& f = path->functions[fi];
                    double mean = 0.0;
                    for (std::size_t i = 0; i < f.values.size(); ++i)
                        mean += static_cast<double>(joint_counts[i]) * f.values[i];
                    mean *= inv;
                    out.records.push_back({n, -1, rep, f.name, mean - path->target_values[fi]});
                }
            }
            if (normalizers) {
                auto logs = run.estimate_normalizers();
                for (int l = 1; l <= m; ++l)
                    out.records.push_back({n, l, rep, "lognorm", logs[l] - flow.log_gamma1[l]});
            }
            ++cp;
        }
    }
    return out;
}

// Pooled per-level RMSE. basis_only restricts to the oscillation-bounded
// basis functions (indicator/pm1), which is what the rate claims cover.
std::map<int, std::vector<std::pair<std::int64_t, double>>> pooled_rmse(
    const DiagnosticsSeries& series, bool basis_only) {
    std::map<std::pair<int, std::int64_t>, std::pair<double, std::size_t>> acc;
    for (const auto& rec : series.records) {
        if (basis_only && rec.function.rfind("ind:", 0) != 0 && rec.function != "pm1") continue;
        if (!basis_only && rec.function == "lognorm") continue;
        auto& cell = acc[{rec.level, rec.n}];
        cell.first += rec.error * rec.error;
        cell.second += 1;
    }
    std::map<int, std::vector<std::pair<std::int64_t, double>>> out;
    for (const auto& [key, cell] : acc)
        out[key.first].emplace_back(key.second,
                                    std::sqrt(cell.first / static_cast<double>(cell.second)));
    for (auto& [k, curve] : out) std::sort(curve.begin(), curve.end());
    return out;
}

nlohmann::json rates_summary(const DiagnosticsSeries& series, bool basis_only = true) {
    nlohmann::json j;
    for (const auto& [level, curve] : pooled_rmse(series, basis_only)) {
        if (level < 0) continue;
        nlohmann::json entry;
        entry["level"] = level;
        entry["curve"] = nlohmann::json::array();
        std::vector<double> scaled;
        for (const auto& [n, v] : curve) {
            entry["curve"].push_back({{"n", n}, {"rmse", v}});
            scaled.push_back(std::sqrt(static_cast<double>(n + 1)) * v);
        }
        if (curve.size() >= 5) {
            RateFit fit = rate_fit(curve);
            entry["slope"] = fit.slope;
            entry["intercept"] = fit.intercept;
            entry["residual"] = fit.residual;
        }
        entry["sqrtn_mann_kendall_p"] = mann_kendall_upward_p(scaled);
        // Trend test past the first quarter of the window: the early-n
        // transient belongs to the bounded constant, not to a trend.
        std::vector<double> tail(scaled.begin() + scaled.size() / 4, scaled.end());
        entry["sqrtn_mann_kendall_p_tail"] = mann_kendall_upward_p(tail);
        j.push_back(std::move(entry));
    }
    return j;
}

nlohmann::json path_summary(const DiagnosticsSeries& series) {
    nlohmann::json j = nlohmann::json::array();
    auto curves = path_space_error(series, 2.0);

    // Pooled curve over all product functions: one aggregate trend test.
    std::map<std::int64_t, std::pair<double, std::size_t>> pooled;
    for (const auto& rec : series.records) {
        if (rec.level != -1) continue;
        auto& cell = pooled[rec.n];
        cell.first += rec.error * rec.error;
        cell.second += 1;
    }
    std::vector<std::pair<std::int64_t, double>> pooled_curve;
    for (const auto& [n, cell] : pooled)
        pooled_curve.emplace_back(n, std::sqrt(cell.first / static_cast<double>(cell.second)));
    curves[{-1, "pooled"}] = std::move(pooled_curve);

    for (const auto& [key, curve] : curves) {
        nlohmann::json entry;
        entry["function"] = key.second;
        std::vector<double> scaled;
        entry["curve"] = nlohmann::json::array();
        for (const auto& [n, v] : curve) {
            entry["curve"].push_back({{"n", n}, {"rmse", v}});
            scaled.push_back(std::sqrt(static_cast<double>(n + 1)) * v);
        }
        entry["sqrtn_mann_kendall_p"] = mann_kendall_upward_p(scaled);
        std::vector<double> tail(scaled.begin() + scaled.size() / 4, scaled.end());
        entry["sqrtn_mann_kendall_p_tail"] = mann_kendall_upward_p(tail);
        j.push_back(std::move(entry));
    }
    return j;
}

// Self-map Feynman-Kac model on the level-0 space (used by the
// concentration suite, which needs F = E).
FeynmanKacModel self_phi_model(const FeynmanKacModel& model) {
    if (model.spaces[0]->size() != model.spaces[1]->size())
        throw InvalidParameterError("concentration suite needs a square level-1 transition");
    FeynmanKacModel self;
    SpacePtr space = model.spaces[0];
    self.spaces = {space, space};
    self.initial = model.initial;
    self.potentials = {model.potentials[0]};
    self.transitions.emplace_back(space, space, model.transitions[0].rows);
    self.validate();
    return self;
}

nlohmann::json concentration_summary(const ExperimentPlan& plan, const FeynmanKacModel& model) {
    nlohmann::json j;
    FeynmanKacModel self = self_phi_model(model);
    ChainDriver driver = direct_phi_driver(self, 0);

    // Certified constants: c from the sampled Lipschitz ratio, b(1) from
    // the sampled Dobrushin coefficients (exactly 0 for rank-one rows).
    LipschitzReport lip = lipschitz_certificates(driver, 50, plan.seed);
    Rng rng = Rng(plan.seed).stream("concentration-b", 0);
    double b_max = 0.0;
    for (int i = 0; i < 20; ++i) {
        std::vector<double> w(self.spaces[0]->size());
        double s = 0.0;
        for (double& x : w) {
            x = 0.02 + rng.next_double();
            s += x;
        }
        for (double& x : w) x /= s;
        b_max = std::max(b_max, dobrushin(driver.kernel(DiscreteMeasure(self.spaces[0], w))));
    }
    ConcentrationConstants constants{1, b_max, lip.c_hat};

    std::int64_t n_conc = std::min<std::int64_t>(plan.horizon, 1 << 12);
    int reps = std::max(plan.replicates, 100);
    auto fns = test_function_basis(self.spaces[0], plan.seed);
    auto report = run_inhomogeneous(driver, FlowMode::SelfInteracting, nullptr, n_conc, reps,
                                    plan.seed + 1, {n_conc}, fns);

    j["n"] = n_conc;
    j["replicates"] = reps;
    j["c_hat"] = lip.c_hat;
    j["b"] = b_max;
    j["n0"] = 1;
    j["variation_bounds_ok"] = report.variation_bounds_ok;
    j["deltas"] = nlohmann::json::array();
    for (double delta : {0.1, 0.05}) {
        double threshold = simc_concentration_threshold(n_conc, delta, constants);
        // Worst exceedance over the test functions.
        double worst = 0.0;
        for (const auto& f : fns) {
            std::size_t over = 0, total = 0;
            for (const auto& rec : report.series.records) {
                if (rec.function != f.name) continue;
                ++total;
                if (std::abs(rec.error) > threshold) ++over;
            }
            if (total > 0)
                worst = std::max(worst, static_cast<double>(over) / static_cast<double>(total));
        }
        j["deltas"].push_back({{"delta", delta},
                               {"threshold", threshold},
                               {"worst_exceedance", worst},
                               {"pass", worst <= delta}});
    }

    // Tail table: empirical exceedance against the certified-constant
    // overlay on a small threshold grid.
    std::vector<double> grid;
    double t_top = simc_concentration_threshold(n_conc, 0.05, constants);
    for (int i = 1; i <= 5; ++i) grid.push_back(t_top * i / 5.0);
    j["tail"] = nlohmann::json::array();
    bool tail_ok = true;
    for (const auto& f : fns) {
        auto tail = concentration_tail(report.series, 0, f.name, grid, constants);
        for (const auto& point : tail) {
            tail_ok = tail_ok && point.empirical <= point.bound + 1e-12;
            j["tail"].push_back({{"function", f.name},
                                 {"n", point.n},
                                 {"t", point.threshold},
                                 {"empirical", point.empirical},
                                 {"bound", point.bound}});
        }
    }
    j["tail_under_bound"] = tail_ok;
    return j;
}

nlohmann::json normalizer_summary(const ExperimentPlan& plan, const FeynmanKacModel& model,
                                  const ExactFlow& flow, const DiagnosticsSeries& series) {
    nlohmann::json j;
    const int m = model.num_levels();
    std::int64_t n_last = 0;
    for (const auto& rec : series.records)
        if (rec.function == "lognorm") n_last = std::max(n_last, rec.n);
    j["n"] = n_last;
    j["imcmc"] = nlohmann::json::array();
    for (int l = 1; l <= m; ++l) {
        std::size_t within = 0, total = 0;
        double sum = 0.0;
        for (const auto& rec : series.records) {
            if (rec.function != "lognorm" || rec.level != l || rec.n != n_last) continue;
            ++total;
            sum += rec.error;
            if (std::abs(rec.error) <= 0.05) ++within;
        }
        if (total == 0) continue;
        j["imcmc"].push_back({{"level", l},
                              {"fraction_within_0.05", static_cast<double>(within) / total},
                              {"mean_log_error", sum / static_cast<double>(total)}});
    }

    // SMC baseline: replicate mean of the unnormalized estimate against the
    // exact value, in standard-error units.
    j["smc"] = nlohmann::json::array();
    const int smc_reps = 500;
    for (std::size_t n_particles : {std::size_t{10}, std::size_t{100}}) {
        for (int l = 1; l <= m; ++l) {
            double mean = 0.0, m2 = 0.0;
            for (int r = 0; r < smc_reps; ++r) {
                ParticleRun run = smc_run(model, n_particles,
                                          Rng(plan.seed).stream("smc-study", r).next_u64());
                double v = std::exp(run.normalizer_log[l]);
                double delta = v - mean;
                mean += delta / static_cast<double>(r + 1);
                m2 += delta * (v - mean);
            }
            double sd = std::sqrt(m2 / static_cast<double>(smc_reps - 1));
            double se = sd / std::sqrt(static_cast<double>(smc_reps));
            double exact = std::exp(flow.log_gamma1[l]);
            j["smc"].push_back({{"N", n_particles},
                                {"level", l},
                                {"mean", mean},
                                {"exact", exact},
                                {"stderr", se},
                                {"within_3se", std::abs(mean - exact) <= 3.0 * se}});
        }
    }
    return j;
}

nlohmann::json stability_summary(const FeynmanKacModel& model) {
    nlohmann::json j;
    const int m = model.num_levels();
    int k_max = std::min(6, m - 1);
    StabilityProfile prof = stability_profile(model, 1, m, 0, k_max);
    j["ks"] = prof.ks;
    j["sup_beta"] = prof.sup_beta;
    j["lambda1"] = prof.lambda1;
    j["lambda2"] = std::isinf(prof.lambda2) ? 1e99 : prof.lambda2;
    j["k0"] = prof.k0;
    j["stable"] = prof.stable;

    RegularityConstants rc = mixing_constants(model, 1);
    double eps = 1.0;
    for (double e : rc.eps_l) eps = std::min(eps, e);
    j["eps_l"] = eps;
    bool envelope_ok = true;
    bool product_ok = true;
    for (int l = 1; l <= m; ++l)
        for (int k = 0; l + k <= m && k <= k_max; ++k) {
            double beta = beta_p(model, l, l + k);
            if (eps > 0.0 && beta > std::pow(1.0 - eps * eps, k) + 1e-12) envelope_ok = false;
            if (beta > contraction_bound(rc, l, l + k) + 1e-12) product_ok = false;
        }
    j["uniform_envelope_ok"] = envelope_ok;
    j["product_bound_ok"] = product_ok;
    return j;
}

nlohmann::json uniform_summary(const ExperimentPlan& plan, const FeynmanKacModel& model,
                               const DiagnosticsSeries& series) {
    nlohmann::json j;
    const int m = model.num_levels();
    StabilityProfile prof = stability_profile(model, 1, m, 0, std::min(6, m - 1));
    RegularityConstants rc = mixing_constants(model, 1);
    UniformLevelProfile up = uniform_level_profile(series, 2.0, prof, rc);
    j["fitted_exponent"] = up.fitted_exponent;
    j["predicted_alpha"] = up.predicted_alpha;
    j["alpha_over_two"] = up.predicted_alpha / 2.0;
    j["pass"] = up.fitted_exponent >= up.predicted_alpha / 2.0 - 0.15;
    j["b_aggregate"] = rc.b_aggregate;
    j["surrogate_constants"] = up.surrogate_constants;
    j["note"] = "Lambda is a surrogate (max(1,c_l)); this comparison is a consistency "
                "check, not a sharp test";
    (void)plan;
    return j;
}

DiagnosticsSeries continuous_series(const ExperimentPlan& plan,
                                    const std::vector<std::int64_t>& cps) {
    const ContinuousModel& model = *plan.continuous;
    auto obs = continuous_observables();
    ContinuousProposal prop = bilaplace_proposal();
    auto worker = [&](int rep) {
        DiagnosticsSeries s;
        auto vals = run_continuous_replicate(model, plan.continuous_kernel, prop, plan.horizon,
                                             cps, plan.seed, rep, obs);
        s.records = std::move(vals.values);
        return s;
    };
    DiagnosticsSeries raw = run_replicates_parallel(plan.replicates, worker, plan.workers);

    // Self-referenced errors: subtract the pooled cross-replicate mean at
    // the final checkpoint (no oracle exists for continuous models).
    std::int64_t n_last = 0;
    for (const auto& rec : raw.records) n_last = std::max(n_last, rec.n);
    std::map<std::pair<int, std::string>, std::pair<double, std::size_t>> ref;
    for (const auto& rec : raw.records)
        if (rec.n == n_last) {
            auto& cell = ref[{rec.level, rec.function}];
            cell.first += rec.error;
            cell.second += 1;
        }
    for (auto& rec : raw.records) {
        const auto& cell = ref.at({rec.level, rec.function});
        rec.error -= cell.first / static_cast<double>(cell.second);
    }
    return raw;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentPlan& plan) {
    for (const auto& s : plan.suites)
        if (std::find(known_suites().begin(), known_suites().end(), s) == known_suites().end())
            throw ConfigError("unknown suite '" + s + "'");

    std::vector<std::int64_t> cps = plan.checkpoints;
    if (cps.empty()) cps = dyadic_checkpoints(6, 14, plan.horizon);
    std::sort(cps.begin(), cps.end());
    cps.erase(std::unique(cps.begin(), cps.end()), cps.end());
    if (cps.empty() || cps.back() > plan.horizon)
        throw ConfigError("checkpoints must be nonempty and within the horizon");

    ExperimentResult result;
    result.summary["schema"] = "imcmc-summary/1";
    result.summary["model"] = plan.model_name;
    result.summary["kernel"] = plan.kernel_label;
    result.summary["seed"] = plan.seed;
    result.summary["horizon"] = plan.horizon;
    result.summary["replicates"] = plan.replicates;
    result.summary["checkpoints"] = cps;
    result.summary["notes"] = nlohmann::json::array();
    result.summary["notes"].push_back(
        "source reports no numerical tables; no quantitative figure reproduction applies");

    if (plan.continuous) {
        result.series = continuous_series(plan, cps);
        result.series.model_id = plan.model_name;
        result.series.kernel_id =
            plan.continuous_kernel == ContinuousKernel::DirectPhi ? "direct-phi" : "mh";
        result.series.seed = plan.seed;
        result.summary["suites"]["rates"] = rates_summary(result.series, /*basis_only=*/false);
        result.summary["notes"].push_back(
            "continuous model: errors are self-referenced to the pooled final checkpoint; "
            "exact-oracle certificates do not apply");
        return result;
    }

    if (!plan.model) throw ConfigError("experiment plan has no model");
    const FeynmanKacModel& model = *plan.model;
    model.validate();
    const int m = model.num_levels();
    if (static_cast<int>(plan.specs.size()) != m + 1)
        throw ConfigError("need one kernel spec per level");

    ExactFlow flow = solve_flow(model);
    result.exact_flow = flow;

    std::vector<std::vector<TestFunction>> basis;
    for (int k = 0; k <= m; ++k) basis.push_back(test_function_basis(model.spaces[k], plan.seed));

    bool want_path = has_suite(plan, "path-space");
    std::optional<PathTracking> path;
    if (want_path) {
        int mp = std::min(plan.path_track_levels, m);
        path = make_path_tracking(model, mp, basis, plan.seed);
    }
    bool want_norm = has_suite(plan, "normalizers");

    auto worker = [&](int rep) {
        return finite_replicate(plan, model, flow, basis, path ? &*path : nullptr, want_norm, cps,
                                rep);
    };
    result.series = run_replicates_parallel(plan.replicates, worker, plan.workers);
    result.series.model_id = plan.model_name;
    result.series.kernel_id = plan.kernel_label;
    result.series.seed = plan.seed;

    if (has_suite(plan, "rates")) result.summary["suites"]["rates"] = rates_summary(result.series);
    if (want_path) result.summary["suites"]["path-space"] = path_summary(result.series);
    if (want_norm)
        result.summary["suites"]["normalizers"] =
            normalizer_summary(plan, model, flow, result.series);
    if (has_suite(plan, "concentration"))
        result.summary["suites"]["concentration"] = concentration_summary(plan, model);
    if (has_suite(plan, "stability"))
        result.summary["suites"]["stability"] = stability_summary(model);
    if (has_suite(plan, "uniform"))
        result.summary["suites"]["uniform"] = uniform_summary(plan, model, result.series);
    return result;
}

std::string render_csv(const DiagnosticsSeries& series) {
    std::vector<const ErrorRecord*> rows;
    rows.reserve(series.records.size());
    for (const auto& r : series.records) rows.push_back(&r);
    std::sort(rows.begin(), rows.end(), [](const ErrorRecord* a, const ErrorRecord* b) {
        if (a->n != b->n) return a->n < b->n;
        if (a->level != b->level) return a->level < b->level;
        if (a->replicate != b->replicate) return a->replicate < b->replicate;
        return a->function < b->function;
    });
    std::string out = "n,level,replicate,function,error\r\n";
    char buf[64];
    for (const ErrorRecord* r : rows) {
        out += std::to_string(r->n);
        out += ',';
        out += std::to_string(r->level);
        out += ',';
        out += std::to_string(r->replicate);
        out += ',';
        out += r->function;
        out += ',';
        std::snprintf(buf, sizeof buf, "%.17g", r->error);
        out += buf;
        out += "\r\n";
    }
    return out;
}

std::string render_plot_script(const DiagnosticsSeries& series, const std::string& title) {
    std::string gp;
    gp += "# gnuplot script; aggregated RMSE curves inlined below\n";
    gp += "set title '" + title + "'\n";
    gp += "set logscale xy\nset xlabel 'n'\nset ylabel 'RMSE'\nset key outside\n";
    std::vector<std::string> plots;
    char buf[96];
    int idx = 0;
    bool basis_only = false;
    for (const auto& rec : series.records)
        if (rec.function.rfind("ind:", 0) == 0) {
            basis_only = true;
            break;
        }
    for (const auto& [level, curve] : pooled_rmse(series, basis_only)) {
        std::string block = "$level" + std::to_string(idx);
        gp += block + " << EOD\n";
        for (const auto& [n, v] : curve) {
            std::snprintf(buf, sizeof buf, "%lld %.12g\n", static_cast<long long>(n), v);
            gp += buf;
        }
        gp += "EOD\n";
        std::string name = level < 0 ? "path" : ("level " + std::to_string(level));
        plots.push_back(block + " using 1:2 with linespoints title '" + name + "'");
        ++idx;
    }
    if (plots.empty()) {
        gp += "# no curves\n";
        return gp;
    }
    gp += "plot ";
    for (std::size_t i = 0; i < plots.size(); ++i) {
        if (i) gp += ", \\\n     ";
        gp += plots[i];
    }
    gp += "\n";
    return gp;
}

void write_artifacts(const std::string& out_dir, const std::map<std::string, std::string>& files) {
    fs::path out(out_dir);
    fs::create_directories(out);
    fs::path staging = out.parent_path().empty() ? fs::path(".") : out.parent_path();
    staging /= out.filename().string() + ".staging";
    std::error_code ec;
    fs::remove_all(staging, ec);
    fs::create_directories(staging);
    for (const auto& [name, content] : files) {
        std::ofstream f(staging / name, std::ios::binary);
        if (!f) throw Error("cannot write artifact " + name);
        f.write(content.data(), static_cast<std::streamsize>(content.size()));
        f.close();
        if (!f) throw Error("short write on artifact " + name);
    }
    for (const auto& [name, content] : files) {
        (void)content;
        fs::rename(staging / name, out / name);
    }
    fs::remove_all(staging, ec);
}

}  // namespace imcmc
