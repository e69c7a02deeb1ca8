#include "imcmc/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "imcmc/rng.hpp"

namespace imcmc {

void DiagnosticsSeries::append(const DiagnosticsSeries& other) {
    records.insert(records.end(), other.records.begin(), other.records.end());
}

std::vector<TestFunction> test_function_basis(const SpacePtr& space, std::uint64_t seed) {
    std::vector<TestFunction> fns;
    const std::size_t n = space->size();
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> v(n, 0.0);
        v[i] = 1.0;
        fns.push_back({"ind:" + space->labels[i], std::move(v)});
    }
    Rng rng = Rng(seed).stream("test-function", static_cast<std::uint64_t>(space->id));
    std::vector<double> pm(n);
    for (double& x : pm) x = rng.next_u64() & 1 ? 1.0 : -1.0;
    fns.push_back({"pm1", std::move(pm)});
    return fns;
}

std::map<CurveKey, std::vector<std::pair<std::int64_t, double>>> lr_error_curve(
    const DiagnosticsSeries& series, double r) {
    if (r < 1.0) throw InvalidParameterError("lr_error_curve: r must be >= 1");
    // (level, fn, n) -> (sum |err|^r, count)
    std::map<std::pair<CurveKey, std::int64_t>, std::pair<double, std::size_t>> acc;
    std::map<CurveKey, std::set<int>> reps;
    for (const auto& rec : series.records) {
        CurveKey key{rec.level, rec.function};
        auto& cell = acc[{key, rec.n}];
        cell.first += std::pow(std::abs(rec.error), r);
        cell.second += 1;
        reps[key].insert(rec.replicate);
    }
    std::map<CurveKey, std::vector<std::pair<std::int64_t, double>>> out;
    for (const auto& [k, cell] : acc) {
        if (reps[k.first].size() < 2)
            throw InvalidParameterError("lr_error_curve: need >= 2 replicates");
        double lr = std::pow(cell.first / static_cast<double>(cell.second), 1.0 / r);
        out[k.first].emplace_back(k.second, lr);
    }
    for (auto& [k, curve] : out) std::sort(curve.begin(), curve.end());
    return out;
}

RateFit rate_fit(const std::vector<std::pair<std::int64_t, double>>& curve) {
    if (curve.size() < 5) throw InvalidDataError("rate_fit: need >= 5 checkpoints");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& [n, v] : curve) {
        if (!(v > 0.0)) throw InvalidDataError("rate_fit: nonpositive curve value");
        double x = std::log(static_cast<double>(n));
        double y = std::log(v);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double m = static_cast<double>(curve.size());
    double denom = m * sxx - sx * sx;
    if (!(denom > 0.0)) throw InvalidDataError("rate_fit: degenerate abscissae");
    RateFit fit;
    fit.slope = (m * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / m;
    double ss = 0.0;
    for (const auto& [n, v] : curve) {
        double res = std::log(v) - (fit.intercept + fit.slope * std::log(static_cast<double>(n)));
        ss += res * res;
    }
    fit.residual = std::sqrt(ss / m);
    fit.n_lo = curve.front().first;
    fit.n_hi = curve.back().first;
    return fit;
}

double mann_kendall_upward_p(const std::vector<double>& values) {
    const std::size_t n = values.size();
    if (n < 3) return 1.0;
    long long s = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            double d = values[j] - values[i];
            if (d > 0) ++s;
            else if (d < 0) --s;
        }
    double var = static_cast<double>(n) * (n - 1) * (2.0 * n + 5.0) / 18.0;
    double z;
    if (s > 0) z = (static_cast<double>(s) - 1.0) / std::sqrt(var);
    else if (s < 0) z = (static_cast<double>(s) + 1.0) / std::sqrt(var);
    else z = 0.0;
    // P(Z >= z) for the upward-trend alternative.
    return 0.5 * std::erfc(z / std::sqrt(2.0));
}

double simc_concentration_threshold(std::int64_t n, double delta,
                                    const ConcentrationConstants& constants) {
    if (!(delta > 0.0 && delta < 1.0))
        throw InvalidParameterError("concentration threshold: delta in (0,1)");
    double base = 2.0 * constants.n0 / (1.0 - constants.b);
    return base * base * std::sqrt(2.0 / static_cast<double>(n + 1)) *
           (std::sqrt(std::log(2.0 / delta)) + 2.0 * (1.0 + constants.c));
}

std::vector<TailPoint> concentration_tail(const DiagnosticsSeries& series, int level,
                                          const std::string& function,
                                          const std::vector<double>& thresholds,
                                          const ConcentrationConstants& constants) {
    std::map<std::int64_t, std::vector<double>> by_n;
    for (const auto& rec : series.records)
        if (rec.level == level && rec.function == function)
            by_n[rec.n].push_back(std::abs(rec.error));

    std::vector<TailPoint> out;
    const double base = constants.n0 / (1.0 - constants.b);
    for (const auto& [n, errs] : by_n) {
        for (double t : thresholds) {
            std::size_t count = 0;
            for (double e : errs)
                if (e > t) ++count;
            // Invert t = (2 base)^2 sqrt(2/(n+1)) (sqrt(log(2/delta)) + 2(1+c))
            // for delta; below the additive floor the bound is vacuous.
            double scale = 4.0 * base * base * std::sqrt(2.0 / static_cast<double>(n + 1));
            double arg = t / scale - 2.0 * (1.0 + constants.c);
            double bound = arg <= 0.0 ? 1.0 : std::min(1.0, 2.0 * std::exp(-arg * arg));
            out.push_back({n, t, static_cast<double>(count) / static_cast<double>(errs.size()),
                           bound});
        }
    }
    return out;
}

StabilityProfile stability_profile(const FeynmanKacModel& model, int l_min, int l_max,
                                   int k_min, int k_max) {
    if (l_min < 1 || k_min < 0 || l_max < l_min || k_max < k_min)
        throw InvalidParameterError("stability_profile: bad ranges");
    StabilityProfile prof;
    for (int k = k_min; k <= k_max; ++k) {
        double sup = 0.0;
        bool any = false;
        for (int l = l_min; l <= l_max && l + k <= model.num_levels(); ++l) {
            sup = std::max(sup, beta_p(model, l, l + k));
            any = true;
        }
        if (!any) break;
        prof.ks.push_back(k);
        prof.sup_beta.push_back(sup);
    }
    if (prof.ks.size() < 2) throw InvalidParameterError("stability_profile: range too small");

    // A tail of numerically-zero coefficients means one-step forgetting:
    // infinite decay rate (rank-one transitions land here).
    constexpr double kZeroFloor = 1e-14;
    bool all_zero_past_first = true;
    for (std::size_t i = 1; i < prof.sup_beta.size(); ++i)
        if (prof.sup_beta[i] > kZeroFloor) all_zero_past_first = false;
    if (all_zero_past_first) {
        prof.lambda1 = prof.sup_beta.empty() ? 0.0 : prof.sup_beta[0];
        prof.lambda2 = std::numeric_limits<double>::infinity();
        prof.k0 = prof.ks.size() > 1 ? prof.ks[1] : prof.ks[0];
        prof.stable = true;
        return prof;
    }

    std::vector<std::pair<std::int64_t, double>> logcurve;
    for (std::size_t i = 0; i < prof.ks.size(); ++i)
        if (prof.sup_beta[i] > kZeroFloor)
            logcurve.emplace_back(prof.ks[i], prof.sup_beta[i]);
    // Fit log beta = log lambda1 - lambda2 k on the positive part.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& [k, b] : logcurve) {
        double x = static_cast<double>(k), y = std::log(b);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    double m = static_cast<double>(logcurve.size());
    double denom = m * sxx - sx * sx;
    if (!(denom > 0.0)) {
        prof.stable = false;
        return prof;
    }
    double slope = (m * sxy - sx * sy) / denom;
    double intercept = (sy - slope * sx) / m;
    prof.lambda2 = -slope;
    prof.lambda1 = std::exp(intercept);
    prof.stable = prof.lambda2 > 1e-9;
    prof.k0 = -1;
    for (const auto& [k, b] : logcurve) {
        double fit = intercept + slope * static_cast<double>(k);
        if (std::abs(std::log(b) - fit) < std::log(1.10)) {
            prof.k0 = static_cast<int>(k);
            break;
        }
    }
    return prof;
}

UniformLevelProfile uniform_level_profile(const DiagnosticsSeries& series, double r,
                                          const StabilityProfile& stability,
                                          const RegularityConstants& constants) {
    if (!stability.stable && !(stability.lambda2 > 0.0))
        throw DependencyError("uniform_level_profile: stability profile missing or unstable");
    auto curves = lr_error_curve(series, r);
    std::set<int> levels;
    std::map<std::int64_t, double> sup;
    for (const auto& [key, curve] : curves) {
        if (key.first < 0) continue;  // skip path-space records
        // Only oscillation-bounded basis functions enter the sup.
        if (key.second.rfind("ind:", 0) != 0 && key.second != "pm1") continue;
        levels.insert(key.first);
        for (const auto& [n, v] : curve) sup[n] = std::max(sup[n], v);
    }
    if (levels.size() < 8)
        throw InvalidParameterError("uniform_level_profile: need a run covering >= 8 levels");
    UniformLevelProfile prof;
    for (const auto& [n, v] : sup) prof.sup_curve.emplace_back(n, v);
    RateFit fit = rate_fit(prof.sup_curve);
    prof.fitted_exponent = -fit.slope;
    double b = constants.b_aggregate;
    prof.b_is_one = std::abs(b - 1.0) < 1e-12;
    if (prof.b_is_one || std::isinf(stability.lambda2)) {
        prof.predicted_alpha = 1.0;  // log-corrected 1/sqrt(n) branch
    } else {
        prof.predicted_alpha = stability.lambda2 / (stability.lambda2 + std::log(b));
    }
    prof.surrogate_constants = constants.lambda_is_surrogate;
    return prof;
}

std::map<CurveKey, std::vector<std::pair<std::int64_t, double>>> path_space_error(
    const DiagnosticsSeries& series, double r) {
    DiagnosticsSeries sub;
    for (const auto& rec : series.records)
        if (rec.level == -1) sub.records.push_back(rec);
    if (sub.records.empty()) throw InvalidDataError("path_space_error: no joint records tracked");
    return lr_error_curve(sub, r);
}

}  // namespace imcmc
