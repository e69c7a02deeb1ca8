#include "imcmc/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace imcmc {

FiniteKernel::FiniteKernel(SpacePtr from_, SpacePtr to_, std::vector<double> rows_)
    : from(std::move(from_)), to(std::move(to_)), rows(std::move(rows_)) {
    if (rows.size() != n_from() * n_to())
        throw InvalidKernelError("kernel matrix shape does not match its spaces");
}

void FiniteKernel::validate(double tol) const {
    for (std::size_t x = 0; x < n_from(); ++x) {
        double s = 0.0;
        for (std::size_t y = 0; y < n_to(); ++y) {
            double v = at(x, y);
            if (v < 0.0)
                throw InvalidKernelError("negative entry in row " + std::to_string(x) +
                                         " ('" + from->labels[x] + "')");
            s += v;
        }
        if (std::abs(s - 1.0) > tol)
            throw InvalidKernelError("row " + std::to_string(x) + " ('" + from->labels[x] +
                                     "') sums to " + std::to_string(s));
    }
}

std::vector<double> FiniteKernel::apply(std::span<const double> f) const {
    if (f.size() != n_to()) throw SpaceMismatchError("kernel apply: function size mismatch");
    std::vector<double> out(n_from(), 0.0);
    for (std::size_t x = 0; x < n_from(); ++x) {
        double s = 0.0;
        for (std::size_t y = 0; y < n_to(); ++y) s += at(x, y) * f[y];
        out[x] = s;
    }
    return out;
}

DiscreteMeasure FiniteKernel::transport(const DiscreteMeasure& mu) const {
    require_same_space(mu.space, from, "kernel transport");
    std::vector<double> out(n_to(), 0.0);
    for (std::size_t x = 0; x < n_from(); ++x) {
        double w = mu.weights[x];
        if (w == 0.0) continue;
        for (std::size_t y = 0; y < n_to(); ++y) out[y] += w * at(x, y);
    }
    return DiscreteMeasure(to, std::move(out));
}

FiniteKernel FiniteKernel::identity(SpacePtr space) {
    std::size_t n = space->size();
    std::vector<double> rows(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) rows[i * n + i] = 1.0;
    return FiniteKernel(space, space, std::move(rows));
}

FiniteKernel FiniteKernel::rank_one(SpacePtr from, const DiscreteMeasure& row) {
    std::size_t n = from->size();
    std::vector<double> rows;
    rows.reserve(n * row.weights.size());
    for (std::size_t i = 0; i < n; ++i)
        rows.insert(rows.end(), row.weights.begin(), row.weights.end());
    return FiniteKernel(std::move(from), row.space, std::move(rows));
}

FiniteKernel FiniteKernel::compose(const FiniteKernel& a, const FiniteKernel& b) {
    require_same_space(a.to, b.from, "kernel compose");
    std::size_t n = a.n_from(), mid = a.n_to(), m = b.n_to();
    std::vector<double> rows(n * m, 0.0);
    for (std::size_t x = 0; x < n; ++x)
        for (std::size_t z = 0; z < mid; ++z) {
            double v = a.at(x, z);
            if (v == 0.0) continue;
            for (std::size_t y = 0; y < m; ++y) rows[x * m + y] += v * b.at(z, y);
        }
    return FiniteKernel(a.from, b.to, std::move(rows));
}

FiniteKernel FiniteKernel::power(const FiniteKernel& k, unsigned n) {
    require_same_space(k.from, k.to, "kernel power");
    FiniteKernel acc = identity(k.from);
    for (unsigned i = 0; i < n; ++i) acc = compose(acc, k);
    return acc;
}

double dobrushin(const FiniteKernel& kernel) {
    kernel.validate();
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

FiniteKernel metropolis_kernel(const DiscreteMeasure& target, const FiniteKernel& proposal) {
    require_same_space(target.space, proposal.from, "metropolis_kernel");
    require_same_space(target.space, proposal.to, "metropolis_kernel");
    std::size_t n = target.space->size();
    std::vector<double> rows(n * n, 0.0);
    for (std::size_t x = 0; x < n; ++x) {
        double stay = 0.0;
        for (std::size_t y = 0; y < n; ++y) {
            if (y == x) continue;
            double q_xy = proposal.at(x, y), q_yx = proposal.at(y, x);
            double flow = 0.0;
            if (q_xy > 0.0) {
                double num = target.weights[y] * q_yx;
                double den = target.weights[x] * q_xy;
                double accept = den > 0.0 ? std::min(1.0, num / den) : 1.0;
                flow = q_xy * accept;
            }
            rows[x * n + y] = flow;
            stay += flow;
        }
        rows[x * n + x] = 1.0 - stay;
    }
    return FiniteKernel(target.space, target.space, std::move(rows));
}

std::size_t PathStructure::path_index(int level, std::size_t prefix, std::size_t coord) const {
    return prefix * base_spaces.at(level)->size() + coord;
}

std::size_t PathStructure::prefix_of(int level, std::size_t path) const {
    return path / base_spaces.at(level)->size();
}

std::size_t PathStructure::coord_of(int level, std::size_t path) const {
    return path % base_spaces.at(level)->size();
}

std::size_t PathStructure::last_coord(int level, std::size_t path) const {
    return coord_of(level, path);
}

double PathStructure::reference_density(int level, std::size_t prefix, std::size_t coord) const {
    std::size_t u_last = prefix % base_spaces.at(level - 1)->size();
    return base_transitions.at(level - 1).at(u_last, coord) * base_potentials.at(level - 1)[u_last];
}

void FeynmanKacModel::validate() const {
    if (spaces.empty()) throw InvalidParameterError("model has no levels");
    const int m = num_levels();
    require_same_space(initial.space, spaces[0], "model initial distribution");
    if (!initial.is_probability(1e-9))
        throw InvalidParameterError("initial distribution is not a probability");
    if (static_cast<int>(potentials.size()) != m)
        throw InvalidParameterError("expected one potential per level 0..m-1");
    if (static_cast<int>(transitions.size()) != m)
        throw InvalidParameterError("expected one transition per level 1..m");
    for (int l = 0; l < m; ++l) {
        if (potentials[l].size() != spaces[l]->size())
            throw SpaceMismatchError("potential G_" + std::to_string(l) + " size mismatch");
        for (double g : potentials[l])
            if (!(g > 0.0))
                throw DegeneratePotentialError("condition (G) fails: G_" + std::to_string(l) +
                                               " not strictly positive");
        require_same_space(transitions[l].from, spaces[l], "model transition domain");
        require_same_space(transitions[l].to, spaces[l + 1], "model transition codomain");
        transitions[l].validate();
    }
}

FeynmanKacModel make_path_model(std::vector<SpacePtr> base_spaces,
                                DiscreteMeasure base_initial,
                                std::vector<FiniteKernel> base_transitions,
                                std::vector<std::vector<double>> base_potentials,
                                std::size_t max_points) {
    const int m = static_cast<int>(base_spaces.size()) - 1;
    if (m < 0) throw InvalidParameterError("path model needs at least one base space");

    FeynmanKacModel model;
    model.spaces.reserve(m + 1);
    std::size_t dim = 1;
    for (int l = 0; l <= m; ++l) {
        std::vector<SpacePtr> prefix(base_spaces.begin(), base_spaces.begin() + l + 1);
        if (base_spaces[l]->size() != 0 && dim > max_points / base_spaces[l]->size())
            throw TooLargeError("path space exceeds enumeration guard");
        dim *= base_spaces[l]->size();
        auto sp = product_space(prefix, max_points);
        model.spaces.push_back(StateSpace::make(l, sp->labels));
    }

    // Level-0 path space is the base space itself (singleton tuples).
    model.initial = DiscreteMeasure(model.spaces[0], base_initial.weights);

    model.potentials.resize(m);
    for (int l = 0; l < m; ++l) {
        std::size_t base_n = base_spaces[l]->size();
        std::size_t n = model.spaces[l]->size();
        model.potentials[l].resize(n);
        for (std::size_t p = 0; p < n; ++p)
            model.potentials[l][p] = base_potentials.at(l)[p % base_n];
    }

    model.transitions.reserve(m);
    for (int l = 1; l <= m; ++l) {
        std::size_t n_from = model.spaces[l - 1]->size();
        std::size_t base_n = base_spaces[l]->size();
        std::size_t n_to = model.spaces[l]->size();
        std::vector<double> rows(n_from * n_to, 0.0);
        const FiniteKernel& lt = base_transitions.at(l - 1);
        std::size_t prev_base = base_spaces[l - 1]->size();
        for (std::size_t u = 0; u < n_from; ++u) {
            std::size_t u_last = u % prev_base;
            for (std::size_t v = 0; v < base_n; ++v)
                rows[u * n_to + (u * base_n + v)] = lt.at(u_last, v);
        }
        model.transitions.emplace_back(model.spaces[l - 1], model.spaces[l], std::move(rows));
    }

    PathStructure path;
    path.base_spaces = std::move(base_spaces);
    path.base_transitions = std::move(base_transitions);
    path.base_potentials = std::move(base_potentials);
    model.path = std::move(path);
    model.validate();
    return model;
}

DiscreteMeasure phi_step(const DiscreteMeasure& mu, const FeynmanKacModel& model, int l) {
    if (l < 0 || l >= model.num_levels())
        throw InvalidParameterError("phi_step: level out of range");
    require_same_space(mu.space, model.spaces[l], "phi_step");
    DiscreteMeasure selected = boltzmann_gibbs(mu, model.potentials[l]);
    DiscreteMeasure out = model.transitions[l].transport(selected);
    out.normalize();  // keeps the unit-mass invariant tight over long flows
    return out;
}

std::vector<double> q_apply(const FeynmanKacModel& model, int l, std::span<const double> f) {
    if (l < 1 || l > model.num_levels()) throw InvalidParameterError("q_apply: level out of range");
    std::vector<double> lf = model.transition(l).apply(f);
    const auto& g = model.potentials[l - 1];
    for (std::size_t x = 0; x < lf.size(); ++x) lf[x] *= g[x];
    return lf;
}

std::vector<double> q_chain_matrix(const FeynmanKacModel& model, int l, int k) {
    if (l < 1 || k > model.num_levels() || l > k)
        throw InvalidParameterError("q_chain_matrix: invalid level range");
    // Start from Q_k applied to basis vectors and fold Q_j leftward; columns
    // of the result live on S^(k), rows on S^(l-1).
    std::size_t n_cols = model.spaces[k]->size();
    std::size_t n_rows = model.spaces[l - 1]->size();
    // rows of Q_l..Q_k product: build by composing dense matrices.
    std::vector<double> acc;  // current product Q_j..Q_k, rows on S^(j-1)
    for (int j = k; j >= l; --j) {
        const FiniteKernel& lt = model.transition(j);
        const auto& g = model.potentials[j - 1];
        std::size_t rows_j = model.spaces[j - 1]->size();
        std::size_t mid = model.spaces[j]->size();
        std::vector<double> next(rows_j * n_cols, 0.0);
        for (std::size_t x = 0; x < rows_j; ++x) {
            for (std::size_t y = 0; y < mid; ++y) {
                double q = g[x] * lt.at(x, y);
                if (q == 0.0) continue;
                if (j == k) {
                    next[x * n_cols + y] += q;
                } else {
                    const double* accrow = acc.data() + y * n_cols;
                    double* out = next.data() + x * n_cols;
                    for (std::size_t c = 0; c < n_cols; ++c) out[c] += q * accrow[c];
                }
            }
        }
        acc = std::move(next);
    }
    if (acc.size() != n_rows * n_cols) throw Error("q_chain_matrix: internal shape error");
    return acc;
}

std::vector<double> semigroup_p(const FeynmanKacModel& model, int l, int k,
                                std::span<const double> f) {
    auto q = q_chain_matrix(model, l, k);
    std::size_t n_rows = model.spaces[l - 1]->size();
    std::size_t n_cols = model.spaces[k]->size();
    if (f.size() != n_cols) throw SpaceMismatchError("semigroup_p: function size mismatch");
    std::vector<double> out(n_rows, 0.0);
    for (std::size_t x = 0; x < n_rows; ++x) {
        double num = 0.0, den = 0.0;
        for (std::size_t y = 0; y < n_cols; ++y) {
            num += q[x * n_cols + y] * f[y];
            den += q[x * n_cols + y];
        }
        if (!(den > 0.0)) throw DegeneratePotentialError("semigroup_p: Q_{l,k}(1) vanished");
        out[x] = num / den;
    }
    return out;
}

FiniteKernel p_matrix(const FeynmanKacModel& model, int l, int k) {
    auto q = q_chain_matrix(model, l, k);
    std::size_t n_rows = model.spaces[l - 1]->size();
    std::size_t n_cols = model.spaces[k]->size();
    for (std::size_t x = 0; x < n_rows; ++x) {
        double den = 0.0;
        for (std::size_t y = 0; y < n_cols; ++y) den += q[x * n_cols + y];
        if (!(den > 0.0)) throw DegeneratePotentialError("p_matrix: Q_{l,k}(1) vanished");
        for (std::size_t y = 0; y < n_cols; ++y) q[x * n_cols + y] /= den;
    }
    return FiniteKernel(model.spaces[l - 1], model.spaces[k], std::move(q));
}

std::vector<double> h_ratio(const FeynmanKacModel& model, int l, int k) {
    if (l < 1 || k < l) throw InvalidParameterError("h_ratio: need 1 <= l <= k");
    std::vector<double> ones(model.spaces[k]->size(), 1.0);
    auto qk = q_chain_matrix(model, l, k);
    std::size_t n_rows = model.spaces[l - 1]->size();
    std::size_t n_cols = model.spaces[k]->size();
    std::vector<double> num(n_rows, 0.0);
    for (std::size_t x = 0; x < n_rows; ++x)
        for (std::size_t y = 0; y < n_cols; ++y) num[x] += qk[x * n_cols + y];
    if (k == l) return num;  // Q_{l,l-1}(1) = 1 by convention
    auto qk1 = q_chain_matrix(model, l, k - 1);
    std::size_t cols1 = model.spaces[k - 1]->size();
    std::vector<double> out(n_rows);
    for (std::size_t x = 0; x < n_rows; ++x) {
        double den = 0.0;
        for (std::size_t y = 0; y < cols1; ++y) den += qk1[x * cols1 + y];
        out[x] = num[x] / den;
    }
    return out;
}

double beta_p(const FeynmanKacModel& model, int l, int k) {
    return dobrushin(p_matrix(model, l, k));
}

namespace {

// Minorization floor of a (possibly multi-step) kernel: the largest eps
// with K(x,.) >= eps K(y,.) for all x, y. 0/0 column entries impose no
// constraint and are excluded from the min.
double minorization_floor(const FiniteKernel& k) {
    double eps = 1.0;
    for (std::size_t x = 0; x < k.n_from(); ++x)
        for (std::size_t y = 0; y < k.n_from(); ++y) {
            if (x == y) continue;
            for (std::size_t z = 0; z < k.n_to(); ++z) {
                double den = k.at(y, z);
                if (den > 0.0) eps = std::min(eps, k.at(x, z) / den);
            }
        }
    return eps;
}

}  // namespace

RegularityConstants mixing_constants(const FeynmanKacModel& model, int m_window,
                                     std::optional<double> lambda_override) {
    if (m_window < 1) throw InvalidParameterError("mixing window must be >= 1");
    const int m = model.num_levels();
    RegularityConstants rc;
    rc.m_window = m_window;

    rc.eps_g.resize(m);
    for (int l = 0; l < m; ++l) {
        double lo = model.potentials[l][0], hi = lo;
        for (double g : model.potentials[l]) {
            lo = std::min(lo, g);
            hi = std::max(hi, g);
        }
        rc.eps_g[l] = lo / hi;
    }

    if (m >= m_window) {
        rc.eps_l.resize(m - m_window + 1);
        for (int l = 0; l + m_window <= m; ++l) {
            FiniteKernel step = model.transition(l + 1);
            for (int j = l + 2; j <= l + m_window; ++j)
                step = FiniteKernel::compose(step, model.transition(j));
            rc.eps_l[l] = minorization_floor(step);
        }
    }

    rc.c.assign(m + 1, 0.0);
    rc.n_l.assign(m + 1, 1);
    rc.b_l.assign(m + 1, 0.0);
    rc.lambda.assign(m + 1, 1.0);
    for (int l = 1; l <= m; ++l) {
        // Direct sampling from Phi_l: the mixing kernel is Ltilde_l on path
        // models, L_l otherwise.
        double beta_mix = model.path ? dobrushin(model.path->base_transitions.at(l - 1))
                                     : dobrushin(model.transition(l));
        rc.c[l] = beta_mix / rc.eps_g[l - 1];
        rc.lambda[l] = lambda_override ? *lambda_override : std::max(1.0, rc.c[l]);
    }
    rc.lambda_is_surrogate = !lambda_override.has_value();

    rc.a_aggregate = 1.0;  // level 0: c_0 = 0, n_0 = 1, b_0 = 0
    double sup_lambda = m >= 1 ? rc.lambda[1] : 1.0;
    for (int l = 1; l <= m; ++l) {
        double nl = static_cast<double>(rc.n_l[l]);
        double term = (1.0 + rc.c[l]) * (nl / (1.0 - rc.b_l[l])) * (nl / (1.0 - rc.b_l[l]));
        rc.a_aggregate = std::max(rc.a_aggregate, term);
        sup_lambda = std::max(sup_lambda, rc.lambda[l]);
    }
    rc.b_aggregate = 2.0 * sup_lambda;
    return rc;
}

double contraction_bound(const RegularityConstants& rc, int l, int k) {
    if (l < 1 || k < l) throw InvalidParameterError("contraction_bound: need 1 <= l <= k");
    const int m = rc.m_window;
    const int span = k - l + 1;
    const int blocks = span / m;
    double bound = 1.0;
    for (int i = 0; i < blocks; ++i) {
        int j = (l - 1) + i * m;  // minorization index of the i-th m-block
        if (j >= static_cast<int>(rc.eps_l.size())) break;
        double eps = rc.eps_l[j] * rc.eps_l[j];
        for (int t = j + 1; t < j + m; ++t) eps *= rc.eps_g.at(t);
        bound *= std::max(0.0, 1.0 - eps);
    }
    return bound;
}

double contraction_bound(const FeynmanKacModel& model, int l, int k, int m_window) {
    return contraction_bound(mixing_constants(model, m_window), l, k);
}

double contraction_bound_uniform(const RegularityConstants& constants, int l, int k) {
    if (constants.m_window != 1)
        throw InvalidParameterError("uniform contraction bound needs m_window = 1");
    if (l < 1 || k < l) throw InvalidParameterError("contraction_bound: need 1 <= l <= k");
    double eps = 1.0;
    for (double e : constants.eps_l) eps = std::min(eps, e);
    double base = 1.0 - eps * eps;
    double bound = 1.0;
    for (int i = 0; i < k - l + 1; ++i) bound *= base;
    return bound;
}

std::vector<DiscreteMeasure> time_averaged_phi(std::span<const DiscreteMeasure> flow,
                                               const FeynmanKacModel& model, int l) {
    if (l < 1 || l > model.num_levels())
        throw InvalidParameterError("time_averaged_phi: level out of range");
    std::vector<DiscreteMeasure> out;
    out.reserve(flow.size());
    std::vector<double> acc(model.spaces[l]->size(), 0.0);
    for (std::size_t n = 0; n < flow.size(); ++n) {
        DiscreteMeasure step = phi_step(flow[n], model, l - 1);
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += step.weights[i];
        std::vector<double> avg(acc.size());
        for (std::size_t i = 0; i < acc.size(); ++i) avg[i] = acc[i] / static_cast<double>(n + 1);
        out.emplace_back(model.spaces[l], std::move(avg));
    }
    return out;
}

}  // namespace imcmc
