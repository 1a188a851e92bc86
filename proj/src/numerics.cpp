#include "bilap/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace bilap {

namespace {

// Legendre polynomial P_n(x) and its derivative.
std::pair<double, double> legendre(int n, double x) {
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    if (n == 0) return {1.0, 0.0};
    return {p1, n * (x * p1 - p0) / (x * x - 1.0)};
}

} // namespace

GaussRule gauss_legendre(int order) {
    if (order < 1) throw ParameterError("gauss_legendre: order must be positive");
    GaussRule rule;
    rule.points.resize(order);
    rule.weights.resize(order);
    for (int i = 0; i < (order + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
        for (int iter = 0; iter < 100; ++iter) {
            const auto [p, dp] = legendre(order, x);
            const double dx = p / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        const double dp = order == 1 ? 1.0 : legendre(order, x).second;
        const double w = 1.0 / ((1.0 - x * x) * dp * dp);
        rule.points[i] = 0.5 * (1.0 - x);
        rule.points[order - 1 - i] = 0.5 * (1.0 + x);
        rule.weights[i] = w;
        rule.weights[order - 1 - i] = w;
    }
    return rule;
}

TruncatedMesh::TruncatedMesh(std::vector<double> nodes, int gauss_points)
    : nodes_(std::move(nodes)), gauss_points_(gauss_points) {
    if (nodes_.size() < 2) throw ParameterError("mesh needs at least two nodes");
    if (gauss_points_ < 4) throw ParameterError("mesh needs at least 4 Gauss points per element");
    if (!(nodes_.front() > 0.0)) throw ParameterError("mesh left endpoint must be positive");
    for (std::size_t i = 1; i < nodes_.size(); ++i) {
        if (!(nodes_[i] > nodes_[i - 1])) throw ParameterError("mesh nodes must be strictly increasing");
    }
}

std::size_t TruncatedMesh::locate(double r) const {
    if (r <= nodes_.front()) return 0;
    if (r >= nodes_.back()) return element_count() - 1;
    auto it = std::upper_bound(nodes_.begin(), nodes_.end(), r);
    return static_cast<std::size_t>(it - nodes_.begin()) - 1;
}

TruncatedMesh build_mesh(double R, double T, int elements, int q) {
    if (!(R > 0.0)) throw ParameterError("build_mesh: R must be positive");
    if (!(T > 0.0)) throw ParameterError("build_mesh: T must be positive");
    if (elements < 4) throw ParameterError("build_mesh: need at least 4 elements");
    if (q < 4) throw ParameterError("build_mesh: need at least 4 Gauss points");
    std::vector<double> nodes(static_cast<std::size_t>(elements) + 1);
    for (int i = 0; i <= elements; ++i) nodes[i] = R + T * (static_cast<double>(i) / elements);
    nodes.back() = R + T;
    return TruncatedMesh(std::move(nodes), q);
}

TruncatedMesh build_graded_mesh(double R, double T, double h0, double growth, int q) {
    if (!(R > 0.0)) throw ParameterError("build_graded_mesh: R must be positive");
    if (!(T > 0.0)) throw ParameterError("build_graded_mesh: T must be positive");
    if (!(h0 > 0.0)) throw ParameterError("build_graded_mesh: h0 must be positive");
    if (!(growth >= 0.0)) throw ParameterError("build_graded_mesh: growth must be non-negative");
    const double end = R + T;
    if (T < 4.0 * h0) return build_mesh(R, T, 4, q);
    std::vector<double> nodes{R};
    double r = R;
    for (;;) {
        const double h = std::max(h0, growth * (r - R));
        if (end - r <= 1.5 * h) {
            nodes.push_back(end);
            break;
        }
        r += h;
        nodes.push_back(r);
    }
    if (nodes.size() < 5) return build_mesh(R, T, 4, q);
    return TruncatedMesh(std::move(nodes), q);
}

TruncatedMesh refine(const TruncatedMesh& mesh) {
    std::vector<double> nodes;
    nodes.reserve(2 * mesh.node_count() - 1);
    for (std::size_t e = 0; e < mesh.element_count(); ++e) {
        nodes.push_back(mesh.node(e));
        nodes.push_back(0.5 * (mesh.node(e) + mesh.node(e + 1)));
    }
    nodes.push_back(mesh.right());
    return TruncatedMesh(std::move(nodes), mesh.gauss_points());
}

// ---------------------------------------------------------------------------

template <class T>
BasicBandedSymMatrix<T>::BasicBandedSymMatrix(std::size_t order, std::size_t half_bandwidth)
    : n_(order), b_(half_bandwidth), data_(order * (half_bandwidth + 1), T(0)) {}

template <class T>
T BasicBandedSymMatrix<T>::operator()(std::size_t i, std::size_t j) const {
    if (i < j) std::swap(i, j);
    if (i - j > b_ || i >= n_) return T(0);
    return data_[index(i, j)];
}

template <class T>
void BasicBandedSymMatrix<T>::add(std::size_t i, std::size_t j, T v) {
    if (i < j) std::swap(i, j);
    if (i - j > b_ || i >= n_) throw ParameterError("BandedSymMatrix::add outside band");
    data_[index(i, j)] += v;
}

template <class T>
void BasicBandedSymMatrix<T>::set(std::size_t i, std::size_t j, T v) {
    if (i < j) std::swap(i, j);
    if (i - j > b_ || i >= n_) throw ParameterError("BandedSymMatrix::set outside band");
    data_[index(i, j)] = v;
}

template <class T>
void BasicBandedSymMatrix<T>::multiply(std::span<const T> x, std::span<T> y) const {
    std::fill(y.begin(), y.end(), T(0));
    for (std::size_t j = 0; j < n_; ++j) {
        const T* col = &data_[j * (b_ + 1)];
        y[j] += col[0] * x[j];
        const std::size_t last = std::min(n_ - 1, j + b_);
        for (std::size_t i = j + 1; i <= last; ++i) {
            const T a = col[i - j];
            y[i] += a * x[j];
            y[j] += a * x[i];
        }
    }
}

template <class T>
std::vector<T> BasicBandedSymMatrix<T>::multiply(std::span<const T> x) const {
    std::vector<T> y(n_);
    multiply(x, y);
    return y;
}

template <class T>
T BasicBandedSymMatrix<T>::quadratic_form(std::span<const T> x) const {
    T s = 0;
    for (std::size_t j = 0; j < n_; ++j) {
        const T* col = &data_[j * (b_ + 1)];
        T off = 0;
        const std::size_t last = std::min(n_ - 1, j + b_);
        for (std::size_t i = j + 1; i <= last; ++i) off += col[i - j] * x[i];
        s += x[j] * (col[0] * x[j] + 2 * off);
    }
    return s;
}

template <class T>
T BasicBandedSymMatrix<T>::max_abs() const {
    T m = 0;
    for (T v : data_) m = std::max(m, std::abs(v));
    return m;
}

template <class T>
BasicBandedSymMatrix<T> BasicBandedSymMatrix<T>::shifted(T sigma, const BasicBandedSymMatrix& other) const {
    if (other.n_ != n_ || other.b_ != b_) throw ParameterError("shifted: shape mismatch");
    BasicBandedSymMatrix out(n_, b_);
    for (std::size_t k = 0; k < data_.size(); ++k) out.data_[k] = data_[k] - sigma * other.data_[k];
    return out;
}

template class BasicBandedSymMatrix<double>;
template class BasicBandedSymMatrix<long double>;

// ---------------------------------------------------------------------------

BandLDLT::BandLDLT(const BandedSymMatrix& a, double zero_tol)
    : n_(a.order()), b_(a.half_bandwidth()), l_(a.band().begin(), a.band().end()), d_(n_, 0.0) {
    const std::size_t w = b_ + 1;
    // Value and slope unknowns carry different units, so zero pivots are judged on
    // the symmetrically equilibrated matrix S A S (a few Ruiz sweeps).
    std::vector<double> s(n_, 1.0);
    std::vector<double> row_scale(n_, 0.0);
    auto scaled_rows = [&] {
        std::fill(row_scale.begin(), row_scale.end(), 0.0);
        for (std::size_t j = 0; j < n_; ++j) {
            for (std::size_t i = j; i <= std::min(n_ - 1, j + b_); ++i) {
                const double v = std::abs(l_[j * w + (i - j)]) * s[i] * s[j];
                row_scale[i] = std::max(row_scale[i], v);
                row_scale[j] = std::max(row_scale[j], v);
            }
        }
    };
    for (int sweep = 0; sweep < 4; ++sweep) {
        scaled_rows();
        for (std::size_t j = 0; j < n_; ++j) {
            if (row_scale[j] > 0.0) s[j] /= std::sqrt(row_scale[j]);
        }
    }
    scaled_rows();
    // Right-looking elimination on the band; column j holds L(i, j) for i > j.
    for (std::size_t j = 0; j < n_; ++j) {
        double* col = &l_[j * w];
        const double dj = col[0];
        const std::size_t last = std::min(n_ - 1, j + b_);
        if (std::abs(dj) * s[j] * s[j] <= zero_tol * row_scale[j]) {
            for (std::size_t i = j + 1; i <= last; ++i) {
                if (std::abs(col[i - j]) * s[i] * s[j] > zero_tol * std::max(row_scale[i], row_scale[j])) {
                    throw FactorizationError("vanishing pivot with populated trailing column at row " +
                                             std::to_string(j));
                }
                col[i - j] = 0.0;
            }
            d_[j] = 0.0;
            ++inertia_.zero;
            continue;
        }
        d_[j] = dj;
        if (dj < 0.0) {
            ++inertia_.negative;
        } else {
            ++inertia_.positive;
        }
        // Schur update of the trailing block, then scale the column.
        for (std::size_t k = j + 1; k <= last; ++k) {
            const double ckj = col[k - j];
            if (ckj == 0.0) continue;
            const double f = ckj / dj;
            double* colk = &l_[k * w];
            for (std::size_t i = k; i <= last; ++i) colk[i - k] -= f * col[i - j];
        }
        for (std::size_t i = j + 1; i <= last; ++i) col[i - j] /= dj;
        col[0] = 1.0;
    }
}

void BandLDLT::solve(std::span<double> x) const {
    if (inertia_.zero != 0) throw FactorizationError("solve with a singular factorization");
    const std::size_t w = b_ + 1;
    for (std::size_t j = 0; j < n_; ++j) {
        const double xj = x[j];
        if (xj == 0.0) continue;
        const std::size_t last = std::min(n_ - 1, j + b_);
        for (std::size_t i = j + 1; i <= last; ++i) x[i] -= l_[j * w + (i - j)] * xj;
    }
    for (std::size_t j = 0; j < n_; ++j) x[j] /= d_[j];
    for (std::size_t jj = n_; jj-- > 0;) {
        const std::size_t last = std::min(n_ - 1, jj + b_);
        double s = x[jj];
        for (std::size_t i = jj + 1; i <= last; ++i) s -= l_[jj * w + (i - jj)] * x[i];
        x[jj] = s;
    }
}

std::pair<BandLDLT, InertiaTriple> factor_inertia(const BandedSymMatrix& a, double zero_tol) {
    BandLDLT f(a, zero_tol);
    InertiaTriple in = f.inertia();
    if (in.total() != a.order()) throw FactorizationError("inertia does not add up to the order");
    return {std::move(f), in};
}

namespace {

double nudge(double sigma, int attempt) {
    const double step = 1e-8 * std::max(std::abs(sigma), 1e-300) * attempt;
    return sigma + (attempt % 2 == 1 ? step : -step);
}

// Factors A - sigma*M, nudging sigma on breakdown. Returns the factorization and the
// shift actually used.
std::pair<BandLDLT, double> factor_shifted(const BandedSymMatrix& a, const BandedSymMatrix& m,
                                           double sigma) {
    double s = sigma;
    for (int attempt = 1;; ++attempt) {
        try {
            auto [f, in] = factor_inertia(a.shifted(s, m));
            if (in.zero == 0) return {std::move(f), s};
        } catch (const FactorizationError&) {
            if (attempt > 8) throw;
        }
        if (attempt > 8) throw FactorizationError("singular shift could not be perturbed away");
        s = nudge(sigma, attempt);
    }
}

double norm2(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

} // namespace

std::size_t count_below(const BandedSymMatrix& a, const BandedSymMatrix& m, double sigma) {
    return factor_shifted(a, m, sigma).first.inertia().negative;
}

std::optional<Eigenpair> smallest_eigenpair(const BandedSymMatrix& a, const BandedSymMatrix& m,
                                            double rtol) {
    if (a.order() != m.order()) throw ParameterError("smallest_eigenpair: order mismatch");
    if (!(rtol > 0.0)) throw ParameterError("smallest_eigenpair: rtol must be positive");
    Eigenpair out;
    auto count = [&](double sigma) {
        ++out.factorizations;
        return count_below(a, m, sigma);
    };
    if (count(0.0) == 0) return std::nullopt;

    double lo = -1.0;
    int expansions = 0;
    while (count(lo) > 0) {
        if (++expansions > 60) throw DiagnosticsError("no lower bracket after 60 doublings");
        lo *= 2.0;
    }
    double hi = 0.0;
    out.bracket_history.emplace_back(lo, hi);
    // Geometric steps while the bracket spans orders of magnitude, so that
    // eigenvalues many decades below |lo| are reached in logarithmic time.
    for (int iter = 0; hi - lo > rtol * std::abs(hi) || hi == 0.0; ++iter) {
        if (iter > 5000) throw DiagnosticsError("inertia bisection did not converge");
        double mid;
        if (hi == 0.0) {
            mid = lo / 16.0;
            if (mid == 0.0) throw DiagnosticsError("eigenvalue below floating-point resolution");
        } else if (lo / hi > 4.0) {
            mid = -std::sqrt(lo * hi);
        } else {
            mid = 0.5 * (lo + hi);
        }
        if (count(mid) >= 1) {
            hi = mid;
        } else {
            lo = mid;
        }
        out.bracket_history.emplace_back(lo, hi);
    }
    out.bracket_lo = lo;
    out.bracket_hi = hi;

    // Inverse iteration at the lower end of the bracket, where A - lo*M is definite.
    auto [fact, shift] = factor_shifted(a, m, lo);
    (void)shift;
    ++out.factorizations;
    const std::size_t n = a.order();
    std::vector<double> x(n, 1.0);
    std::vector<double> y(n);
    double rq_prev = 0.0;
    double rq = 0.0;
    for (int it = 0; it < 100; ++it) {
        m.multiply(x, y);
        fact.solve(y);
        const double mn = std::sqrt(m.quadratic_form(y));
        for (std::size_t i = 0; i < n; ++i) x[i] = y[i] / mn;
        rq = a.quadratic_form(x);
        if (it >= 2 && std::abs(rq - rq_prev) <= 1e-3 * rtol * std::abs(rq)) break;
        rq_prev = rq;
    }
    // The Rayleigh quotient is second-order accurate; keep it when consistent with the bracket.
    out.lambda = (rq >= lo && rq <= hi) ? rq : 0.5 * (lo + hi);
    out.vector = std::move(x);

    const auto ax = a.multiply(out.vector);
    const auto mx = m.multiply(out.vector);
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) r[i] = ax[i] - out.lambda * mx[i];
    const double nax = norm2(ax);
    out.residual = nax > 0.0 ? norm2(r) / nax : norm2(r);
    return out;
}

RefinedEigenvector extended_inverse_iteration(const ExtendedBandedSymMatrix& a, const ExtendedBandedSymMatrix& m,
                                              double sigma, std::span<const double> x0, double tol,
                                              int max_iterations) {
    using LD = long double;
    const std::size_t n = a.order();
    const std::size_t b = a.half_bandwidth();
    if (m.order() != n || x0.size() != n) throw ParameterError("extended_inverse_iteration: size mismatch");

    // Plain banded LDL^T; the shift is a close estimate of the smallest eigenvalue,
    // so at most one pivot is negative and none vanishes.
    const ExtendedBandedSymMatrix shifted = a.shifted(sigma, m);
    const std::size_t w = b + 1;
    std::vector<LD> l(shifted.band().begin(), shifted.band().end());
    for (std::size_t j = 0; j < n; ++j) {
        LD* col = &l[j * w];
        const LD dj = col[0];
        if (dj == 0 || !std::isfinite(dj)) throw FactorizationError("extended inverse iteration: singular shift");
        const std::size_t last = std::min(n - 1, j + b);
        for (std::size_t k = j + 1; k <= last; ++k) {
            const LD lkj = col[k - j] / dj;
            if (lkj == 0) continue;
            LD* ck = &l[k * w];
            for (std::size_t i = k; i <= last; ++i) ck[i - k] -= col[i - j] * lkj;
        }
        for (std::size_t i = j + 1; i <= last; ++i) col[i - j] /= dj;
    }
    auto solve = [&](std::vector<LD>& x) {
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t last = std::min(n - 1, j + b);
            for (std::size_t i = j + 1; i <= last; ++i) x[i] -= l[j * w + (i - j)] * x[j];
        }
        for (std::size_t j = 0; j < n; ++j) x[j] /= l[j * w];
        for (std::size_t jj = n; jj-- > 0;) {
            const std::size_t last = std::min(n - 1, jj + b);
            LD s = x[jj];
            for (std::size_t i = jj + 1; i <= last; ++i) s -= l[jj * w + (i - jj)] * x[i];
            x[jj] = s;
        }
    };

    std::vector<LD> x(x0.begin(), x0.end());
    std::vector<LD> y(n);
    std::vector<LD> mx(n);
    std::vector<LD> step(n);
    {
        const LD nrm = std::sqrt(m.quadratic_form(x));
        if (!(nrm > 0)) throw ParameterError("extended inverse iteration: zero start vector");
        for (LD& v : x) v /= nrm;
    }
    RefinedEigenvector out;
    for (out.iterations = 1; out.iterations <= max_iterations; ++out.iterations) {
        m.multiply(x, y);
        solve(y);
        const LD nrm = std::sqrt(m.quadratic_form(y));
        LD dot = 0;
        m.multiply(x, mx);
        for (std::size_t i = 0; i < n; ++i) dot += y[i] * mx[i];
        const LD sign = dot < 0 ? -1 : 1;
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = sign * y[i] / nrm;
            step[i] = y[i] - x[i];
        }
        x.swap(y);
        if (out.iterations >= 2 && std::sqrt(m.quadratic_form(step)) <= tol) {
            out.converged = true;
            break;
        }
    }
    out.iterations = std::min(out.iterations, max_iterations);

    const auto ax = a.multiply(x);
    m.multiply(x, mx);
    const LD rho = a.quadratic_form(x);
    LD rr = 0;
    LD aa = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const LD r = ax[i] - rho * mx[i];
        rr += r * r;
        aa += ax[i] * ax[i];
    }
    out.residual = static_cast<double>(aa > 0 ? std::sqrt(rr / aa) : std::sqrt(rr));
    out.vector.assign(x.begin(), x.end());
    return out;
}

} // namespace bilap
