#include "bilap/reference.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

namespace bilap {

namespace {

struct RadialColumn {
    double bc1; // f''(R)
    double bc2; // f'''(R) - (tau + 1/R^2) f'(R) + gamma f(R)
};

// Boundary functionals of K0(k r) / K0(k R) at r = R.
RadialColumn radial_column(double k, double tau, double gamma, double R) {
    const double x = k * R;
    const double ratio = std::cyl_bessel_k(1.0, x) / std::cyl_bessel_k(0.0, x);
    const double d1 = -k * ratio;
    const double d2 = k * k - d1 / R;
    const double d3 = k * k * d1 - d2 / R + d1 / (R * R);
    return {d2, d3 - (tau + 1.0 / (R * R)) * d1 + gamma};
}

} // namespace

double secular_determinant(double lambda, double tau, double gamma, double radius) {
    if (!(tau > 0.0)) throw UnsupportedRegimeError("secular determinant needs tau > 0");
    const double disc = tau * tau + 4.0 * lambda;
    if (!(lambda < 0.0) || !(disc > 0.0)) {
        throw UnsupportedRegimeError("lambda outside (-tau^2/4, 0): wavenumbers are not real and distinct");
    }
    const double root = std::sqrt(disc);
    const double k1 = std::sqrt(0.5 * (tau + root));
    // tau - root loses digits when lambda is tiny; use mu1 mu2 = -lambda instead
    const double k2 = std::sqrt(-lambda / (0.5 * (tau + root)));
    const RadialColumn c1 = radial_column(k1, tau, gamma, radius);
    const RadialColumn c2 = radial_column(k2, tau, gamma, radius);
    return (c1.bc1 * c2.bc2 - c2.bc1 * c1.bc2) / (k1 - k2);
}

std::optional<double> secular_lambda(double tau, double gamma, double radius) {
    if (!(tau > 0.0)) throw UnsupportedRegimeError("secular oracle needs tau > 0 (complex wavenumbers at tau = 0)");
    if (!(radius > 0.0)) throw ParameterError("radius must be positive");
    const double scale = 0.25 * tau * tau;
    auto det = [&](double s) { return secular_determinant(-s * scale, tau, gamma, radius); };

    // s = -lambda / (tau^2/4) runs from just below 1 (lambda near -tau^2/4) toward 0
    std::vector<double> grid;
    constexpr int linear_steps = 4000;
    const double s_top = 1.0 - 1e-6;
    const double s_mid = 1e-3;
    for (int i = 0; i <= linear_steps; ++i) grid.push_back(s_top + (s_mid - s_top) * i / linear_steps);
    for (double s = s_mid * 0.9; s > 1e-14; s *= 0.9) grid.push_back(s);

    double s_prev = grid.front();
    double d_prev = det(s_prev);
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double s = grid[i];
        const double d = det(s);
        if (std::isfinite(d) && std::isfinite(d_prev) && ((d_prev < 0.0) != (d < 0.0))) {
            double hi = s_prev; // larger s, more negative lambda
            double lo = s;
            double d_hi = d_prev;
            for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double dm = det(mid);
                if ((dm < 0.0) == (d_hi < 0.0)) {
                    hi = mid;
                    d_hi = dm;
                } else {
                    lo = mid;
                }
            }
            return -0.5 * (lo + hi) * scale;
        }
        s_prev = s;
        d_prev = d;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------

std::optional<double> fd_lambda_raw(const FiberParams& p, double h, double T) {
    p.validate();
    if (!(h > 0.0) || !(T > 0.0)) throw ParameterError("fd_lambda: step and truncation must be positive");
    const auto nodes = static_cast<std::size_t>(std::llround(T / h));
    if (nodes < 8) throw ParameterError("fd_lambda: fewer than 8 grid intervals");
    const double step = T / static_cast<double>(nodes);
    const double R = p.radius;

    // unknowns: ghost f_{-1} at index 0, then f_0 .. f_{nodes-1}; f_nodes = 0
    const std::size_t order = nodes + 1;
    BandedSymMatrix a(order, 2);
    BandedSymMatrix m(order, 2);
    const double c2[3] = {1.0 / (step * step), -2.0 / (step * step), 1.0 / (step * step)};
    const double c1[3] = {-0.5 / step, 0.0, 0.5 / step};
    const double e[3] = {0.0, 1.0, 0.0};
    for (std::size_t i = 0; i < nodes; ++i) {
        const double r = R + static_cast<double>(i) * step;
        const double w = i == 0 ? 0.5 * step : step;
        const FormDensity d = fiber_density(p, r);
        for (int s = 0; s < 3; ++s) {
            const std::size_t gi = i + s;
            if (gi >= order) continue;
            for (int t = 0; t <= s; ++t) {
                const double v = d.ss * c2[s] * c2[t] + d.dd * c1[s] * c1[t] +
                                 d.fd * (e[s] * c1[t] + c1[s] * e[t]) + d.ff * e[s] * e[t];
                a.add(gi, i + t, w * v);
            }
        }
        m.add(i + 1, i + 1, w * r);
    }
    a.add(1, 1, p.gamma * R);

    // the ghost value is free, so minimize it out
    BandedSymMatrix ac(nodes, 2);
    BandedSymMatrix mc(nodes, 2);
    for (std::size_t j = 1; j < order; ++j) {
        for (std::size_t i = j; i < std::min(order, j + 3); ++i) {
            ac.set(i - 1, j - 1, a(i, j));
            mc.set(i - 1, j - 1, m(i, j));
        }
    }
    const double g = a(0, 0);
    for (std::size_t i = 1; i <= 2; ++i) {
        for (std::size_t j = 1; j <= i; ++j) ac.add(i - 1, j - 1, -a(i, 0) * a(j, 0) / g);
    }
    auto pair = smallest_eigenpair(ac, mc, 1e-12);
    if (!pair) return std::nullopt;
    return pair->lambda;
}

std::optional<double> fd_lambda(const FiberParams& p, double h, std::optional<double> T) {
    const double len = T.value_or(30.0 * p.radius);
    const auto coarse = fd_lambda_raw(p, h, len);
    const auto fine = fd_lambda_raw(p, 0.5 * h, len);
    if (!coarse || !fine) return std::nullopt;
    return (4.0 * *fine - *coarse) / 3.0;
}

// ---------------------------------------------------------------------------

namespace {

// int_c^inf w^k e^{-w} dw for small integer k
double upper_gamma_int(int k, double c) {
    double term = 1.0;
    double sum = 1.0;
    for (int j = k; j >= 1; --j) {
        term *= c / (k - j + 1);
        sum += term;
    }
    double fact = 1.0;
    for (int j = 2; j <= k; ++j) fact *= j;
    return fact * std::exp(-c) * sum;
}

} // namespace

double ualpha_energy(double alpha, double tau, double gamma, double radius) {
    if (!(alpha > 0.0)) throw ParameterError("alpha must be positive");
    if (!(tau >= 0.0)) throw ParameterError("tau must be non-negative");
    if (!(radius > 0.0)) throw ParameterError("radius must be positive");
    const double c0 = std::pow(radius, alpha);
    const double b = 1.0 - alpha;

    // with w = r^alpha, the tension part integrates in closed form
    const double tension = 0.25 * alpha * tau * (1.0 + c0) * std::exp(-c0);
    const double boundary = gamma * radius * std::exp(-c0);

    // |u''|^2 r + |u'|^2 / r, integrated in x = ln r
    auto density = [&](double x) {
        const double w = std::exp(alpha * x);
        const double q = 0.5 * alpha * w + b;
        return 0.25 * alpha * alpha * w * w * std::exp(-w - 2.0 * x) * (q * q + 1.0);
    };
    auto tail_bound = [&](double x) {
        const double c = std::exp(alpha * x);
        const double poly = 0.25 * alpha * alpha * upper_gamma_int(3, c) +
                            alpha * std::abs(b) * upper_gamma_int(2, c) + (b * b + 1.0) * upper_gamma_int(1, c);
        return std::exp(-2.0 * x) * 0.25 * alpha * poly;
    };

    using boost::math::quadrature::gauss_kronrod;
    const double step = 0.5 * std::min(1.0, 1.0 / alpha);
    double x = std::log(radius);
    double bending = 0.0;
    for (int seg = 0; seg < 1000000; ++seg) {
        bending += gauss_kronrod<double, 31>::integrate(density, x, x + step, 15, 1e-13);
        x += step;
        const double tail = tail_bound(x);
        if (tail <= 1e-10 * std::abs(bending + tension + boundary)) break;
    }
    return 2.0 * std::numbers::pi * (bending + tension + boundary);
}

double ualpha_norm2(double alpha, double radius) {
    if (!(alpha > 0.0)) throw ParameterError("alpha must be positive");
    if (!(radius > 0.0)) throw ParameterError("radius must be positive");
    try {
        return 2.0 * std::numbers::pi / alpha * boost::math::tgamma(2.0 / alpha, std::pow(radius, alpha));
    } catch (const std::overflow_error&) {
        return std::numeric_limits<double>::infinity();
    }
}

std::optional<double> ualpha_threshold(double tau, double gamma, double radius, double alpha_min,
                                       double alpha_max) {
    auto energy = [&](double a) { return ualpha_energy(a, tau, gamma, radius); };
    if (!(energy(alpha_min) < 0.0)) return std::nullopt;
    double lo = alpha_min;
    double hi = lo;
    while (true) {
        hi = lo * 1.25;
        if (hi > alpha_max) return std::nullopt;
        if (energy(hi) >= 0.0) break;
        lo = hi;
    }
    for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (energy(mid) < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

} // namespace bilap
