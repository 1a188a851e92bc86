#include "bilap/fiber.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace bilap {

void FiberParams::validate() const {
    if (!(tau >= 0.0) || !std::isfinite(tau)) throw ParameterError("tau must be finite and non-negative");
    if (!std::isfinite(gamma)) throw ParameterError("gamma must be finite");
    if (!(radius > 0.0) || !std::isfinite(radius)) throw ParameterError("radius must be positive");
}

FormDensity fiber_density(const FiberParams& p, double r) {
    const double n2 = static_cast<double>(p.mode) * static_cast<double>(p.mode);
    const double r2 = r * r;
    const double r3 = r2 * r;
    FormDensity d;
    // |f''|^2 r + tau |f'|^2 r
    d.ss = r;
    d.dd = p.tau * r;
    // tau n^2 |f|^2 / r
    d.ff = p.tau * n2 / r;
    // 2n^2 |f'/r - f/r^2|^2 r
    d.dd += 2.0 * n2 / r;
    d.fd += -2.0 * n2 / r2;
    d.ff += 2.0 * n2 / r3;
    // |f'/r - n^2 f/r^2|^2 r
    d.dd += 1.0 / r;
    d.fd += -n2 / r2;
    d.ff += n2 * n2 / r3;
    return d;
}

double expanded_potential(const FiberParams& p, double r) {
    const double n2 = static_cast<double>(p.mode) * static_cast<double>(p.mode);
    const double r2 = r * r;
    return p.tau * n2 / r2 + (n2 * n2 - 2.0 * n2) / (r2 * r2);
}

FormDensity fiber_density_expanded(const FiberParams& p, double r) {
    const double n2 = static_cast<double>(p.mode) * static_cast<double>(p.mode);
    const double r2 = r * r;
    const double r3 = r2 * r;
    FormDensity d;
    d.ss = r;
    d.dd = p.tau * r;
    // 2n^2 |f'/r - f/r^2|^2 r
    d.dd += 2.0 * n2 / r;
    d.fd += -2.0 * n2 / r2;
    d.ff += 2.0 * n2 / r3;
    // |f'|^2 / r
    d.dd += 1.0 / r;
    // (tau n^2/r^2 + (n^4 - 2n^2)/r^4) |f|^2 r
    d.ff += expanded_potential(p, r) * r;
    return d;
}

std::array<double, 4> hermite_basis(double xi, double h, int derivative) {
    const double x2 = xi * xi;
    const double x3 = x2 * xi;
    switch (derivative) {
    case 0:
        return {1.0 - 3.0 * x2 + 2.0 * x3, h * (xi - 2.0 * x2 + x3), 3.0 * x2 - 2.0 * x3, h * (x3 - x2)};
    case 1:
        return {(6.0 * x2 - 6.0 * xi) / h, 1.0 - 4.0 * xi + 3.0 * x2, (6.0 * xi - 6.0 * x2) / h,
                3.0 * x2 - 2.0 * xi};
    case 2:
        return {(12.0 * xi - 6.0) / (h * h), (6.0 * xi - 4.0) / h, (6.0 - 12.0 * xi) / (h * h),
                (6.0 * xi - 2.0) / h};
    case 3:
        return {12.0 / (h * h * h), 6.0 / (h * h), -12.0 / (h * h * h), 6.0 / (h * h)};
    default:
        return {0.0, 0.0, 0.0, 0.0};
    }
}

// ---------------------------------------------------------------------------

HermiteProfile::HermiteProfile(TruncatedMesh mesh, std::vector<double> coefficients)
    : mesh_(std::move(mesh)), coeffs_(std::move(coefficients)) {
    if (coeffs_.size() != 2 * mesh_.node_count()) {
        throw ParameterError("HermiteProfile: need 2 coefficients per node");
    }
    coeffs_[coeffs_.size() - 2] = 0.0;
    coeffs_[coeffs_.size() - 1] = 0.0;
}

HermiteProfile HermiteProfile::interpolate(TruncatedMesh mesh, const std::function<double(double)>& f,
                                           const std::function<double(double)>& df) {
    std::vector<double> c(2 * mesh.node_count());
    for (std::size_t i = 0; i + 1 < mesh.node_count(); ++i) {
        c[2 * i] = f(mesh.node(i));
        c[2 * i + 1] = df(mesh.node(i));
    }
    return HermiteProfile(std::move(mesh), std::move(c));
}

HermiteProfile HermiteProfile::from_free(TruncatedMesh mesh, std::span<const double> free) {
    if (free.size() != 2 * mesh.element_count()) {
        throw ParameterError("HermiteProfile::from_free: size mismatch");
    }
    std::vector<double> c(free.begin(), free.end());
    c.resize(c.size() + 2, 0.0);
    return HermiteProfile(std::move(mesh), std::move(c));
}

double HermiteProfile::eval(double r, int derivative) const {
    if (r > mesh_.right()) return 0.0;
    const std::size_t e = mesh_.locate(r);
    const double h = mesh_.element_length(e);
    const double xi = std::clamp((r - mesh_.node(e)) / h, 0.0, 1.0);
    const auto basis = hermite_basis(xi, h, derivative);
    double s = 0.0;
    for (int k = 0; k < 4; ++k) s += basis[k] * coeffs_[2 * e + k];
    return s;
}

void HermiteProfile::normalize(const BandedSymMatrix& mass) {
    const double nrm2 = mass.quadratic_form(free_coefficients());
    if (!(nrm2 > 0.0)) throw ParameterError("cannot normalize a zero profile");
    double scale = 1.0 / std::sqrt(nrm2);
    const double lead = coeffs_[0] != 0.0 ? coeffs_[0] : coeffs_[1];
    if (lead < 0.0) scale = -scale;
    for (double& c : coeffs_) c *= scale;
    normalization_ = mass.quadratic_form(free_coefficients());
}

// ---------------------------------------------------------------------------

namespace {

void check_mesh(const FiberParams& p, const TruncatedMesh& mesh) {
    p.validate();
    if (std::abs(mesh.left() - p.radius) > 1e-14 * p.radius) {
        throw ParameterError("mesh left endpoint " + std::to_string(mesh.left()) +
                             " does not match radius " + std::to_string(p.radius));
    }
}

// Adds the element integrals of a density to a band matrix over the free dofs.
// Products and sums are formed in the matrix's scalar type.
template <class Matrix, class Density>
void assemble_density(const TruncatedMesh& mesh, Density&& density, Matrix& out) {
    using T = typename Matrix::value_type;
    const GaussRule rule = gauss_legendre(mesh.gauss_points());
    const std::size_t nfree = out.order();
    for (std::size_t e = 0; e < mesh.element_count(); ++e) {
        const double a = mesh.node(e);
        const double h = mesh.element_length(e);
        T local[4][4] = {};
        for (std::size_t g = 0; g < rule.points.size(); ++g) {
            const double xi = rule.points[g];
            const T w = T(rule.weights[g]) * T(h);
            const double r = a + xi * h;
            const FormDensity d = density(r);
            std::array<T, 4> v, dv, d2v;
            const auto b0 = hermite_basis(xi, h, 0);
            const auto b1 = hermite_basis(xi, h, 1);
            const auto b2 = hermite_basis(xi, h, 2);
            std::copy(b0.begin(), b0.end(), v.begin());
            std::copy(b1.begin(), b1.end(), dv.begin());
            std::copy(b2.begin(), b2.end(), d2v.begin());
            for (int i = 0; i < 4; ++i) {
                for (int j = 0; j <= i; ++j) {
                    local[i][j] += w * (T(d.ff) * v[i] * v[j] + T(d.fd) * (v[i] * dv[j] + dv[i] * v[j]) +
                                        T(d.dd) * dv[i] * dv[j] + T(d.ss) * d2v[i] * d2v[j]);
                }
            }
        }
        const std::size_t base = 2 * e;
        for (int i = 0; i < 4; ++i) {
            if (base + i >= nfree) continue;
            for (int j = 0; j <= i; ++j) out.add(base + i, base + j, local[i][j]);
        }
    }
}

template <class Matrix>
Matrix mass_matrix(const TruncatedMesh& mesh) {
    Matrix m(2 * mesh.element_count(), 3);
    assemble_density(mesh, [](double r) { return FormDensity{r, 0.0, 0.0, 0.0}; }, m);
    return m;
}

template <class Matrix>
Matrix stiffness_matrix(const FiberParams& p, const TruncatedMesh& mesh) {
    Matrix a(2 * mesh.element_count(), 3);
    assemble_density(mesh, [&](double r) { return fiber_density(p, r); }, a);
    a.add(0, 0, typename Matrix::value_type(p.gamma) * typename Matrix::value_type(p.radius));
    return a;
}

} // namespace

BandedSymMatrix assemble_mass(const TruncatedMesh& mesh) {
    return mass_matrix<BandedSymMatrix>(mesh);
}

FiberSystem assemble_fiber(const FiberParams& p, const TruncatedMesh& mesh) {
    check_mesh(p, mesh);
    return {stiffness_matrix<BandedSymMatrix>(p, mesh), mass_matrix<BandedSymMatrix>(mesh)};
}

ExtendedFiberSystem assemble_fiber_extended(const FiberParams& p, const TruncatedMesh& mesh) {
    check_mesh(p, mesh);
    return {stiffness_matrix<ExtendedBandedSymMatrix>(p, mesh), mass_matrix<ExtendedBandedSymMatrix>(mesh)};
}

BandedSymMatrix assemble_fiber_expanded(const FiberParams& p, const TruncatedMesh& mesh) {
    check_mesh(p, mesh);
    BandedSymMatrix a(2 * mesh.element_count(), 3);
    assemble_density(mesh, [&](double r) { return fiber_density_expanded(p, r); }, a);
    const double n2 = static_cast<double>(p.mode) * static_cast<double>(p.mode);
    a.add(0, 0, n2 / (p.radius * p.radius) + p.gamma * p.radius);
    return a;
}

namespace {

// Visits (r, weight, f, f', f'') at every Gauss point of the profile's mesh.
template <class Visit>
void for_each_gauss_point(const HermiteProfile& f, int order, Visit&& visit) {
    const TruncatedMesh& mesh = f.mesh();
    const GaussRule rule = gauss_legendre(order > 0 ? order : mesh.gauss_points());
    const auto c = f.coefficients();
    for (std::size_t e = 0; e < mesh.element_count(); ++e) {
        const double h = mesh.element_length(e);
        for (std::size_t g = 0; g < rule.points.size(); ++g) {
            const double xi = rule.points[g];
            double v[3] = {0.0, 0.0, 0.0};
            for (int k = 0; k < 3; ++k) {
                const auto basis = hermite_basis(xi, h, k);
                for (int j = 0; j < 4; ++j) v[k] += basis[j] * c[2 * e + j];
            }
            visit(mesh.node(e) + xi * h, rule.weights[g] * h, v[0], v[1], v[2]);
        }
    }
}

} // namespace

double fiber_form_value(const FiberParams& p, const HermiteProfile& f) {
    check_mesh(p, f.mesh());
    const double n2 = static_cast<double>(p.mode) * static_cast<double>(p.mode);
    // Summing the squares directly avoids the cancellation in x^T A x, whose
    // entries grow like h^-3 while the form stays O(1).
    double s = 0.0;
    for_each_gauss_point(f, 0, [&](double r, double w, double v, double d1, double d2) {
        const double a = d1 / r - v / (r * r);
        const double b = d1 / r - n2 * v / (r * r);
        s += w * r * (d2 * d2 + p.tau * d1 * d1 + p.tau * n2 * v * v / (r * r) + 2.0 * n2 * a * a + b * b);
    });
    const double f0 = f.coefficients()[0];
    return s + p.gamma * p.radius * f0 * f0;
}

double weighted_norm2(const HermiteProfile& f) {
    double s = 0.0;
    for_each_gauss_point(f, 0, [&](double r, double w, double v, double, double) { s += w * r * v * v; });
    return s;
}

BoundaryResidual natural_bc_residual(const HermiteProfile& f, const FiberParams& p) {
    p.validate();
    if (p.mode != 0) {
        throw UnsupportedModeError("natural boundary residuals are only available for mode 0, got " +
                                   std::to_string(p.mode));
    }
    const double R = p.radius;
    const double v = f.value(R);
    const double d1 = f.derivative(R);
    BoundaryResidual res;
    res.second_derivative = f.second_derivative(R);
    res.third_order = f.third_derivative(R) - (p.tau + 1.0 / (R * R)) * d1 + p.gamma * v;
    const double scale = std::max(std::abs(v), std::abs(d1));
    if (scale > 0.0) {
        res.relative_second = std::abs(res.second_derivative) / scale;
        res.relative_third = std::abs(res.third_order) / scale;
    }
    return res;
}

} // namespace bilap
