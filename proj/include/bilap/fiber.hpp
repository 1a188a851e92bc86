#pragma once

#include "bilap/numerics.hpp"

#include <array>
#include <functional>
#include <span>
#include <vector>

namespace bilap {

/// Tension tau, boundary parameter gamma, disk radius R and Fourier mode n of one
/// fiber of the perturbed Robin bi-Laplacian outside the disk.
struct FiberParams {
    double tau = 0.0;
    double gamma = 0.0;
    double radius = 1.0;
    int mode = 0;

    void validate() const;
};

/// Thrown for requests outside the supported mode range (natural conditions exist for n = 0 only).
class UnsupportedModeError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Coefficients of a quadratic density in (f, f', f''):
///   ff*f^2 + 2*fd*f*f' + dd*f'^2 + ss*f''^2.
struct FormDensity {
    double ff = 0.0;
    double fd = 0.0;
    double dd = 0.0;
    double ss = 0.0;
};

/// Density (including the measure r dr) of the fiber form written as a sum of
/// squares: |f''|^2 + tau|f'|^2 + tau n^2|f|^2/r^2 + 2n^2|f'/r - f/r^2|^2 + |f'/r - n^2 f/r^2|^2.
FormDensity fiber_density(const FiberParams& p, double r);

/// Density of the same form after moving the cross term n^2 (|f|^2/r^2)' to the
/// boundary: 2n^2|f'/r - f/r^2|^2 + |f'|^2/r^2 + (tau n^2/r^2 + (n^4-2n^2)/r^4)|f|^2.
FormDensity fiber_density_expanded(const FiberParams& p, double r);

/// The zero-order coefficient tau n^2/r^2 + (n^4 - 2n^2)/r^4 of the expanded density.
double expanded_potential(const FiberParams& p, double r);

/// Piecewise-cubic C^1 profile stored as (f, f') per mesh node. The last node is
/// clamped: f = f' = 0 at R+T.
class HermiteProfile {
public:
    /// coefficients: 2 per node, (f_i, f'_i). The clamped pair is forced to zero.
    HermiteProfile(TruncatedMesh mesh, std::vector<double> coefficients);

    /// Hermite interpolant of (f, f') at every node but the clamped last one.
    static HermiteProfile interpolate(TruncatedMesh mesh, const std::function<double(double)>& f,
                                      const std::function<double(double)>& df);

    /// Builds a profile from the free degrees of freedom (everything but the clamped pair).
    static HermiteProfile from_free(TruncatedMesh mesh, std::span<const double> free);

    const TruncatedMesh& mesh() const { return mesh_; }
    std::span<const double> coefficients() const { return coeffs_; }
    std::span<const double> free_coefficients() const {
        return std::span<const double>(coeffs_).first(coeffs_.size() - 2);
    }

    double value(double r) const { return eval(r, 0); }
    double derivative(double r) const { return eval(r, 1); }
    double second_derivative(double r) const { return eval(r, 2); }
    /// Piecewise constant; taken from the element containing r (the first one at R).
    double third_derivative(double r) const { return eval(r, 3); }

    /// Weighted norm int |f|^2 r dr recorded when the profile was normalized (0 if never).
    double normalization() const { return normalization_; }
    /// Rescales to int |f|^2 r dr = 1 with f(R) >= 0 (falls back to f'(R) for the sign).
    void normalize(const BandedSymMatrix& mass);

private:
    double eval(double r, int derivative) const;

    TruncatedMesh mesh_;
    std::vector<double> coeffs_;
    double normalization_ = 0.0;
};

/// Cubic Hermite shape functions on an element of length h at local coordinate xi in [0,1],
/// differentiated `derivative` times with respect to r.
std::array<double, 4> hermite_basis(double xi, double h, int derivative);

struct FiberSystem {
    BandedSymMatrix stiffness; ///< the fiber form
    BandedSymMatrix mass;      ///< int f g r dr
};

/// Stiffness and mass matrices on the free degrees of freedom (2 per node, last node clamped).
FiberSystem assemble_fiber(const FiberParams& p, const TruncatedMesh& mesh);

struct ExtendedFiberSystem {
    ExtendedBandedSymMatrix stiffness;
    ExtendedBandedSymMatrix mass;
};

/// The same matrices accumulated in long double. In double, the entries (of size
/// r/h^3) carry round-off that moves the eigenvector once the eigenvalue is many
/// decades below them; in long double they match the sum-of-squares form closely.
ExtendedFiberSystem assemble_fiber_extended(const FiberParams& p, const TruncatedMesh& mesh);

/// Stiffness matrix of the integrated-by-parts form, with boundary term (n^2/R^2 + gamma R)|f(R)|^2.
BandedSymMatrix assemble_fiber_expanded(const FiberParams& p, const TruncatedMesh& mesh);

/// Weighted mass matrix only.
BandedSymMatrix assemble_mass(const TruncatedMesh& mesh);

/// Value of the fiber form at f, summed as squares at the Gauss points of f's mesh.
/// Equals x^T A x with A from assemble_fiber, without its round-off.
double fiber_form_value(const FiberParams& p, const HermiteProfile& f);

/// int |f|^2 r dr by the same quadrature.
double weighted_norm2(const HermiteProfile& f);

struct BoundaryResidual {
    double second_derivative = 0.0; ///< f''(R)
    double third_order = 0.0;       ///< f'''(R) - (tau + 1/R^2) f'(R) + gamma f(R)
    double relative_second = 0.0;
    double relative_third = 0.0;
};

/// Residuals of the two natural boundary conditions of the radial fiber at r = R,
/// using one-sided derivatives from the first element. Throws UnsupportedModeError for n != 0.
BoundaryResidual natural_bc_residual(const HermiteProfile& f, const FiberParams& p);

} // namespace bilap
