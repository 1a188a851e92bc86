#pragma once

#include "bilap/numerics.hpp"

#include <cstddef>
#include <istream>
#include <string>
#include <vector>

namespace bilap {

/// Support-function term a cos(k theta) + b sin(k theta), k >= 2.
struct FourierMode {
    int k = 2;
    double a = 0.0;
    double b = 0.0;
};

/// The support function has a non-positive radius of curvature somewhere.
class NonConvexError : public ParameterError {
public:
    NonConvexError(const std::string& what, double theta) : ParameterError(what), theta_(theta) {}
    double theta() const { return theta_; }

private:
    double theta_;
};

/// Convex body given by its support function h(theta) = a0 + sum a_k cos k theta + b_k sin k theta.
/// The radius of curvature rho = h + h'' and the curvature kappa = 1/rho are sampled
/// on a uniform periodic grid.
class ConvexDomain {
public:
    ConvexDomain(double a0, std::vector<FourierMode> modes, std::size_t samples = 4096);

    double a0() const { return a0_; }
    const std::vector<FourierMode>& modes() const { return modes_; }
    std::size_t samples() const { return rho_.size(); }
    double theta(std::size_t i) const;

    double support(double theta) const;
    double rho(double theta) const;
    double kappa(double theta) const { return 1.0 / rho(theta); }
    const std::vector<double>& rho_samples() const { return rho_; }
    const std::vector<double>& kappa_samples() const { return kappa_; }

    double perimeter() const { return perimeter_; }
    double min_rho() const { return min_rho_; }
    double max_rho() const { return max_rho_; }
    double min_kappa() const { return 1.0 / max_rho_; }
    double max_kappa() const { return 1.0 / min_rho_; }
    /// int kappa ds over the sampled boundary; 2 pi for any closed convex curve.
    double total_curvature() const;

private:
    double a0_;
    std::vector<FourierMode> modes_;
    std::vector<double> rho_;
    std::vector<double> kappa_;
    double perimeter_ = 0.0;
    double min_rho_ = 0.0;
    double max_rho_ = 0.0;
};

/// Validates and samples a support function; samples must be at least 1024.
ConvexDomain domain_from_support(double a0, std::vector<FourierMode> modes, std::size_t samples = 4096);

/// W(t) = int kappa/(1 + kappa t) ds = int dtheta / (rho + t), by the periodic trapezoid rule.
double curvature_weight(const ConvexDomain& d, double t);

struct ConstraintMargins {
    double curvature_margin = 0.0; ///< 1/R - max kappa
    double perimeter_excess = 0.0; ///< L - 2 pi R
    bool congruent_to_disk = false;
    /// Curvature margin non-negative up to 1e-12 / R of sampling round-off.
    bool hypothesis_satisfied = false;
};

ConstraintMargins constraint_margins(const ConvexDomain& d, double radius);

/// Reads `a0 <value>` and `coeff <k> <a> <b>` lines; '#' starts a comment.
ConvexDomain parse_domain(std::istream& in, std::size_t samples = 4096);
ConvexDomain load_domain(const std::string& path, std::size_t samples = 4096);

} // namespace bilap
