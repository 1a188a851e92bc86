#pragma once

#include "bilap/disk.hpp"
#include "bilap/domain.hpp"

#include <optional>
#include <string>

namespace bilap {

/// Rayleigh quotient of the profile f(r), re-indexed by t = r - R and planted along
/// the outward normal of the domain:
///   [int (f''^2 + tau f'^2)(L + 2 pi t) + int W(t) f'^2 + gamma L f(0)^2] / int f^2 (L + 2 pi t).
/// quad_order = 0 uses the Gauss rule of f's mesh.
double transplant_quotient(const ConvexDomain& d, const HermiteProfile& f, double tau, double gamma,
                           int quad_order = 0);

enum class Verdict { verified_strict, equality_congruent, hypothesis_violated, radiality_unknown, inconclusive };

std::string to_string(Verdict v);

struct TransplantReport {
    double tau = 0.0;
    double gamma = 0.0;
    double radius = 0.0;
    std::optional<double> quotient;
    std::optional<double> disk_lambda;
    std::optional<double> margin; ///< disk_lambda - quotient
    bool radial = false;
    ConstraintMargins margins;
    Verdict verdict = Verdict::inconclusive;
    double tolerance = 0.0; ///< 10 rtol |disk_lambda|
    std::optional<GroundStateReport> ground_state;
};

/// Compares the quotient of the disk ground-state profile on the domain with the
/// disk eigenvalue itself. Stops early when the curvature hypothesis fails or the
/// disk ground state is not certified radial.
TransplantReport verify_isoperimetric(const ConvexDomain& d, double tau, double gamma, double radius,
                                      const SolverControl& ctrl = {});

} // namespace bilap
