#include "bilap/transplant.hpp"

#include <cmath>
#include <numbers>

namespace bilap {

double transplant_quotient(const ConvexDomain& d, const HermiteProfile& f, double tau, double gamma,
                           int quad_order) {
    if (!(tau >= 0.0)) throw ParameterError("tau must be non-negative");
    const TruncatedMesh& mesh = f.mesh();
    const GaussRule rule = gauss_legendre(quad_order > 0 ? quad_order : mesh.gauss_points());
    const auto c = f.coefficients();
    const double L = d.perimeter();
    const double R = mesh.left();
    constexpr double two_pi = 2.0 * std::numbers::pi;

    double num = 0.0;
    double den = 0.0;
    for (std::size_t e = 0; e < mesh.element_count(); ++e) {
        const double h = mesh.element_length(e);
        for (std::size_t g = 0; g < rule.points.size(); ++g) {
            const double xi = rule.points[g];
            const double w = rule.weights[g] * h;
            const double t = mesh.node(e) + xi * h - R;
            double v[3] = {0.0, 0.0, 0.0};
            for (int k = 0; k < 3; ++k) {
                const auto basis = hermite_basis(xi, h, k);
                for (int j = 0; j < 4; ++j) v[k] += basis[j] * c[2 * e + j];
            }
            const double metric = L + two_pi * t;
            num += w * ((v[2] * v[2] + tau * v[1] * v[1]) * metric + curvature_weight(d, t) * v[1] * v[1]);
            den += w * v[0] * v[0] * metric;
        }
    }
    if (!(den > 0.0)) throw ParameterError("transplant_quotient: profile is identically zero");
    num += gamma * L * c[0] * c[0];
    return num / den;
}

std::string to_string(Verdict v) {
    switch (v) {
    case Verdict::verified_strict: return "verified-strict";
    case Verdict::equality_congruent: return "equality-congruent";
    case Verdict::hypothesis_violated: return "hypothesis-violated";
    case Verdict::radiality_unknown: return "radiality-unknown";
    case Verdict::inconclusive: return "inconclusive";
    }
    return "unknown";
}

TransplantReport verify_isoperimetric(const ConvexDomain& d, double tau, double gamma, double radius,
                                      const SolverControl& ctrl) {
    TransplantReport out;
    out.tau = tau;
    out.gamma = gamma;
    out.radius = radius;
    out.margins = constraint_margins(d, radius);
    if (!out.margins.hypothesis_satisfied) {
        out.verdict = Verdict::hypothesis_violated;
        return out;
    }

    out.ground_state = ground_state(tau, gamma, radius, ctrl);
    const GroundStateReport& gs = *out.ground_state;
    out.radial = gs.classification == Classification::radial;
    const EigenResult* radial = gs.mode_result(0);
    if (!out.radial || radial == nullptr) {
        out.verdict = Verdict::radiality_unknown;
        return out;
    }

    out.disk_lambda = radial->lambda;
    out.quotient = transplant_quotient(d, radial->profile, tau, gamma);
    out.margin = *out.disk_lambda - *out.quotient;
    out.tolerance = 10.0 * ctrl.rtol * std::abs(*out.disk_lambda);

    const bool same_disk = out.margins.congruent_to_disk && std::abs(d.a0() - radius) <= 1e-12 * radius;
    if (same_disk) {
        out.verdict = Verdict::equality_congruent;
    } else if (*out.margin > out.tolerance) {
        out.verdict = Verdict::verified_strict;
    } else {
        out.verdict = Verdict::inconclusive;
    }
    return out;
}

} // namespace bilap
