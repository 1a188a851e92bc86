#include "bilap/disk.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

namespace bilap {

void SolverControl::validate() const {
    if (!(rtol > 0.0 && rtol <= 1e-3)) throw ParameterError("rtol must lie in (0, 1e-3]");
    if (T0 && !(*T0 > 0.0)) throw ParameterError("T0 must be positive");
    if (!(N0 > 0.0)) throw ParameterError("N0 must be positive");
    if (!(growth >= 0.0 && growth < 1.0)) throw ParameterError("growth must lie in [0, 1)");
    if (max_doublings < 1) throw ParameterError("max_doublings must be at least 1");
    if (max_refinements < 1) throw ParameterError("max_refinements must be at least 1");
    if (n_max < 0) throw ParameterError("n_max must be non-negative");
    if (gauss_points < 4) throw ParameterError("gauss_points must be at least 4");
}

std::optional<EigenResult> solve_on_mesh(const FiberParams& p, const TruncatedMesh& mesh, double rtol) {
    const FiberSystem sys = assemble_fiber(p, mesh);
    auto pair = smallest_eigenpair(sys.stiffness, sys.mass, rtol);
    if (!pair) return std::nullopt;
    // The double bracket only supplies the shift. The eigenvector comes from the
    // long double matrices, and lambda from the sum-of-squares Rayleigh quotient,
    // whose round-off is eps/h^2 instead of the eps/h^4 of x^T A x.
    const ExtendedFiberSystem ext = assemble_fiber_extended(p, mesh);
    RefinedEigenvector refined = extended_inverse_iteration(ext.stiffness, ext.mass, pair->bracket_lo, pair->vector);
    HermiteProfile profile = HermiteProfile::from_free(mesh, refined.vector);
    profile.normalize(sys.mass);
    // Any profile's quotient bounds the lowest eigenvalue from above, so a negative value
    // certifies a bound state even when the iteration stalled on a round-off shift.
    const double lambda = fiber_form_value(p, profile) / weighted_norm2(profile);
    if (!(lambda < 0.0)) return std::nullopt;
    return EigenResult{p, lambda, std::move(profile), refined.residual, {}, false, std::nullopt};
}

namespace {

bool stable(double previous, double current, double rtol) {
    return std::abs(current - previous) <= rtol * std::abs(current);
}

} // namespace

std::optional<EigenResult> solve_fiber(const FiberParams& p, const SolverControl& ctrl) {
    p.validate();
    ctrl.validate();
    std::vector<TruncationStep> record;
    const double h0 = 1.0 / ctrl.N0;
    auto solve = [&](const TruncatedMesh& mesh) {
        auto res = solve_on_mesh(p, mesh, ctrl.rtol);
        record.push_back({mesh.length(), mesh.element_count(),
                          res ? std::optional<double>(res->lambda) : std::nullopt});
        return res;
    };

    double T = ctrl.initial_truncation(p.radius);
    auto current = solve(build_graded_mesh(p.radius, T, h0, ctrl.growth, ctrl.gauss_points));
    bool settled = false;
    for (int d = 0; d < ctrl.max_doublings; ++d) {
        T *= 2.0;
        auto next = solve(build_graded_mesh(p.radius, T, h0, ctrl.growth, ctrl.gauss_points));
        const bool ok = current && next && stable(current->lambda, next->lambda, ctrl.rtol);
        current = std::move(next);
        if (ok) {
            settled = true;
            break;
        }
    }
    if (!settled) {
        if (!current) return std::nullopt;
        throw ConvergenceError("truncation did not stabilize after " + std::to_string(ctrl.max_doublings) +
                                   " doublings",
                               record);
    }

    for (int k = 0; k < ctrl.max_refinements; ++k) {
        auto next = solve(refine(current->profile.mesh()));
        if (!next) throw ConvergenceError("bound state lost under mesh refinement", record);
        const double previous = current->lambda;
        // cubic Hermite eigenvalues converge at fourth order
        next->richardson = next->lambda + (next->lambda - previous) / 15.0;
        current = std::move(next);
        if (stable(previous, current->lambda, ctrl.rtol)) {
            current->converged = true;
            current->record = std::move(record);
            return current;
        }
    }
    throw ConvergenceError("mesh refinement did not stabilize after " +
                               std::to_string(ctrl.max_refinements) + " bisections",
                           record);
}

BoundaryResidual natural_bc_residual(const EigenResult& e, const FiberParams& p) {
    return natural_bc_residual(e.profile, p);
}

// ---------------------------------------------------------------------------

std::string to_string(Classification c) {
    switch (c) {
    case Classification::radial: return "radial";
    case Classification::non_radial: return "non-radial";
    case Classification::degenerate: return "degenerate-within-tolerance";
    case Classification::no_bound_state: return "no-bound-state";
    }
    return "unknown";
}

const EigenResult* GroundStateReport::mode_result(int n) const {
    for (const auto& m : modes) {
        if (m.mode == n) return m.result ? &*m.result : nullptr;
    }
    return nullptr;
}

std::optional<double> GroundStateReport::lambda(int n) const {
    const EigenResult* r = mode_result(n);
    return r ? std::optional<double>(r->lambda) : std::nullopt;
}

std::optional<double> GroundStateReport::lowest() const {
    return argmin_mode ? lambda(*argmin_mode) : std::nullopt;
}

void classify(GroundStateReport& report, double rtol) {
    report.argmin_mode.reset();
    double best = std::numeric_limits<double>::infinity();
    for (const auto& m : report.modes) {
        if (m.result && m.result->lambda < best) {
            best = m.result->lambda;
            report.argmin_mode = m.mode;
        }
    }
    if (!report.argmin_mode) {
        report.classification = Classification::no_bound_state;
        report.tolerance = 1e-10;
        return;
    }
    const auto lam0 = report.lambda(0);
    report.tolerance = std::max(10.0 * rtol * std::abs(lam0 ? *lam0 : best), 1e-10);
    const double tol = report.tolerance;
    if (lam0) {
        bool strictly_lowest = true;
        for (const auto& m : report.modes) {
            if (m.mode == 0 || !m.result) continue;
            if (!(*lam0 < m.result->lambda - tol)) strictly_lowest = false;
        }
        if (strictly_lowest) {
            report.classification = Classification::radial;
            return;
        }
        report.classification = best < *lam0 - tol ? Classification::non_radial : Classification::degenerate;
        return;
    }
    report.classification = Classification::non_radial;
}

GroundStateReport ground_state(double tau, double gamma, double radius, const SolverControl& ctrl) {
    ctrl.validate();
    GroundStateReport report;
    report.tau = tau;
    report.gamma = gamma;
    report.radius = radius;
    for (int n = 0; n <= ctrl.n_max; ++n) {
        try {
            report.modes.push_back({n, solve_fiber(FiberParams{tau, gamma, radius, n}, ctrl)});
        } catch (const ConvergenceError& e) {
            throw ConvergenceError("mode " + std::to_string(n) + ": " + e.what(), e.record());
        } catch (const DiagnosticsError& e) {
            throw DiagnosticsError("mode " + std::to_string(n) + ": " + e.what());
        }
    }
    classify(report, ctrl.rtol);
    return report;
}

std::vector<SweepRow> sweep(const std::vector<double>& taus, const std::vector<double>& gammas,
                            const std::vector<double>& radii, const SolverControl& ctrl, unsigned threads) {
    std::vector<SweepRow> rows;
    for (double t : taus) {
        for (double g : gammas) {
            for (double r : radii) rows.push_back(SweepRow{t, g, r, std::nullopt, {}});
        }
    }
    if (rows.empty()) return rows;
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(rows.size()));

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < rows.size(); i = next++) {
            SweepRow& row = rows[i];
            try {
                FiberParams{row.tau, row.gamma, row.radius, 0}.validate();
                row.report = ground_state(row.tau, row.gamma, row.radius, ctrl);
            } catch (const std::exception& e) {
                row.error = e.what();
            }
        }
    };
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    return rows;
}

} // namespace bilap
