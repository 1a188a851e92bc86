#pragma once

#include "bilap/fiber.hpp"

#include <optional>
#include <string>
#include <vector>

namespace bilap {

/// Controls for the truncation/refinement loop of a fiber solve.
struct SolverControl {
    double rtol = 1e-8;             ///< relative stability demanded of lambda
    std::optional<double> T0;       ///< initial truncation length; defaults to 30 R
    double N0 = 40.0;               ///< elements per unit length next to the boundary
    double growth = 0.025;          ///< far-field element length as a fraction of r - R
    int max_doublings = 160;        ///< truncation doublings before giving up
    int max_refinements = 8;        ///< mesh bisections after the truncation has settled
    int n_max = 3;                  ///< highest Fourier mode scanned by ground_state
    int gauss_points = 6;

    void validate() const;
    double initial_truncation(double radius) const { return T0.value_or(30.0 * radius); }
};

struct TruncationStep {
    double T = 0.0;
    std::size_t elements = 0;
    std::optional<double> lambda;
};

/// Converged lowest eigenvalue of one fiber.
struct EigenResult {
    FiberParams params;
    double lambda = 0.0;
    HermiteProfile profile;                ///< normalized: int |f|^2 r dr = 1, f(R) >= 0
    double residual = 0.0;                 ///< ||Ax - lambda Mx|| / ||Ax|| on the final mesh
    std::vector<TruncationStep> record;    ///< every (T, N, lambda) solve, in order
    bool converged = false;
    std::optional<double> richardson;      ///< extrapolation over the last two refinements

    double final_truncation() const { return profile.mesh().length(); }
    std::size_t final_elements() const { return profile.mesh().element_count(); }
};

class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, std::vector<TruncationStep> record)
        : std::runtime_error(what), record_(std::move(record)) {}
    const std::vector<TruncationStep>& record() const { return record_; }

private:
    std::vector<TruncationStep> record_;
};

/// Smallest eigenvalue of the fiber operator if it is negative, or nullopt.
/// Doubles the truncation (keeping the boundary resolution) until lambda is stable
/// to rtol, then bisects the mesh until lambda is stable again.
std::optional<EigenResult> solve_fiber(const FiberParams& p, const SolverControl& ctrl = {});

/// Solve on a fixed mesh, without any adaptivity.
std::optional<EigenResult> solve_on_mesh(const FiberParams& p, const TruncatedMesh& mesh, double rtol);

BoundaryResidual natural_bc_residual(const EigenResult& e, const FiberParams& p);

enum class Classification { radial, non_radial, degenerate, no_bound_state };

std::string to_string(Classification c);

struct ModeEigenvalue {
    int mode = 0;
    std::optional<EigenResult> result;
};

struct GroundStateReport {
    double tau = 0.0;
    double gamma = 0.0;
    double radius = 0.0;
    std::vector<ModeEigenvalue> modes; ///< n = 0 .. n_max
    std::optional<int> argmin_mode;
    Classification classification = Classification::no_bound_state;
    double tolerance = 0.0;

    const EigenResult* mode_result(int n) const;
    std::optional<double> lambda(int n) const;
    std::optional<double> lowest() const;
};

/// Scans fibers n = 0..n_max and classifies the lowest eigenvalue.
GroundStateReport ground_state(double tau, double gamma, double radius, const SolverControl& ctrl = {});

/// Applies the classification rule to already computed mode eigenvalues.
void classify(GroundStateReport& report, double rtol);

struct SweepRow {
    double tau = 0.0;
    double gamma = 0.0;
    double radius = 0.0;
    std::optional<GroundStateReport> report;
    std::string error;
};

/// One row per (tau, gamma, radius) in tau-major order. Rows run concurrently on
/// `threads` workers (0 = hardware concurrency); a failing row records its error.
std::vector<SweepRow> sweep(const std::vector<double>& taus, const std::vector<double>& gammas,
                            const std::vector<double>& radii, const SolverControl& ctrl = {},
                            unsigned threads = 0);

} // namespace bilap
