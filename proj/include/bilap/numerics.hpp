#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace bilap {

/// Invalid input to a constructor or operation (bad radius, empty interval, ...).
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A pivot vanished while the trailing column was still populated.
class FactorizationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The eigenvalue search could not establish a valid bracket.
class DiagnosticsError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Gauss-Legendre rule mapped to the reference interval [0, 1].
struct GaussRule {
    std::vector<double> points;
    std::vector<double> weights;
};

GaussRule gauss_legendre(int order);

/// Partition of [R, R+T] into elements, each integrated with a q-point Gauss rule.
class TruncatedMesh {
public:
    TruncatedMesh(std::vector<double> nodes, int gauss_points);

    double left() const { return nodes_.front(); }
    double right() const { return nodes_.back(); }
    double length() const { return right() - left(); }
    std::size_t node_count() const { return nodes_.size(); }
    std::size_t element_count() const { return nodes_.size() - 1; }
    int gauss_points() const { return gauss_points_; }
    std::span<const double> nodes() const { return nodes_; }
    double node(std::size_t i) const { return nodes_[i]; }
    double element_length(std::size_t e) const { return nodes_[e + 1] - nodes_[e]; }

    /// Index of the element containing r (clamped to the mesh).
    std::size_t locate(double r) const;

private:
    std::vector<double> nodes_;
    int gauss_points_;
};

/// Uniform partition of [R, R+T] into `elements` pieces.
TruncatedMesh build_mesh(double R, double T, int elements, int q = 6);

/// Partition of [R, R+T] whose element length is max(h0, growth*(r-R)):
/// uniform next to the boundary, geometric in the far field.
TruncatedMesh build_graded_mesh(double R, double T, double h0, double growth, int q = 6);

/// Bisects every element; the finite element space on the result contains the old one.
TruncatedMesh refine(const TruncatedMesh& mesh);

/// Symmetric matrix with half-bandwidth b. Only the lower band is stored,
/// column by column: entry (i, j), j <= i <= j+b, lives at j*(b+1) + (i-j).
/// Instantiated for double and long double.
template <class T>
class BasicBandedSymMatrix {
public:
    using value_type = T;

    BasicBandedSymMatrix() = default;
    BasicBandedSymMatrix(std::size_t order, std::size_t half_bandwidth);

    std::size_t order() const { return n_; }
    std::size_t half_bandwidth() const { return b_; }

    /// Symmetric read access; zero outside the band.
    T operator()(std::size_t i, std::size_t j) const;
    /// Adds v to entry (i, j) (and, implicitly, (j, i)). |i-j| must not exceed b.
    void add(std::size_t i, std::size_t j, T v);
    void set(std::size_t i, std::size_t j, T v);

    void multiply(std::span<const T> x, std::span<T> y) const;
    std::vector<T> multiply(std::span<const T> x) const;
    T quadratic_form(std::span<const T> x) const;
    T max_abs() const;

    /// this - sigma * other; both matrices must share order and bandwidth.
    BasicBandedSymMatrix shifted(T sigma, const BasicBandedSymMatrix& other) const;

    std::span<const T> band() const { return data_; }

private:
    std::size_t index(std::size_t i, std::size_t j) const { return j * (b_ + 1) + (i - j); }

    std::size_t n_ = 0;
    std::size_t b_ = 0;
    std::vector<T> data_;
};

using BandedSymMatrix = BasicBandedSymMatrix<double>;
using ExtendedBandedSymMatrix = BasicBandedSymMatrix<long double>;

extern template class BasicBandedSymMatrix<double>;
extern template class BasicBandedSymMatrix<long double>;

struct InertiaTriple {
    std::size_t negative = 0;
    std::size_t zero = 0;
    std::size_t positive = 0;

    std::size_t total() const { return negative + zero + positive; }
    friend bool operator==(const InertiaTriple&, const InertiaTriple&) = default;
};

/// Banded LDL^T factorization without pivoting.
class BandLDLT {
public:
    BandLDLT(const BandedSymMatrix& a, double zero_tol);

    const InertiaTriple& inertia() const { return inertia_; }
    std::span<const double> pivots() const { return d_; }

    /// Solves A x = rhs in place. Requires no zero pivots.
    void solve(std::span<double> rhs) const;

private:
    std::size_t n_;
    std::size_t b_;
    std::vector<double> l_; // unit lower factor, same layout as BandedSymMatrix
    std::vector<double> d_;
    InertiaTriple inertia_;
};

inline constexpr double kDefaultZeroTol = 1e-12;

/// Factors A and counts the signs of the pivots. A pivot is counted as zero when
/// |d_j| <= zero_tol * (largest magnitude in row j), both measured on the
/// symmetrically equilibrated matrix S A S, so diagonal rescaling of unknowns does not matter.
std::pair<BandLDLT, InertiaTriple> factor_inertia(const BandedSymMatrix& a,
                                                  double zero_tol = kDefaultZeroTol);

/// Number of generalized eigenvalues of (A, M) strictly below sigma.
/// Near-singular shifts are retried with sigma nudged by 1e-8*|sigma|.
std::size_t count_below(const BandedSymMatrix& a, const BandedSymMatrix& m, double sigma);

struct Eigenpair {
    double lambda = 0.0;
    std::vector<double> vector; ///< M-normalized: x^T M x = 1
    double residual = 0.0;      ///< ||Ax - lambda Mx|| / ||Ax||
    double bracket_lo = 0.0;    ///< count_below(bracket_lo) == 0
    double bracket_hi = 0.0;    ///< count_below(bracket_hi) >= 1
    int factorizations = 0;
    std::vector<std::pair<double, double>> bracket_history;
};

/// Smallest eigenvalue of the pencil (A, M) if it is negative, located by inertia
/// bisection to relative width rtol and paired with an inverse-iteration eigenvector.
/// Returns nullopt when A has no negative inertia.
std::optional<Eigenpair> smallest_eigenpair(const BandedSymMatrix& a, const BandedSymMatrix& m,
                                            double rtol);

struct RefinedEigenvector {
    std::vector<double> vector; ///< M-normalized in extended precision
    double residual = 0.0;      ///< ||Ax - rho Mx|| / ||Ax|| with rho = x^T A x
    int iterations = 0;
    bool converged = false;     ///< false when no isolated eigenvalue sits near the shift
};

/// Inverse iteration on (A - sigma M) factored in extended precision, started from x0.
/// sigma is a close estimate of the smallest eigenvalue; the iterates are sign-aligned
/// and the loop stops once successive ones differ by at most tol in the M-norm.
RefinedEigenvector extended_inverse_iteration(const ExtendedBandedSymMatrix& a, const ExtendedBandedSymMatrix& m,
                                              double sigma, std::span<const double> x0, double tol = 1e-12,
                                              int max_iterations = 16);

} // namespace bilap
