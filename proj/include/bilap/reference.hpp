#pragma once

#include "bilap/fiber.hpp"

#include <optional>
#include <stdexcept>

namespace bilap {

/// The requested oracle has no real formulation for these parameters.
class UnsupportedRegimeError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Radial (n = 0) eigenfunctions decaying at infinity are combinations of
// K0(k1 r) and K0(k2 r) with k1^2 + k2^2 = tau and k1^2 k2^2 = -lambda. For
// -tau^2/4 < lambda < 0 both k_j are real and distinct.

/// Determinant of the two radial natural boundary conditions applied to the
/// K0 pair, with each column scaled by K0(k_j R) and the whole divided by k1 - k2.
/// Requires tau > 0 and lambda in (-tau^2/4, 0).
double secular_determinant(double lambda, double tau, double gamma, double radius);

/// Most negative root of secular_determinant in (-tau^2/4, 0), or nullopt when the
/// scan finds no sign change. Throws UnsupportedRegimeError for tau <= 0.
std::optional<double> secular_lambda(double tau, double gamma, double radius);

/// Lowest negative eigenvalue from a nonconforming second-order finite-difference
/// discretization on a uniform grid of step h over [R, R+T] (T defaults to 30 R),
/// combined with the step h/2 solve by one Richardson step. nullopt if either
/// grid has no negative eigenvalue.
std::optional<double> fd_lambda(const FiberParams& p, double h, std::optional<double> T = {});

/// The same discretization without extrapolation.
std::optional<double> fd_lambda_raw(const FiberParams& p, double h, double T);

/// Energy h[u] of u(r) = exp(-r^alpha / 2) outside the disk of radius R, including the 2 pi.
double ualpha_energy(double alpha, double tau, double gamma, double radius);

/// ||u||^2 over the exterior of the disk, 2 pi int u^2 r dr.
double ualpha_norm2(double alpha, double radius);

/// Smallest alpha at which ualpha_energy turns non-negative, searched on
/// [alpha_min, alpha_max]. nullopt if the energy is non-negative already at
/// alpha_min or stays negative up to alpha_max.
std::optional<double> ualpha_threshold(double tau, double gamma, double radius, double alpha_min = 1e-8,
                                       double alpha_max = 64.0);

} // namespace bilap
