#include "bilap/fiber.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace bilap;

namespace {

// Random profile with a smooth decaying envelope plus noise, so both smooth and
// rough shapes appear in the corpus.
HermiteProfile random_profile(oracle::Rng& rng, const TruncatedMesh& mesh) {
    const double decay = rng.uniform(0.2, 3.0);
    const double noise = rng.uniform(0.0, 1.0);
    std::vector<double> c(2 * mesh.node_count());
    for (std::size_t i = 0; i < mesh.node_count(); ++i) {
        const double t = mesh.node(i) - mesh.left();
        c[2 * i] = std::exp(-decay * t) * (1.0 + noise * rng.uniform(-1.0, 1.0));
        c[2 * i + 1] = -decay * std::exp(-decay * t) * (1.0 + noise * rng.uniform(-1.0, 1.0));
    }
    return HermiteProfile(mesh, std::move(c));
}

FiberParams random_params(oracle::Rng& rng) {
    return FiberParams{rng.uniform(0.0, 4.0), rng.uniform(-3.0, 0.0), rng.uniform(0.5, 2.0), rng.integer(0, 3)};
}

TruncatedMesh random_mesh(oracle::Rng& rng, double R) {
    return build_graded_mesh(R, rng.uniform(5.0, 40.0), rng.uniform(0.02, 0.1), rng.uniform(0.0, 0.05));
}

} // namespace

TEST_CASE("modes n and -n assemble bitwise identical matrices") {
    const TruncatedMesh mesh = build_mesh(1.3, 12.0, 60);
    for (int n : {1, 2, 3}) {
        const FiberSystem plus = assemble_fiber({0.7, -1.2, 1.3, n}, mesh);
        const FiberSystem minus = assemble_fiber({0.7, -1.2, 1.3, -n}, mesh);
        const auto a = plus.stiffness.band();
        const auto b = minus.stiffness.band();
        REQUIRE(a.size() == b.size());
        CHECK(std::equal(a.begin(), a.end(), b.begin()));
    }
}

TEST_CASE("the form has no negative directions when gamma = 0") {
    for (double tau : {0.0, 1.0, 4.0}) {
        for (int n = 0; n <= 3; ++n) {
            for (double R : {0.5, 1.0, 2.0}) {
                const TruncatedMesh mesh = build_graded_mesh(R, 200.0 * R, 0.025, 0.025);
                const FiberSystem sys = assemble_fiber({tau, 0.0, R, n}, mesh);
                CHECK(factor_inertia(sys.stiffness).second.negative == 0);
            }
        }
    }
}

TEST_CASE("form value of the interpolated exponential matches the closed form") {
    // f = exp(1 - r) on (1, inf): (1 + tau) * 3/4 + e^2 E1(2) + gamma
    const double tau = 1.0;
    const double gamma = -1.0;
    const double expect = 0.75 * (1.0 + tau) + std::exp(2.0) * oracle::expint_e1(2.0) + gamma;
    CHECK(expect == doctest::Approx(0.8613).epsilon(1e-4));
    // finer meshes lose digits to round-off in the assembled matrix
    const TruncatedMesh mesh = build_mesh(1.0, 40.0, 2000);
    const auto f = HermiteProfile::interpolate(
        mesh, [](double r) { return std::exp(1.0 - r); }, [](double r) { return -std::exp(1.0 - r); });
    const FiberParams p{tau, gamma, 1.0, 0};
    CHECK(fiber_form_value(p, f) == doctest::Approx(expect).epsilon(1e-8));
    const FiberSystem sys = assemble_fiber(p, mesh);
    CHECK(sys.stiffness.quadratic_form(f.free_coefficients()) == doctest::Approx(expect).epsilon(1e-8));
}

TEST_CASE("expanded assembly agrees entrywise with the sum-of-squares assembly") {
    oracle::Rng rng(3);
    for (int trial = 0; trial < 40; ++trial) {
        const FiberParams p = random_params(rng);
        const TruncatedMesh mesh = random_mesh(rng, p.radius);
        const BandedSymMatrix a = assemble_fiber(p, mesh).stiffness;
        const BandedSymMatrix b = assemble_fiber_expanded(p, mesh);
        double diff = 0.0;
        for (std::size_t k = 0; k < a.band().size(); ++k) diff = std::max(diff, std::abs(a.band()[k] - b.band()[k]));
        CHECK(diff <= 1e-12 * a.max_abs());
    }
}

TEST_CASE("extended-precision assembly agrees with the double assembly") {
    oracle::Rng rng(29);
    for (int trial = 0; trial < 20; ++trial) {
        const FiberParams p = random_params(rng);
        const TruncatedMesh mesh = random_mesh(rng, p.radius);
        const FiberSystem d = assemble_fiber(p, mesh);
        const ExtendedFiberSystem x = assemble_fiber_extended(p, mesh);
        for (std::size_t k = 0; k < d.stiffness.band().size(); ++k) {
            const double scale = std::abs(d.stiffness.band()[k]) + 1e-14 * d.stiffness.max_abs();
            CHECK(std::abs(static_cast<double>(x.stiffness.band()[k]) - d.stiffness.band()[k]) <= 1e-12 * scale);
            CHECK(static_cast<double>(x.mass.band()[k]) == doctest::Approx(d.mass.band()[k]).epsilon(1e-13));
        }
    }
}

TEST_CASE("expanded boundary term and potential") {
    const TruncatedMesh mesh = build_mesh(1.0, 10.0, 40);
    const FiberParams p0{1.0, -2.0, 1.0, 0};
    const BandedSymMatrix a = assemble_fiber_expanded(p0, mesh);
    const BandedSymMatrix a_no_gamma = assemble_fiber_expanded({1.0, 0.0, 1.0, 0}, mesh);
    CHECK(a(0, 0) - a_no_gamma(0, 0) == doctest::Approx(-2.0 * 1.0));
    CHECK(expanded_potential({0.0, -1.0, 1.0, 1}, 2.0) == doctest::Approx(-1.0 / 16.0));
}

TEST_CASE("dual-assembly identity on 100 random (params, profile) pairs") {
    oracle::Rng rng(11);
    for (int trial = 0; trial < 100; ++trial) {
        const FiberParams p = random_params(rng);
        const TruncatedMesh mesh = random_mesh(rng, p.radius);
        const HermiteProfile f = random_profile(rng, mesh);
        const double qa = assemble_fiber(p, mesh).stiffness.quadratic_form(f.free_coefficients());
        const double qb = assemble_fiber_expanded(p, mesh).quadratic_form(f.free_coefficients());
        CHECK(std::abs(qa - qb) <= 1e-10 * (1.0 + std::abs(qa)));
    }
}

TEST_CASE("fiber_form_value: zero profile, mode ordering, gamma linearity") {
    const TruncatedMesh mesh = build_mesh(1.0, 30.0, 600);
    const HermiteProfile zero(mesh, std::vector<double>(2 * mesh.node_count(), 0.0));
    CHECK(fiber_form_value({1.0, -1.0, 1.0, 0}, zero) == 0.0);

    const auto f = HermiteProfile::interpolate(
        mesh, [](double r) { return std::exp(1.0 - r); }, [](double r) { return -std::exp(1.0 - r); });
    CHECK(fiber_form_value({1.0, -1.0, 1.0, 2}, f) > fiber_form_value({1.0, -1.0, 1.0, 0}, f));

    oracle::Rng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        FiberParams p = random_params(rng);
        const TruncatedMesh m = random_mesh(rng, p.radius);
        const HermiteProfile g = random_profile(rng, m);
        const double g1 = p.gamma;
        const double g2 = rng.uniform(-3.0, 3.0);
        const double v1 = fiber_form_value(p, g);
        p.gamma = g2;
        const double v2 = fiber_form_value(p, g);
        const double f0 = g.value(p.radius);
        const double expect = (g2 - g1) * p.radius * f0 * f0;
        CHECK(std::abs((v2 - v1) - expect) <= 1e-12 * (std::abs(v1) + std::abs(v2)));
    }
}

TEST_CASE("mode monotonicity over a random profile corpus") {
    oracle::Rng rng(17);
    for (int trial = 0; trial < 100; ++trial) {
        FiberParams p = random_params(rng);
        const TruncatedMesh mesh = random_mesh(rng, p.radius);
        const HermiteProfile f = random_profile(rng, mesh);
        p.mode = 0;
        const double v0 = fiber_form_value(p, f);
        for (int n : {2, -2, 3, -3}) {
            p.mode = n;
            CHECK(fiber_form_value(p, f) > v0);
        }
        // n = +-1 is only ordered when tau >= 1/R^2
        p.tau = 1.0 / (p.radius * p.radius) + rng.uniform(0.0, 2.0);
        p.mode = 0;
        const double w0 = fiber_form_value(p, f);
        for (int n : {1, -1}) {
            p.mode = n;
            CHECK(fiber_form_value(p, f) > w0);
        }
    }
}

TEST_CASE("mass matrix is positive definite on every assembled mesh") {
    oracle::Rng rng(23);
    for (int trial = 0; trial < 30; ++trial) {
        const TruncatedMesh mesh = random_mesh(rng, rng.uniform(0.5, 2.0));
        const auto in = factor_inertia(assemble_mass(mesh)).second;
        CHECK(in.negative == 0);
        CHECK(in.zero == 0);
    }
    const TruncatedMesh far = build_graded_mesh(0.5, 1e40, 0.025, 0.025);
    const auto in = factor_inertia(assemble_mass(far)).second;
    CHECK(in.negative == 0);
    CHECK(in.zero == 0);
}

TEST_CASE("assembly rejects a mesh that does not start at R") {
    const TruncatedMesh mesh = build_mesh(1.0, 10.0, 40);
    CHECK_THROWS_AS(assemble_fiber({1.0, -1.0, 2.0, 0}, mesh), ParameterError);
    CHECK_THROWS_AS(assemble_fiber({-1.0, -1.0, 1.0, 0}, mesh), ParameterError);
}

TEST_CASE("natural boundary residuals of simple profiles") {
    const TruncatedMesh mesh = build_mesh(1.0, 4.0, 40);
    const HermiteProfile zero(mesh, std::vector<double>(2 * mesh.node_count(), 0.0));
    const BoundaryResidual z = natural_bc_residual(zero, {1.0, -1.0, 1.0, 0});
    CHECK(z.second_derivative == 0.0);
    CHECK(z.third_order == 0.0);

    const auto parabola = HermiteProfile::interpolate(
        mesh, [](double r) { return (r - 1.0) * (r - 1.0); }, [](double r) { return 2.0 * (r - 1.0); });
    CHECK(natural_bc_residual(parabola, {1.0, -1.0, 1.0, 0}).second_derivative == doctest::Approx(2.0));

    CHECK_THROWS_AS(natural_bc_residual(parabola, {1.0, -1.0, 1.0, 1}), UnsupportedModeError);
}

TEST_CASE("profile evaluation and normalization") {
    const TruncatedMesh mesh = build_mesh(1.0, 30.0, 600);
    auto f = HermiteProfile::interpolate(
        mesh, [](double r) { return -std::exp(1.0 - r); }, [](double r) { return std::exp(1.0 - r); });
    CHECK(f.value(1.5) == doctest::Approx(-std::exp(-0.5)).epsilon(1e-7));
    CHECK(f.value(40.0) == 0.0);
    f.normalize(assemble_mass(mesh));
    CHECK(f.value(1.0) > 0.0);
    CHECK(f.normalization() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(weighted_norm2(f) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(HermiteProfile(mesh, std::vector<double>(3, 0.0)), ParameterError);
}
