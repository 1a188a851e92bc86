#include "bilap/disk.hpp"
#include "bilap/reference.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace bilap;
using oracle::rel_diff;

TEST_CASE("no bound state for gamma >= 0") {
    for (double tau : {0.0, 2.0}) {
        for (int n : {0, 1, 3}) CHECK_FALSE(solve_fiber({tau, 0.5, 1.0, n}).has_value());
    }
    CHECK_FALSE(solve_fiber({1.0, 0.5, 0.5, 0}).has_value());
}

TEST_CASE("a bound state exists for tau = 0, gamma < 0") {
    const auto r = solve_fiber({0.0, -1.0, 1.0, 0});
    REQUIRE(r);
    CHECK(r->lambda < 0.0);
    CHECK(r->converged);
}

TEST_CASE("radial fiber matches the Bessel secular oracle") {
    const auto r = solve_fiber({2.0, -1.0, 1.0, 0});
    REQUIRE(r);
    const auto s = secular_lambda(2.0, -1.0, 1.0);
    REQUIRE(s);
    CHECK(4.0 + 4.0 * *s >= 0.0);
    CHECK(rel_diff(r->lambda, *s) <= 1e-6);
}

TEST_CASE("EigenResult invariants") {
    const SolverControl ctrl;
    const FiberParams p{1.0, -1.0, 1.0, 0};
    const auto r = solve_fiber(p, ctrl);
    REQUIRE(r);
    CHECK(std::abs(weighted_norm2(r->profile) - 1.0) <= 1e-10);
    CHECK(r->profile.value(p.radius) >= 0.0);
    CHECK(r->residual < 1e-3);

    // the last two truncation doublings agree to rtol; refinements follow at fixed T
    const auto& rec = r->record;
    std::size_t first_refine = 1;
    while (first_refine < rec.size() && rec[first_refine].T != rec[first_refine - 1].T) ++first_refine;
    REQUIRE(first_refine >= 2);
    REQUIRE(first_refine < rec.size());
    const auto& a = rec[first_refine - 2];
    const auto& b = rec[first_refine - 1];
    REQUIRE(a.lambda);
    REQUIRE(b.lambda);
    CHECK(b.T == doctest::Approx(2.0 * a.T));
    CHECK(std::abs(*b.lambda - *a.lambda) <= ctrl.rtol * std::abs(*b.lambda));
    CHECK(rec.back().lambda == r->lambda);
    CHECK(r->final_truncation() == doctest::Approx(rec.back().T));
    REQUIRE(r->richardson);
    CHECK(rel_diff(*r->richardson, r->lambda) <= 1e-6);
}

TEST_CASE("refining the mesh at fixed truncation never raises lambda") {
    for (const FiberParams& p : {FiberParams{1.0, -1.0, 1.0, 0}, FiberParams{0.0, -5.0, 0.5, 0},
                                 FiberParams{4.0, -1.0, 2.0, 0}}) {
        TruncatedMesh mesh = build_graded_mesh(p.radius, 30.0 * p.radius, 0.1, 0.05);
        double previous = 0.0;
        for (int level = 0; level < 4; ++level) {
            const auto r = solve_on_mesh(p, mesh, 1e-10);
            REQUIRE(r);
            if (level > 0) CHECK(r->lambda <= previous);
            previous = r->lambda;
            mesh = refine(mesh);
        }
    }
}

TEST_CASE("radial boundary residuals shrink under mesh doubling") {
    const FiberParams p{1.0, -1.0, 1.0, 0};
    TruncatedMesh mesh = build_mesh(1.0, 30.0, 300);
    double r1 = 0.0, r2 = 0.0;
    for (int level = 0; level < 4; ++level) {
        const auto e = solve_on_mesh(p, mesh, 1e-12);
        REQUIRE(e);
        const BoundaryResidual res = natural_bc_residual(*e, p);
        if (level > 0) {
            CHECK(res.relative_second < r1);
            CHECK(res.relative_third < r2);
        }
        r1 = res.relative_second;
        r2 = res.relative_third;
        mesh = refine(mesh);
    }
}

TEST_CASE("ground_state examples") {
    const GroundStateReport radial = ground_state(1.0, -1.0, 1.0);
    CHECK(radial.classification == Classification::radial);
    REQUIRE(radial.argmin_mode);
    CHECK(*radial.argmin_mode == 0);
    CHECK(radial.modes.size() == 4);

    const GroundStateReport none = ground_state(0.0, 1.0, 1.0);
    CHECK(none.classification == Classification::no_bound_state);
    CHECK_FALSE(none.argmin_mode.has_value());

    const GroundStateReport low = ground_state(0.0, -1.0, 1.0);
    REQUIRE(low.argmin_mode);
    CHECK((*low.argmin_mode == 0 || *low.argmin_mode == 1));
    CHECK(low.tolerance == doctest::Approx(std::max(10.0 * 1e-8 * std::abs(*low.lambda(0)), 1e-10)));
}

TEST_CASE("classification rule on synthetic mode eigenvalues") {
    const auto base = solve_fiber({1.0, -1.0, 1.0, 0});
    REQUIRE(base);
    auto with = [&](double lambda) {
        EigenResult e = *base;
        e.lambda = lambda;
        return std::optional<EigenResult>(e);
    };
    GroundStateReport r;
    r.modes = {{0, with(-1.0)}, {1, with(-1.0 + 1e-12)}, {2, std::nullopt}};
    classify(r, 1e-8);
    CHECK(r.classification == Classification::degenerate);

    r.modes = {{0, with(-1.0)}, {1, with(-2.0)}};
    classify(r, 1e-8);
    CHECK(r.classification == Classification::non_radial);
    CHECK(*r.argmin_mode == 1);

    r.modes = {{0, std::nullopt}, {1, with(-2.0)}};
    classify(r, 1e-8);
    CHECK(r.classification == Classification::non_radial);

    r.modes = {{0, with(-2.0)}, {1, with(-1.0)}, {2, std::nullopt}};
    classify(r, 1e-8);
    CHECK(r.classification == Classification::radial);
    CHECK(r.tolerance == doctest::Approx(2e-7));

    CHECK(to_string(Classification::degenerate) == "degenerate-within-tolerance");
}

TEST_CASE("sweep: singleton, empty, ordering, per-row errors") {
    const auto single = sweep({1.0}, {-1.0}, {1.0});
    REQUIRE(single.size() == 1);
    REQUIRE(single[0].report);
    const GroundStateReport direct = ground_state(1.0, -1.0, 1.0);
    CHECK(single[0].report->classification == direct.classification);
    CHECK(*single[0].report->lowest() == *direct.lowest());

    CHECK(sweep({}, {-1.0}, {1.0}).empty());

    const auto rows = sweep({0.0, 1.0}, {-1.0, 1.0}, {1.0, -1.0}, {}, 2);
    REQUIRE(rows.size() == 8);
    CHECK(rows[0].tau == 0.0);
    CHECK(rows[1].radius == -1.0);
    CHECK(rows[2].gamma == 1.0);
    CHECK(rows[4].tau == 1.0);
    CHECK_FALSE(rows[1].report.has_value());
    CHECK_FALSE(rows[1].error.empty());
    CHECK(rows[0].report.has_value());
}

TEST_CASE("dilation scaling of the ground-state eigenvalue") {
    for (const auto& [tau, gamma] : {std::pair{0.0, -1.0}, std::pair{1.0, -1.0}}) {
        for (double s : {0.5, 2.0, 4.0}) {
            const auto big = solve_fiber({tau, gamma, s * 1.0, 0});
            const auto ref = solve_fiber({s * s * tau, s * s * s * gamma, 1.0, 0});
            REQUIRE(big);
            REQUIRE(ref);
            CHECK(rel_diff(big->lambda, std::pow(s, -4.0) * ref->lambda) <= 1e-6);
        }
    }
}

TEST_CASE("lambda is monotone in gamma and tau") {
    double previous = -1e300;
    for (double gamma : {-5.0, -1.0, -0.3}) {
        const auto r = solve_fiber({1.0, gamma, 1.0, 0});
        REQUIRE(r);
        CHECK(r->lambda >= previous);
        previous = r->lambda;
    }
    previous = -1e300;
    for (double tau : {0.0, 0.5, 2.0}) {
        const auto r = solve_fiber({tau, -1.0, 1.0, 0});
        REQUIRE(r);
        CHECK(r->lambda >= previous);
        previous = r->lambda;
    }
}

TEST_CASE("exhausted truncation budget raises a convergence error with the record") {
    SolverControl ctrl;
    ctrl.max_doublings = 1;
    try {
        (void)solve_fiber({2.0, -1.0, 1.0, 0}, ctrl);
        FAIL("expected ConvergenceError");
    } catch (const ConvergenceError& e) {
        CHECK(e.record().size() == 2);
    }
    ctrl.rtol = 0.0;
    CHECK_THROWS_AS(solve_fiber({2.0, -1.0, 1.0, 0}, ctrl), ParameterError);
}

TEST_CASE("very weak binding is still resolved") {
    const auto r = solve_fiber({4.0, -0.1, 0.5, 0});
    REQUIRE(r);
    CHECK(r->lambda < 0.0);
    CHECK(r->lambda > -1e-40);
    CHECK(r->final_truncation() > 1e20);
}
