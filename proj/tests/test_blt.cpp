#include <cmath>
#include <memory>

#include "doctest.h"

#include "accreg/blt.hpp"

using namespace accreg;

namespace {

std::shared_ptr<const FemSystem> make_system(int level, const Region& region,
                                             Omega0Mode mode = Omega0Mode::kTriangles,
                                             const DiskMeshOptions& opts = {}) {
    auto mesh = std::make_shared<const Mesh>(mark_omega0(disk_mesh(level, opts), region, mode));
    return std::make_shared<const FemSystem>(assemble(mesh, Coefficients::blt()));
}

double max_abs(const Vector& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

Vector diff(const Vector& a, const Vector& b) {
    Vector d = a;
    for (std::size_t i = 0; i < d.size(); ++i) d[i] -= b[i];
    return d;
}

}  // namespace

TEST_CASE("BLT operator: zero maps, residual identity") {
    auto sys = make_system(2, blt_example(1).omega0);
    const BltOperator op(sys);
    const std::size_t nb = sys->boundary.size();
    CHECK(max_abs(op.apply(Vector(op.source_dim(), 0.0))) == 0.0);
    CHECK(max_abs(op.apply_adjoint(Vector(op.data_dim(), 0.0))) == 0.0);

    const Vector g = random_vector(nb, 5);
    Vector g1(nb), g2(nb);
    for (std::size_t b = 0; b < nb; ++b) {
        g1[b] = 6.4 * (0.1 + 0.01 * g[b]);
        g2[b] = -(0.1 + 0.01 * g[b]);
    }
    const Vector y = op.data(g1, g2);
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Vector f = random_vector(op.source_dim(), 100 + seed);
        const Vector combined = op.residual(f, g1, g2);
        const Vector split = diff(op.apply(f), y);
        worst = std::max(worst, max_abs(diff(combined, split)) / max_abs(combined));
    }
    CHECK(worst <= 1e-10);
}

TEST_CASE("BLT adjoint and self-adjointness") {
    SUBCASE("triangle-based source region gives the exact discrete adjoint") {
        auto sys = make_system(2, blt_example(1).omega0);
        const BltOperator op(sys);
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            const Vector f = random_vector(op.source_dim(), seed);
            const Vector v = random_vector(op.data_dim(), 50 + seed);
            CHECK(adjoint_defect(op, f, v) <= 1e-9);
        }
    }
    SUBCASE("whole domain: K is self-adjoint") {
        for (Omega0Mode mode : {Omega0Mode::kTriangles, Omega0Mode::kNodal}) {
            auto sys = make_system(2, Region::whole(), mode);
            const BltOperator op(sys);
            REQUIRE(op.source_dim() == op.data_dim());
            const Vector f = random_vector(op.source_dim(), 1);
            const Vector q = random_vector(op.source_dim(), 2);
            const double lhs = op.data_inner().dot(op.apply(f), q);
            const double rhs = op.data_inner().dot(f, op.apply(q));
            CHECK(std::abs(lhs - rhs) <=
                  1e-9 * op.data_inner().norm(f) * op.data_inner().norm(q));
        }
    }
    SUBCASE("nodal source region: consistency defect decreases with h") {
        double first = 0.0, last = 0.0;
        for (int level = 0; level <= 3; ++level) {
            auto sys = make_system(level, blt_example(1).omega0, Omega0Mode::kNodal);
            const BltOperator op(sys);
            const Vector f = interpolate_omega0(*sys, [](const Point& p) { return 1.0 + p.x; });
            const Vector v = interpolate(*sys->mesh, [](const Point& p) { return p.y * p.y; });
            const double d = adjoint_defect(op, f, v);
            if (level == 0) first = d;
            last = d;
        }
        CHECK(last < 0.25 * first);
    }
}

TEST_CASE("assembled operator is compact") {
    auto sys = make_system(1, Region::whole());
    const BltOperator op(sys);
    const Eigen::VectorXd sv = weighted_singular_values(op);
    REQUIRE(sv.size() >= 20);
    for (Eigen::Index i = 1; i < sv.size(); ++i) CHECK(sv(i) <= sv(i - 1));
    CHECK(sv(19) < 1e-2 * sv(0));
    // The largest singular value is the operator norm.
    CHECK(estimate_norm(op, 300) == doctest::Approx(sv(0)).epsilon(1e-6));
}

TEST_CASE("measurement simulation") {
    const BltExample ex = blt_example(1);
    auto sys = make_system(1, ex.omega0);
    const BltOperator op(sys);
    const Vector f = interpolate_omega0(*sys, ex.source);
    const double two_a = 2.0 * sys->coeff.robin_a;

    SUBCASE("exact data on the same mesh") {
        const BoundaryData d = simulate_measurements(*sys, f, op, NoiseSpec{0.0, 1});
        CHECK(d.inverse_crime);
        CHECK(d.delta == 0.0);
        const Vector u = solve_robin(*sys, f, Vector(sys->boundary.size(), 0.0));
        const Vector trace = sys->restrict_boundary(u);
        for (std::size_t b = 0; b < trace.size(); ++b) {
            CHECK(d.g1[b] == doctest::Approx(trace[b]).epsilon(1e-12));
            CHECK(d.g2[b] == -d.g[b]);
        }
        // The same forward solve is consistent with K.
        const Vector r = op.residual(f, d.g1, d.g2);
        CHECK(op.data_inner().norm(r) <= 1e-8 * op.data_inner().norm(op.data(d.g1, d.g2)));
    }
    SUBCASE("dark environment and reproducible noise") {
        auto fine = make_system(3, ex.omega0);
        const Vector f_fine = interpolate_omega0(*fine, ex.source);
        const BoundaryData a = simulate_measurements(*fine, f_fine, op, NoiseSpec{0.05, 7});
        const BoundaryData b = simulate_measurements(*fine, f_fine, op, NoiseSpec{0.05, 7});
        const BoundaryData c = simulate_measurements(*fine, f_fine, op, NoiseSpec{0.05, 8});
        CHECK(!a.inverse_crime);
        CHECK(a.delta > 0.0);
        CHECK(a.delta == b.delta);
        CHECK(a.delta != c.delta);
        for (std::size_t k = 0; k < a.g1.size(); ++k) CHECK(a.g1[k] == -two_a * a.g2[k]);
        double rel = 0.0;
        for (std::size_t k = 0; k < a.g.size(); ++k)
            rel = std::max(rel, std::abs(a.g[k] / a.g_exact[k] - 1.0));
        CHECK(rel <= 0.05);
        // Model error between the two discretizations stays well below the data.
        const Vector y = op.data(a.g1, a.g2);
        const BoundaryData exact = simulate_measurements(*fine, f_fine, op, NoiseSpec{0.0, 7});
        const Vector r = op.residual(f, exact.g1, exact.g2);
        CHECK(op.data_inner().norm(r) <= 5e-3 * op.data_inner().norm(y));
    }
    SUBCASE("inverse crime flag follows the element ratio") {
        auto mid = make_system(2, ex.omega0);
        const Vector f_mid = interpolate_omega0(*mid, ex.source);
        CHECK(!simulate_measurements(*mid, f_mid, op, NoiseSpec{}).inverse_crime);
    }
}

TEST_CASE("relative error and step size estimates") {
    auto sys = make_system(1, blt_example(1).omega0);
    const Vector ft = interpolate_omega0(*sys, blt_example(1).source);
    CHECK(relative_error(*sys, ft, ft) == 0.0);
    CHECK(relative_error(*sys, Vector(ft.size(), 0.0), ft) == doctest::Approx(1.0));
    Vector twice = ft;
    for (double& x : twice) x *= 2.0;
    CHECK(relative_error(*sys, twice, ft) == doctest::Approx(1.0));
    CHECK_THROWS_AS(relative_error(*sys, ft, Vector(ft.size(), 0.0)), std::invalid_argument);

    const BltOperator op(sys);
    const double w = omega_norm(op, 300);
    CHECK(w > 0.0);
    // One power step from the constant already bounds 1/||K||^2 from above.
    CHECK(omega_norm_one_step(op) >= w * (1.0 - 1e-9));
    CHECK(omega_norm_one_step(op) <= 1.5 * w);
}

TEST_CASE("initial guess already within the discrepancy band is flagged") {
    const BltExample ex = blt_example(1);
    auto sys = make_system(2, ex.omega0);
    const BltOperator op(sys);
    const Vector ft = interpolate_omega0(*sys, ex.source);
    const BoundaryData d = simulate_measurements(*sys, ft, op, NoiseSpec{1e-3, 3});
    const Vector y = op.data(d.g1, d.g2);
    SchemeParams p;
    p.step_check = StepCheck::kNone;
    p.dt = 0.125;
    const RunRecord rec = reconstruct(op, y, Method::kArm, p,
                                      StoppingRule::discrepancy(1.01, d.delta), ft, ft);
    CHECK(rec.k_star == 0);
    CHECK(rec.stopped_by == StopReason::kInitialBelowThreshold);
}

TEST_CASE("source condition fixture: error decreases with the noise level") {
    BltFixtureOptions o;
    o.mesh = DiskMeshOptions{};
    o.level = 2;
    o.data_level = 4;
    BltFixture fx = make_blt_fixture(o);
    // Exact data from the reconstruction mesh, so that delta is the only
    // data error.
    fx.g_exact = measure_flux(*fx.sys, fx.f_true, *fx.sys);

    Vector v = fx.op->apply(fx.f_true);
    const double scale =
        fx.op->source_inner().norm(fx.f_true) /
        fx.op->source_inner().norm(fx.op->apply_adjoint(v));
    for (double& x : v) x *= scale;
    const Vector f0 = source_condition_start(*fx.op, fx.f_true, v);
    CHECK(relative_error(*fx.sys, f0, fx.f_true) == doctest::Approx(1.0).epsilon(1e-9));

    SchemeParams p;
    p.step_check = StepCheck::kNone;
    p.dt = 0.125;
    Vector errors;
    for (double dp : {0.1, 0.01, 0.001}) {
        set_noise(fx, NoiseSpec{dp, 1});
        const RunRecord rec = reconstruct(*fx.op, fx.y_delta, Method::kArm, p,
                                          StoppingRule::discrepancy(1.0, fx.data.delta), f0,
                                          fx.f_true);
        CHECK(rec.stopped_by == StopReason::kDiscrepancy);
        errors.push_back(rec.final_error());
    }
    for (std::size_t i = 1; i < errors.size(); ++i) CHECK(errors[i] <= 1.2 * errors[i - 1]);
    CHECK(errors.back() < errors.front());
}

TEST_CASE("example presets") {
    const BltExample one = blt_example(1), two = blt_example(2);
    CHECK(one.tau == 1.0);
    CHECK(one.dt == 0.125);
    CHECK(two.tau == 5.0);
    CHECK(two.dt == 0.25);
    CHECK(one.source({0.2, 0.1}) == doctest::Approx(1.3));
    CHECK(two.source({0.5, 0.0}) == doctest::Approx(std::exp(1.5)));
    CHECK(two.source({-0.5, 0.05}) == doctest::Approx(0.55));
    CHECK(two.omega0.contains({0.55, 0.0}));
    CHECK(!two.omega0.contains({0.0, 0.0}));
    CHECK_THROWS_AS(blt_example(3), std::invalid_argument);
}

TEST_CASE("desk-scale Example 1" * doctest::test_suite("desk")) {
    BltFixture fx = make_blt_fixture(BltFixtureOptions{});
    CHECK(fx.sys->num_nodes() > 2000);
    CHECK(fx.sys->num_nodes() < 2600);
    CHECK(!fx.data.inverse_crime);
    const Vector f0(fx.sys->num_sources(), 1.0);
    SchemeParams arm;
    arm.step_check = StepCheck::kNone;
    arm.dt = 0.125;
    const RunRecord a = reconstruct(*fx.op, fx.y_delta, Method::kArm, arm,
                                    StoppingRule::discrepancy(1.0, fx.data.delta), f0, fx.f_true);
    CHECK(a.stopped_by == StopReason::kDiscrepancy);
    CHECK(a.k_star < 500);
    CHECK(a.final_error() < 0.05);

    SchemeParams lw;
    lw.step_check = StepCheck::kNone;
    const double w = omega_norm(*fx.op);
    lw.dt = 1.84 * w;
    const RunRecord l = reconstruct(*fx.op, fx.y_delta, Method::kLandweber, lw,
                                    StoppingRule::discrepancy(1.0, fx.data.delta), f0, fx.f_true);
    CHECK(l.stopped_by == StopReason::kDiscrepancy);
    CHECK(5 * a.k_star <= l.k_star);
}
