#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"

#include "accreg/linear_operator.hpp"
#include "accreg/solvers.hpp"

using namespace accreg;

namespace {

Vector random_spectrum(std::size_t n, unsigned seed) {
    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> u(-6.0, 0.0);
    Vector s(n);
    for (double& x : s) x = std::pow(10.0, u(gen));
    std::sort(s.begin(), s.end(), std::greater<>());
    s[0] = 1.0;
    return s;
}

double max_rel_diff(const Vector& a, const Vector& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num = std::max(num, std::abs(a[i] - b[i]));
        den = std::max(den, std::abs(b[i]));
    }
    return den > 0.0 ? num / den : num;
}

// Three-term recurrence on a diagonal operator with caller-supplied
// coefficients, written independently of the library steppers.
template <class Coef>
std::vector<Vector> three_term(const Vector& sigma, const Vector& y, const Vector& f0, int steps,
                               Coef coef) {
    std::vector<Vector> out{f0};
    Vector prev = f0, cur = f0;
    for (int k = 0; k < steps; ++k) {
        auto [a, w] = coef(k);
        Vector next(cur.size());
        for (std::size_t j = 0; j < cur.size(); ++j)
            next[j] = cur[j] + a * (cur[j] - prev[j]) + w * sigma[j] * (y[j] - sigma[j] * cur[j]);
        prev = cur;
        cur = next;
        out.push_back(cur);
    }
    return out;
}

}  // namespace

TEST_CASE("ARM coefficients") {
    CHECK(arm_coefficients(3, 1.0, 0.7).first == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(arm_coefficients(3, 1.0, 0.125).second ==
          doctest::Approx(2.0 * 0.015625 * 3.0 / 9.0).epsilon(1e-15));
    CHECK(arm_coefficients(1, 1.0, 0.1).second == doctest::Approx(0.005).epsilon(1e-15));
    CHECK_THROWS_AS(arm_coefficients(0, 1.0, 0.1), std::invalid_argument);
    for (std::size_t k = 1; k < 200; ++k)
        for (double s : {-0.5, 0.0, 1.0, 4.0, 32.0})
            CHECK(arm_coefficients(k, s, 0.3).second >= 0.5 * 0.09 * (1.0 - 1e-15));
}

TEST_CASE("modified Verlet and Euler coefficients") {
    // beta_2 = dt (1+2s) / (2 t_2) = 0.3 / 0.4
    auto [a, w] = msv_coefficients(2, 1.0, 0.1);
    CHECK(a == doctest::Approx(0.0625).epsilon(1e-14));
    CHECK(w == doctest::Approx(0.005 * 1.25).epsilon(1e-14));
    auto [ae, we] = euler_coefficients(6, 1.0, 0.2);
    CHECK(ae == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(we == doctest::Approx(0.04).epsilon(1e-15));
}

TEST_CASE("nu-method coefficients") {
    auto [m1, w1] = nu_coefficients(1, 0.5);
    CHECK(m1 == 0.0);
    CHECK(w1 == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
    auto [m2, w2] = nu_coefficients(2, 0.5);
    CHECK(m2 == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(w2 == doctest::Approx(2.4).epsilon(1e-15));
    CHECK_THROWS_AS(nu_coefficients(0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(nu_coefficients(1, 0.0), std::invalid_argument);
}

TEST_CASE("theta sequence") {
    for (double s : {0.0, 0.5, 1.0, 3.0})
        for (std::size_t k = 1; k < 50; ++k) {
            const double a = arm_coefficients(k + 1, s, 1.0).first;
            CHECK((1.0 - a) / (1.0 + a) ==
                  doctest::Approx((2.0 * s + 1.0) / (2.0 * k + 2.0)).epsilon(1e-14));
        }
    auto theta = [](double s, double k) { return (2.0 * s + 1.0) / (2.0 * k + 2.0); };
    for (std::size_t k = 2; k < 50; ++k) {
        const double kk = static_cast<double>(k);
        const double prod = theta(0.5, kk) / theta(0.5, kk - 1.0) * (1.0 - theta(0.5, kk - 1.0));
        CHECK(prod == doctest::Approx(arm_coefficients(k, 0.5, 1.0).first).epsilon(1e-14));
    }
    // The product identity does not extend to s != 1/2.
    CHECK(theta(1.0, 3) / theta(1.0, 2) * (1.0 - theta(1.0, 2)) ==
          doctest::Approx(3.0 / 8.0).epsilon(1e-15));
    CHECK(arm_coefficients(3, 1.0, 1.0).first == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("semi-iterative step") {
    DiagonalOperator one({1.0});
    Vector y{1.0}, zero{0.0};
    IterationState st = initial_state(one, y, zero, 1.0);
    st = semi_iterative_step(st, 0.0, 1.0, one, y);
    CHECK(st.f[0] == 1.0);
    CHECK(st.k == 1);
    CHECK(st.t == 1.0);

    DiagonalOperator op({2.0, 0.5, 0.1});
    Vector ftrue{1.0, -2.0, 3.0};
    Vector yexact = op.apply(ftrue);
    IterationState fixed = initial_state(op, yexact, ftrue, 0.1);
    fixed = semi_iterative_step(fixed, 0.7, 0.2, op, yexact);
    CHECK(fixed.f == ftrue);

    SUBCASE("a = 0, omega = dt is one Landweber step") {
        SchemeParams p;
        p.dt = 0.2;
        Vector f0{0.3, 0.1, -0.4};
        IterationState a = initial_state(op, yexact, f0, p.dt);
        IterationState b = a;
        a = semi_iterative_step(a, 0.0, p.dt, op, yexact);
        b = landweber_step(b, p, op, yexact);
        CHECK(a.f == b.f);
    }
    SUBCASE("variable steps accumulate time") {
        IterationState v = initial_state(op, yexact, Vector(3, 0.0), 0.0);
        v = semi_iterative_step(v, 0.0, 0.1, 0.1, op, yexact);
        v = semi_iterative_step(v, 0.5, 0.3, 0.3, op, yexact);
        CHECK(v.t == doctest::Approx(0.4));
        CHECK(v.k == 2);
    }
}

TEST_CASE("Verlet first step and fixed point") {
    DenseOperator id(Eigen::MatrixXd::Identity(1, 1));
    SchemeParams p;
    p.dt = 0.1;
    IterationState st = initial_state(id, Vector{0.0}, Vector{1.0}, p.dt);
    st = sv_step(st, p, id, Vector{0.0});
    CHECK(st.f[0] == doctest::Approx(1.0 - 0.005).epsilon(1e-15));

    DiagonalOperator op({1.0, 0.3});
    Vector ftrue{0.5, 2.0};
    Vector y = op.apply(ftrue);
    for (Method m : {Method::kArm, Method::kMsvm, Method::kNu, Method::kNesterov,
                     Method::kLandweber, Method::kEuler}) {
        IterationState s = initial_state(op, y, ftrue, 0.5);
        for (int k = 0; k < 20; ++k) {
            SchemeParams q;
            q.dt = 0.5;
            q.omega = 0.9;
            s = step(m, s, q, op, y);
            CHECK(max_rel_diff(s.f, ftrue) <= 1e-12);
        }
        if (m == Method::kArm || m == Method::kMsvm)
            for (double qi : s.q) CHECK(qi == 0.0);
    }
}

TEST_CASE("Verlet schemes equal their three-term recurrences") {
    for (unsigned seed : {1u, 2u, 3u}) {
        const Vector sigma = random_spectrum(40, seed);
        const DiagonalOperator op(sigma);
        Vector y(sigma.size()), f0(sigma.size());
        std::mt19937 gen(seed + 10);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (std::size_t j = 0; j < sigma.size(); ++j) {
            y[j] = u(gen);
            f0[j] = u(gen);
        }
        for (double s : {0.0, 1.0, 2.5}) {
            const double dt = 0.9;
            const double c = 1.0 + 2.0 * s;
            SchemeParams p;
            p.s = s;
            p.dt = dt;

            auto arm = three_term(sigma, y, f0, 500, [&](int k) {
                if (k == 0) return std::pair{0.0, dt * dt / 2.0};
                double w = 2.0 * dt * dt * k / (2.0 * k + c);
                if (k <= s + 0.5) w = dt * dt / 2.0;
                return std::pair{(2.0 * k - c) / (2.0 * k + c), w};
            });
            auto msv = three_term(sigma, y, f0, 500, [&](int k) {
                if (k == 0) return std::pair{0.0, dt * dt / 2.0};
                const double beta = dt * c / (2.0 * k * dt);
                return std::pair{(1.0 - beta) * (1.0 - beta), dt * dt / 2.0 * (2.0 - beta)};
            });

            IterationState a = initial_state(op, y, f0, dt);
            IterationState b = a;
            double worst_a = 0.0, worst_b = 0.0;
            for (int k = 1; k <= 500; ++k) {
                a = sv_step(a, p, op, y);
                b = msv_step(b, p, op, y);
                worst_a = std::max(worst_a, max_rel_diff(a.f, arm[k]));
                worst_b = std::max(worst_b, max_rel_diff(b.f, msv[k]));
                CHECK(a.t == static_cast<double>(k) * dt);
            }
            CHECK(worst_a <= 1e-12);
            CHECK(worst_b <= 1e-12);
        }
    }
}

TEST_CASE("Euler coefficient choice matches the symplectic Euler recurrence") {
    const Vector sigma{1.0, 0.4, 0.05};
    const DiagonalOperator op(sigma);
    const Vector y{0.3, -0.2, 0.9}, f0{0.0, 0.0, 0.0};
    const double dt = 0.3, s = 1.0;
    SchemeParams p;
    p.s = s;
    p.dt = dt;

    // f^{k+1} = f^k + dt q^k, q^{k+1} = q^k + dt (g(f^{k+1}) - (1+2s)/t_{k+1} q^k)
    Vector f = f0, q(3, 0.0);
    for (std::size_t j = 0; j < 3; ++j) q[j] = dt * sigma[j] * (y[j] - sigma[j] * f[j]);
    IterationState st = initial_state(op, y, f0, dt);
    for (int k = 0; k < 60; ++k) {
        for (std::size_t j = 0; j < 3; ++j) f[j] += dt * q[j];
        const double t_next = (k + 1) * dt;
        for (std::size_t j = 0; j < 3; ++j)
            q[j] += dt * (sigma[j] * (y[j] - sigma[j] * f[j]) - (1.0 + 2.0 * s) / t_next * q[j]);
        st = euler_step(st, p, op, y);
        CHECK(max_rel_diff(st.f, f) <= 1e-12);
    }
}

TEST_CASE("nu-method, Nesterov and Landweber single steps") {
    DiagonalOperator one({1.0});
    const Vector y{1.0}, zero{0.0};
    SchemeParams p;
    p.omega = 1.0;
    p.dt = 1.0;

    IterationState nu = nu_step(initial_state(one, y, zero), p, one, y);
    CHECK(nu.f[0] == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
    IterationState nes = nesterov_step(initial_state(one, y, zero), p, one, y);
    CHECK(nes.f[0] == 1.0);
    IterationState lw = landweber_step(initial_state(one, y, zero), p, one, y);
    CHECK(lw.f[0] == 1.0);
    CHECK(lw.residual_norm == 0.0);

    SUBCASE("second Nesterov step has zero momentum") {
        DiagonalOperator op({0.8});
        IterationState a = initial_state(op, y, Vector{0.2});
        a = nesterov_step(a, p, op, y);
        const double f1 = a.f[0];
        a = nesterov_step(a, p, op, y);
        CHECK(a.f[0] == doctest::Approx(f1 + 0.8 * (1.0 - 0.8 * f1)).epsilon(1e-15));
    }
}

TEST_CASE("run: stopping rules and flags") {
    DiagonalOperator one({1.0});
    SchemeParams p;
    p.dt = 1.0;
    RunOptions opts;
    opts.truth = Vector{1.0};
    RunRecord r = run(Method::kLandweber, one, Vector{1.0}, Vector{0.0}, p,
                      StoppingRule::a_priori(1), opts);
    CHECK(r.k_star == 1);
    CHECK(r.solution[0] == 1.0);
    CHECK(r.final_error() == 0.0);
    CHECK(r.stopped_by == StopReason::kAPriori);
    CHECK(r.residual_history.size() == r.k_star + 1);

    DiagonalOperator op({1.0, 0.5});
    RunRecord flagged = run(Method::kArm, op, Vector{0.1, 0.1}, Vector{0.0, 0.0}, p,
                            StoppingRule::discrepancy(2.0, 1.0));
    CHECK(flagged.k_star == 0);
    CHECK(flagged.stopped_by == StopReason::kInitialBelowThreshold);

    SchemeParams too_big;
    too_big.dt = 2.0;
    CHECK_THROWS_AS(run(Method::kLandweber, one, Vector{1.0}, Vector{0.0}, too_big,
                        StoppingRule::max_iterations(3)),
                    std::invalid_argument);
    SchemeParams arm_big;
    arm_big.dt = 1.5;
    CHECK_THROWS_AS(run(Method::kArm, one, Vector{1.0}, Vector{0.0}, arm_big,
                        StoppingRule::max_iterations(3)),
                    std::invalid_argument);
    arm_big.step_check = StepCheck::kNone;
    arm_big.op_norm = 1.0;
    RunRecord loose = run(Method::kArm, one, Vector{1.0}, Vector{0.0}, arm_big,
                          StoppingRule::max_iterations(3));
    CHECK(loose.step_bound_exceeded);
    CHECK_THROWS_AS(StoppingRule::a_priori(0), std::invalid_argument);
    CHECK_THROWS_AS(StoppingRule::discrepancy(0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(parse_method("gradient"), std::invalid_argument);
    CHECK(parse_method("msvm") == Method::kMsvm);
}

TEST_CASE("run: divergence guard") {
    DiagonalOperator op({1.0});
    SchemeParams p;
    p.dt = 2.5;
    p.step_check = StepCheck::kNone;
    RunRecord r = run(Method::kArm, op, Vector{1.0}, Vector{0.0}, p,
                      StoppingRule::max_iterations(5000));
    CHECK(r.stopped_by == StopReason::kDivergence);
    CHECK(r.k_star < 5000);
    CHECK(r.residual_history.size() == r.k_star + 1);
}

TEST_CASE("ARM needs far fewer iterations than Landweber") {
    const std::size_t n = 400;
    Vector sigma(n), ftrue(n), y(n);
    for (std::size_t j = 0; j < n; ++j) {
        sigma[j] = 1.0 / static_cast<double>(j + 1);
        ftrue[j] = sigma[j];
        y[j] = sigma[j] * ftrue[j] * (1.0 + 0.01 * std::sin(7.0 * j));
    }
    DiagonalOperator op(sigma);
    Vector noise(n);
    for (std::size_t j = 0; j < n; ++j) noise[j] = y[j] - sigma[j] * ftrue[j];
    const double delta = std::sqrt(kernels::serial::dot(noise, noise));
    const Vector f0(n, 0.0);
    SchemeParams p;
    p.dt = 1.0;
    auto stop = StoppingRule::discrepancy(1.5, delta, 200000);
    RunRecord arm = run(Method::kArm, op, y, f0, p, stop);
    RunRecord lw = run(Method::kLandweber, op, y, f0, p, stop);
    CHECK(arm.stopped_by == StopReason::kDiscrepancy);
    CHECK(lw.stopped_by == StopReason::kDiscrepancy);
    CHECK(arm.k_star * 5 < lw.k_star);
    // Acceleration is of square-root order.
    const double ratio = arm.k_star / std::sqrt(static_cast<double>(lw.k_star));
    CHECK(ratio > 0.2);
    CHECK(ratio < 5.0);
    // First index satisfying the rule.
    CHECK(arm.residual_history.back() <= 1.5 * delta);
    for (std::size_t k = 0; k < arm.k_star; ++k) CHECK(arm.residual_history[k] > 1.5 * delta);
}

TEST_CASE("residual polynomials") {
    SchemeParams p;
    p.dt = 1.0;
    p.omega = 1.0;
    for (Method m : {Method::kArm, Method::kMsvm, Method::kNu, Method::kNesterov,
                     Method::kLandweber}) {
        CHECK(residual_polynomial(m, 0, 0.3, p) == 1.0);
        CHECK(residual_polynomial(m, 25, 0.0, p) == 1.0);
    }
    CHECK(residual_polynomial(Method::kLandweber, 3, 0.5, p) ==
          doctest::Approx(std::pow(0.5, 3)).epsilon(1e-14));

    Vector lambdas;
    for (int i = 0; i <= 400; ++i) lambdas.push_back(std::pow(10.0, -8.0 + 8.0 * i / 400.0));
    auto r = residual_polynomials(Method::kArm, 10000, lambdas, p);
    double worst = 0.0;
    for (const Vector& row : r)
        for (double v : row) worst = std::max(worst, std::abs(v));
    CHECK(worst <= 1.0 + 1e-10);
    CHECK_THROWS_AS(residual_polynomial(Method::kArm, 1, -1.0, p), std::invalid_argument);
}

TEST_CASE("discrete Lyapunov energy is nonincreasing") {
    const Vector sigma = random_spectrum(60, 4);
    const DiagonalOperator op(sigma);
    Vector y(sigma.size());
    for (std::size_t j = 0; j < y.size(); ++j) y[j] = std::cos(1.3 * j);
    SchemeParams p;
    p.dt = 1.0;
    IterationState st = initial_state(op, y, Vector(sigma.size(), 0.0), p.dt);
    auto energy = [&](const IterationState& s) {
        return 0.5 * kernels::serial::dot(s.q, s.q) + 0.5 * s.residual_norm * s.residual_norm;
    };
    double prev = energy(st);
    double worst = -1.0;
    for (int k = 0; k < 2000; ++k) {
        st = sv_step(st, p, op, y);
        const double e = energy(st);
        worst = std::max(worst, e - prev);
        prev = e;
    }
    CHECK(worst <= 1e-10);
}
