#include "accreg/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace accreg {

namespace {

constexpr double kDivergenceFactor = 1e6;
constexpr int kNormIterations = 200;

void evaluate(IterationState& st, const LinearOperator& op, std::span<const double> y) {
    Vector r = op.apply(st.f);
    kernels::axpby(1.0, y, -1.0, r);
    st.residual_norm = op.data_inner().norm(r);
    st.grad = op.apply_adjoint(r);
}

double residual_only(const LinearOperator& op, std::span<const double> y,
                     std::span<const double> f) {
    Vector r = op.apply(f);
    kernels::axpby(1.0, y, -1.0, r);
    return op.data_inner().norm(r);
}

void require(bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument(what);
}

// Shared body of the two Verlet variants. `implicit` selects the implicit
// (symplectic) damping half-step; otherwise the damping is explicit.
IterationState verlet_step(IterationState st, const SchemeParams& p, const LinearOperator& op,
                           std::span<const double> y, bool implicit) {
    const double dt = st.dt;
    const std::size_t n = st.f.size();
    if (st.q.empty()) st.q.assign(n, 0.0);
    if (st.grad.empty()) evaluate(st, op, y);

    Vector q_half(n);
    if (st.k == 0) {
        for (std::size_t i = 0; i < n; ++i) q_half[i] = 0.5 * dt * st.grad[i];
    } else if (implicit) {
        const double beta = (1.0 + 2.0 * p.s) / (2.0 * static_cast<double>(st.k));
        const double omega = arm_coefficients(st.k, p.s, dt).second;
        for (std::size_t i = 0; i < n; ++i)
            q_half[i] = (st.q[i] - 0.5 * dt * st.grad[i]) / (1.0 + beta) + omega / dt * st.grad[i];
    } else {
        const double beta = (1.0 + 2.0 * p.s) / (2.0 * static_cast<double>(st.k));
        for (std::size_t i = 0; i < n; ++i)
            q_half[i] = (1.0 - beta) * st.q[i] + 0.5 * dt * st.grad[i];
    }

    st.f_prev = st.f;
    kernels::axpy(dt, q_half, st.f);
    ++st.k;
    st.t = static_cast<double>(st.k) * dt;
    evaluate(st, op, y);

    const double beta_next = (1.0 + 2.0 * p.s) / (2.0 * static_cast<double>(st.k));
    for (std::size_t i = 0; i < n; ++i)
        st.q[i] = (1.0 - beta_next) * q_half[i] + 0.5 * dt * st.grad[i];
    return st;
}

}  // namespace

std::string_view method_name(Method m) {
    switch (m) {
        case Method::kLandweber: return "landweber";
        case Method::kNu: return "nu";
        case Method::kNesterov: return "nesterov";
        case Method::kArm: return "arm";
        case Method::kMsvm: return "msvm";
        case Method::kEuler: return "euler";
    }
    return "unknown";
}

Method parse_method(std::string_view name) {
    for (Method m : {Method::kLandweber, Method::kNu, Method::kNesterov, Method::kArm,
                     Method::kMsvm, Method::kEuler})
        if (method_name(m) == name) return m;
    throw std::invalid_argument("unknown method '" + std::string(name) +
                                "' (expected landweber, nu, nesterov, arm, msvm or euler)");
}

std::string_view stop_reason_name(StopReason r) {
    switch (r) {
        case StopReason::kAPriori: return "a_priori";
        case StopReason::kDiscrepancy: return "discrepancy";
        case StopReason::kMaxIter: return "max_iter";
        case StopReason::kInitialBelowThreshold: return "initial_below_threshold";
        case StopReason::kDivergence: return "divergence";
    }
    return "unknown";
}

IterationState initial_state(const LinearOperator& op, std::span<const double> y,
                             std::span<const double> f0, double dt) {
    if (y.size() != op.data_dim() || f0.size() != op.source_dim())
        throw std::invalid_argument("initial_state: dimension mismatch");
    IterationState st;
    st.f.assign(f0.begin(), f0.end());
    st.f_prev = st.f;
    st.q.assign(st.f.size(), 0.0);
    st.dt = dt;
    evaluate(st, op, y);
    return st;
}

std::pair<double, double> arm_coefficients(std::size_t k, double s, double dt) {
    require(k >= 1, "arm_coefficients: k must be >= 1");
    require(dt > 0.0 && s >= -0.5, "arm_coefficients: need dt > 0 and s >= -1/2");
    const double kk = static_cast<double>(k);
    const double c = 1.0 + 2.0 * s;
    const double a = (2.0 * kk - c) / (2.0 * kk + c);
    double omega = 2.0 * dt * dt * kk / (2.0 * kk + c);
    if (kk <= s + 0.5) omega = 0.5 * dt * dt;
    return {a, omega};
}

std::pair<double, double> msv_coefficients(std::size_t k, double s, double dt) {
    require(k >= 1, "msv_coefficients: k must be >= 1");
    require(dt > 0.0 && s >= -0.5, "msv_coefficients: need dt > 0 and s >= -1/2");
    const double beta = (1.0 + 2.0 * s) / (2.0 * static_cast<double>(k));
    return {(1.0 - beta) * (1.0 - beta), 0.5 * dt * dt * (2.0 - beta)};
}

std::pair<double, double> euler_coefficients(std::size_t k, double s, double dt) {
    require(k >= 1, "euler_coefficients: k must be >= 1");
    require(dt > 0.0, "euler_coefficients: need dt > 0");
    return {1.0 - (1.0 + 2.0 * s) / static_cast<double>(k), dt * dt};
}

std::pair<double, double> nu_coefficients(std::size_t k, double nu) {
    require(k >= 1, "nu_coefficients: k must be >= 1");
    require(nu > 0.0, "nu_coefficients: nu must be positive");
    if (k == 1) return {0.0, (4.0 * nu + 2.0) / (4.0 * nu + 1.0)};
    const double kk = static_cast<double>(k);
    const double mu = (kk - 1.0) * (2.0 * kk - 3.0) * (2.0 * kk + 2.0 * nu - 1.0) /
                      ((kk + 2.0 * nu - 1.0) * (2.0 * kk + 4.0 * nu - 1.0) *
                       (2.0 * kk + 2.0 * nu - 3.0));
    const double omega = 4.0 * (2.0 * kk + 2.0 * nu - 1.0) * (kk + nu - 1.0) /
                         ((kk + 2.0 * nu - 1.0) * (2.0 * kk + 4.0 * nu - 1.0));
    return {mu, omega};
}

IterationState semi_iterative_step(IterationState st, double a_k, double omega_k,
                                   const LinearOperator& op, std::span<const double> y) {
    st = semi_iterative_step(std::move(st), a_k, omega_k, 0.0, op, y);
    st.t = static_cast<double>(st.k) * st.dt;
    return st;
}

IterationState semi_iterative_step(IterationState st, double a_k, double omega_k, double dt_k,
                                   const LinearOperator& op, std::span<const double> y) {
    if (st.grad.empty()) evaluate(st, op, y);
    Vector next = st.f;
    for (std::size_t i = 0; i < next.size(); ++i)
        next[i] += a_k * (st.f[i] - st.f_prev[i]) + omega_k * st.grad[i];
    st.f_prev = std::move(st.f);
    st.f = std::move(next);
    ++st.k;
    st.t += dt_k;
    evaluate(st, op, y);
    return st;
}

IterationState sv_step(IterationState st, const SchemeParams& p, const LinearOperator& op,
                       std::span<const double> y) {
    return verlet_step(std::move(st), p, op, y, true);
}

IterationState msv_step(IterationState st, const SchemeParams& p, const LinearOperator& op,
                        std::span<const double> y) {
    return verlet_step(std::move(st), p, op, y, false);
}

IterationState nu_step(IterationState st, const SchemeParams& p, const LinearOperator& op,
                       std::span<const double> y) {
    const auto [mu, w] = nu_coefficients(st.k + 1, p.nu);
    return semi_iterative_step(std::move(st), mu, p.omega * w, op, y);
}

IterationState nesterov_step(IterationState st, const SchemeParams& p, const LinearOperator& op,
                             std::span<const double> y) {
    const double kk = static_cast<double>(st.k);
    const double momentum = st.k == 0 ? 0.0 : (kk - 1.0) / (kk + p.alpha - 1.0);
    Vector z = st.f;
    for (std::size_t i = 0; i < z.size(); ++i) z[i] += momentum * (st.f[i] - st.f_prev[i]);

    Vector r = op.apply(z);
    kernels::axpby(1.0, y, -1.0, r);
    const Vector g = op.apply_adjoint(r);
    kernels::axpy(p.omega, g, z);

    st.f_prev = std::move(st.f);
    st.f = std::move(z);
    st.grad.clear();
    ++st.k;
    st.t = static_cast<double>(st.k) * st.dt;
    st.residual_norm = residual_only(op, y, st.f);
    return st;
}

IterationState landweber_step(IterationState st, const SchemeParams& p, const LinearOperator& op,
                              std::span<const double> y) {
    return semi_iterative_step(std::move(st), 0.0, p.dt, op, y);
}

IterationState euler_step(IterationState st, const SchemeParams& p, const LinearOperator& op,
                          std::span<const double> y) {
    const auto [a, w] = st.k == 0 ? std::pair{0.0, p.dt * p.dt}
                                  : euler_coefficients(st.k, p.s, p.dt);
    return semi_iterative_step(std::move(st), a, w, op, y);
}

IterationState step(Method m, IterationState st, const SchemeParams& p, const LinearOperator& op,
                    std::span<const double> y) {
    switch (m) {
        case Method::kLandweber: return landweber_step(std::move(st), p, op, y);
        case Method::kNu: return nu_step(std::move(st), p, op, y);
        case Method::kNesterov: return nesterov_step(std::move(st), p, op, y);
        case Method::kArm: return sv_step(std::move(st), p, op, y);
        case Method::kMsvm: return msv_step(std::move(st), p, op, y);
        case Method::kEuler: return euler_step(std::move(st), p, op, y);
    }
    throw std::logic_error("step: unknown method");
}

StoppingRule StoppingRule::a_priori(std::size_t k_star) {
    StoppingRule r;
    r.kind = Kind::kAPriori;
    r.k_star = k_star;
    r.max_iter = k_star;
    r.validate();
    return r;
}

StoppingRule StoppingRule::discrepancy(double tau, double delta, std::size_t max_iter) {
    StoppingRule r;
    r.kind = Kind::kDiscrepancy;
    r.tau = tau;
    r.delta = delta;
    r.max_iter = max_iter;
    r.validate();
    return r;
}

StoppingRule StoppingRule::max_iterations(std::size_t n) {
    StoppingRule r;
    r.kind = Kind::kMaxIter;
    r.max_iter = n;
    return r;
}

void StoppingRule::validate() const {
    switch (kind) {
        case Kind::kAPriori: require(k_star >= 1, "stopping rule: k_star must be >= 1"); break;
        case Kind::kDiscrepancy:
            require(tau > 0.0, "stopping rule: tau must be positive");
            require(delta >= 0.0, "stopping rule: delta must be >= 0");
            break;
        case Kind::kMaxIter: break;
    }
}

double RunRecord::final_error() const {
    return error_history.empty() ? std::numeric_limits<double>::quiet_NaN()
                                 : error_history.back();
}

void validate_params(Method m, const SchemeParams& p, double op_norm) {
    const bool check = p.step_check == StepCheck::kProofBound;
    const double slack = 1.0 + 1e-12;
    std::ostringstream msg;
    switch (m) {
        case Method::kArm:
        case Method::kMsvm:
        case Method::kEuler:
            require(p.dt > 0.0, "dt must be positive");
            require(p.s >= -0.5, "s must be >= -1/2");
            if (check && m != Method::kEuler && p.dt * op_norm > slack) {
                msg << "dt * ||K|| = " << p.dt * op_norm << " exceeds 1";
                throw std::invalid_argument(msg.str());
            }
            break;
        case Method::kLandweber:
            require(p.dt > 0.0, "dt must be positive");
            if (check && p.dt * op_norm * op_norm >= 2.0) {
                msg << "Landweber step dt * ||K||^2 = " << p.dt * op_norm * op_norm
                    << " must be below 2";
                throw std::invalid_argument(msg.str());
            }
            break;
        case Method::kNu:
        case Method::kNesterov:
            require(p.omega > 0.0, "omega must be positive");
            if (m == Method::kNu) require(p.nu > 0.0, "nu must be positive");
            if (m == Method::kNesterov) require(p.alpha >= 3.0, "alpha must be >= 3");
            if (check && p.omega * op_norm * op_norm > slack) {
                msg << "omega * ||K||^2 = " << p.omega * op_norm * op_norm << " exceeds 1";
                throw std::invalid_argument(msg.str());
            }
            break;
    }
}

RunRecord run(Method m, const LinearOperator& op, std::span<const double> y,
              std::span<const double> f0, const SchemeParams& params, const StoppingRule& stop,
              const RunOptions& opts) {
    stop.validate();
    double norm = params.op_norm.value_or(std::numeric_limits<double>::quiet_NaN());
    if (params.step_check == StepCheck::kProofBound && !params.op_norm)
        norm = estimate_norm(op, kNormIterations);
    validate_params(m, params, std::isnan(norm) ? 0.0 : norm);

    RunRecord rec;
    rec.method = std::string(method_name(m));
    rec.params = params;
    if (!std::isnan(norm)) rec.params.op_norm = norm;
    rec.step_bound_exceeded =
        (m == Method::kArm || m == Method::kMsvm) && !std::isnan(norm) && params.dt * norm > 1.0;
    if (stop.kind == StoppingRule::Kind::kDiscrepancy) {
        rec.tau = stop.tau;
        rec.delta = stop.delta;
    }

    const InnerProduct& src = op.source_inner();
    double truth_norm = 1.0;
    if (opts.truth) {
        if (opts.truth->size() != op.source_dim())
            throw std::invalid_argument("run: truth has wrong dimension");
        truth_norm = src.norm(*opts.truth);
        if (truth_norm == 0.0) truth_norm = 1.0;
    }
    auto record_error = [&](const Vector& f) {
        if (!opts.truth) return;
        Vector e = f;
        kernels::axpy(-1.0, *opts.truth, e);
        rec.error_history.push_back(src.norm(e) / truth_norm);
    };

    IterationState st = initial_state(op, y, f0, params.dt);
    const double r0 = st.residual_norm;
    rec.residual_history.push_back(r0);
    record_error(st.f);

    const double threshold = stop.tau * stop.delta;
    const bool discrepancy = stop.kind == StoppingRule::Kind::kDiscrepancy;
    if (discrepancy && r0 <= threshold) {
        rec.stopped_by = StopReason::kInitialBelowThreshold;
    } else {
        const std::size_t cap =
            stop.kind == StoppingRule::Kind::kAPriori ? stop.k_star : stop.max_iter;
        rec.stopped_by =
            stop.kind == StoppingRule::Kind::kAPriori ? StopReason::kAPriori : StopReason::kMaxIter;
        while (st.k < cap) {
            st = step(m, std::move(st), params, op, y);
            rec.residual_history.push_back(st.residual_norm);
            record_error(st.f);
            if (!std::isfinite(st.residual_norm) || st.residual_norm > kDivergenceFactor * r0) {
                rec.stopped_by = StopReason::kDivergence;
                break;
            }
            if (discrepancy && st.residual_norm <= threshold) {
                rec.stopped_by = StopReason::kDiscrepancy;
                break;
            }
        }
    }
    rec.k_star = st.k;
    if (opts.keep_solution) rec.solution = std::move(st.f);
    return rec;
}

std::vector<Vector> residual_polynomials(Method m, std::size_t k_max,
                                         std::span<const double> lambdas,
                                         const SchemeParams& p) {
    for (double l : lambdas)
        require(l >= 0.0 && std::isfinite(l), "residual_polynomial: lambda must be >= 0");

    std::vector<std::size_t> order;
    for (std::size_t j = 0; j < lambdas.size(); ++j)
        if (lambdas[j] > 0.0) order.push_back(j);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return lambdas[a] > lambdas[b]; });

    std::vector<Vector> out(k_max + 1, Vector(lambdas.size(), 1.0));
    if (order.empty()) return out;

    Vector sigma(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) sigma[i] = std::sqrt(lambdas[order[i]]);
    const DiagonalOperator op(std::move(sigma));
    const Vector y(order.size(), 0.0);
    const Vector f0(order.size(), 1.0);

    IterationState st = initial_state(op, y, f0, p.dt);
    for (std::size_t k = 1; k <= k_max; ++k) {
        st = step(m, std::move(st), p, op, y);
        for (std::size_t i = 0; i < order.size(); ++i) out[k][order[i]] = st.f[i];
    }
    return out;
}

double residual_polynomial(Method m, std::size_t k, double lambda, const SchemeParams& p) {
    const double l[1] = {lambda};
    return residual_polynomials(m, k, l, p)[k][0];
}

}  // namespace accreg
