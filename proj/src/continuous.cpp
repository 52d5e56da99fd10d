#include "accreg/continuous.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "accreg/linear_operator.hpp"
#include "accreg/solvers.hpp"
#include "accreg/special.hpp"

namespace accreg {

namespace {

// r as a power series in (x/2)^2, exact at x = 0:
// r = sum_m (-1)^m (x/2)^{2m} / (m! (s+1)_m).
double bias_series(double s, double x) {
    const long double h2 = 0.25L * static_cast<long double>(x) * x;
    long double term = 1.0L, sum = 1.0L;
    for (int m = 1; m < 500; ++m) {
        term *= -h2 / (static_cast<long double>(m) * (static_cast<long double>(m) + s));
        sum += term;
        if (std::fabs(term) <= 1e-21L * std::fabs(sum) && m * m > h2) break;
    }
    return static_cast<double>(sum);
}

void require_positive_lambda(double lambda) {
    if (!(lambda > 0.0)) throw std::invalid_argument("spectral value lambda must be positive");
}

double residual_sum(const SpectralModel& m, double t) {
    const auto n = static_cast<std::ptrdiff_t>(m.size());
    double sum = 0.0;
#pragma omp parallel for reduction(+ : sum) schedule(static) if (n >= 256)
    for (std::ptrdiff_t j = 0; j < n; ++j) {
        const double sj = m.sigma[j];
        const double c = sj * m.f0[j] - m.y[j];
        const double r = bias_r(m.s, t, sj * sj);
        sum += r * r * c * c;
    }
    return sum;
}

struct ScanResult {
    bool found = false;
    double t = 0.0;
};

ScanResult scan_interval(const SpectralModel& m, double threshold, double t_lo, double t_hi,
                         std::size_t points) {
    double lo = t_lo;
    for (std::size_t i = 1; i <= points; ++i) {
        const double t = t_lo + (t_hi - t_lo) * static_cast<double>(i) / static_cast<double>(points);
        if (std::sqrt(residual_sum(m, t)) - threshold > 0.0) {
            lo = t;
            continue;
        }
        double hi = t;
        while (hi - lo > 1e-8 * std::max(1.0, hi)) {
            const double mid = 0.5 * (lo + hi);
            if (std::sqrt(residual_sum(m, mid)) - threshold > 0.0) lo = mid;
            else hi = mid;
        }
        return {true, hi};
    }
    return {false, t_hi};
}

double norm2(std::span<const double> v) { return std::sqrt(kernels::dot(v, v)); }

void check_rate_inputs(const SourceConditionFixture& fx, const RateProblem& pb,
                       std::span<const double> deltas) {
    fx.validate();
    const std::size_t n = pb.sigma.size();
    if (fx.v0.size() != n || pb.f_dagger.size() != n || pb.noise_direction.size() != n)
        throw std::invalid_argument("rate experiment: vector lengths differ");
    if (fx.mu > (1.0 + 2.0 * pb.s) / 4.0 + 1e-15)
        throw std::invalid_argument("rate experiment: mu exceeds the saturation bound (1+2s)/4");
    if (deltas.size() < 2) throw std::invalid_argument("rate experiment: need at least two deltas");
    const auto [lo, hi] = std::minmax_element(deltas.begin(), deltas.end());
    if (!(*lo > 0.0)) throw std::invalid_argument("rate experiment: deltas must be positive");
    if (*hi / *lo < 100.0 * (1.0 - 1e-12))
        throw std::invalid_argument("rate experiment: deltas must span at least two decades");
    if (norm2(pb.noise_direction) == 0.0)
        throw std::invalid_argument("rate experiment: noise direction is zero");
}

// f0 and y^delta for one noise level.
void build_data(const SourceConditionFixture& fx, const RateProblem& pb, double delta, Vector& f0,
                Vector& y) {
    const std::size_t n = pb.sigma.size();
    const double scale = delta / norm2(pb.noise_direction);
    f0.resize(n);
    y.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        f0[j] = pb.f_dagger[j] + std::pow(pb.sigma[j], 2.0 * fx.mu) * fx.v0[j];
        y[j] = pb.sigma[j] * pb.f_dagger[j] + scale * pb.noise_direction[j];
    }
}

void fit(RateResult& res) {
    Vector d, e, t;
    for (const RatePoint& p : res.points) {
        if (!p.reached) continue;
        d.push_back(p.delta);
        e.push_back(p.error);
        t.push_back(p.stop);
    }
    if (d.size() < 2) throw std::runtime_error("rate experiment: fewer than two stopping points");
    res.error_slope = loglog_slope(d, e);
    res.stop_slope = loglog_slope(d, t);
}

}  // namespace

double bias_r(double s, double t, double lambda) {
    require_positive_lambda(lambda);
    if (t < 0.0) throw std::invalid_argument("bias_r: t must be >= 0");
    const double x = std::sqrt(lambda) * t;
    if (x <= bessel_switch_point(s)) return bias_series(s, x);
    const double log_pref = std::lgamma(s + 1.0) - s * std::log(0.5 * x);
    return std::exp(log_pref) * bessel_j(s, x);
}

double bias_r_dot(double s, double t, double lambda) {
    return -lambda * t * bias_r(s + 1.0, t, lambda) / (2.0 * (s + 1.0));
}

double filter_g(double s, double t, double lambda) {
    require_positive_lambda(lambda);
    return (1.0 - bias_r(s, t, lambda)) / lambda;
}

double ode_bias_oracle(double s, double t, double lambda, int n_steps) {
    if (n_steps < 100) throw std::invalid_argument("ode_bias_oracle: n_steps must be >= 100");
    require_positive_lambda(lambda);
    constexpr double eps = 1e-4;
    const double c = 1.0 + 2.0 * s;
    if (t <= eps) return 1.0 - lambda * t * t / (4.0 * (s + 1.0));

    using State = std::array<double, 2>;
    auto rk4 = [](State y, double x, double h, auto rhs) {
        const State k1 = rhs(x, y);
        const State k2 = rhs(x + h / 2, State{y[0] + h / 2 * k1[0], y[1] + h / 2 * k1[1]});
        const State k3 = rhs(x + h / 2, State{y[0] + h / 2 * k2[0], y[1] + h / 2 * k2[1]});
        const State k4 = rhs(x + h, State{y[0] + h * k3[0], y[1] + h * k3[1]});
        return State{y[0] + h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]),
                     y[1] + h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])};
    };

    // Log time u = ln tau, state (r, tau r'): r'' + 2s r' + lambda e^{2u} r = 0.
    const double tau1 = std::min(t, 1.0);
    State y{1.0 - lambda * eps * eps / (4.0 * (s + 1.0)), -lambda * eps * eps / (2.0 * (s + 1.0))};
    const double u0 = std::log(eps), u1 = std::log(tau1);
    const double hu = (u1 - u0) / n_steps;
    auto log_rhs = [&](double u, const State& v) {
        return State{v[1], -2.0 * s * v[1] - lambda * std::exp(2.0 * u) * v[0]};
    };
    for (int i = 0; i < n_steps; ++i) y = rk4(y, u0 + i * hu, hu, log_rhs);
    if (t <= 1.0) return y[0];

    // Uniform time, state (r, r').
    State z{y[0], y[1] / tau1};
    const double h = (t - 1.0) / n_steps;
    auto rhs = [&](double tau, const State& v) {
        return State{v[1], -c / tau * v[1] - lambda * v[0]};
    };
    for (int i = 0; i < n_steps; ++i) z = rk4(z, 1.0 + i * h, h, rhs);
    return z[0];
}

void SpectralModel::validate() const {
    if (sigma.empty()) throw std::invalid_argument("SpectralModel: empty spectrum");
    if (f0.size() != sigma.size() || y.size() != sigma.size())
        throw std::invalid_argument("SpectralModel: sigma, f0 and y must have equal length");
    for (double sj : sigma)
        if (!(sj > 0.0)) throw std::invalid_argument("SpectralModel: sigma must be positive");
    if (s < -0.5) throw std::invalid_argument("SpectralModel: s must be >= -1/2");
}

Vector spectral_solution(const SpectralModel& m, double t) {
    m.validate();
    Vector xi(m.size());
    for (std::size_t j = 0; j < m.size(); ++j) {
        const double r = bias_r(m.s, t, m.sigma[j] * m.sigma[j]);
        xi[j] = r * m.f0[j] + (1.0 - r) * m.y[j] / m.sigma[j];
    }
    return xi;
}

double spectral_residual(const SpectralModel& m, double t) {
    m.validate();
    return std::sqrt(residual_sum(m, t));
}

double discrepancy_chi(const SpectralModel& m, double t, double tau, double delta) {
    return spectral_residual(m, t) - tau * delta;
}

double spectral_energy(const SpectralModel& m, double t) {
    m.validate();
    double e = 0.0;
    for (std::size_t j = 0; j < m.size(); ++j) {
        const double lam = m.sigma[j] * m.sigma[j];
        const double err = m.f0[j] - m.y[j] / m.sigma[j];
        const double r = bias_r(m.s, t, lam);
        const double rd = bias_r_dot(m.s, t, lam);
        e += (rd * rd + lam * r * r) * err * err;
    }
    return 0.5 * e;
}

StoppingTime find_stopping_time(const SpectralModel& m, double tau, double delta, double t_max,
                                std::size_t scan_points) {
    m.validate();
    if (!(t_max > 0.0) || scan_points == 0)
        throw std::invalid_argument("find_stopping_time: need t_max > 0 and scan_points > 0");
    const double threshold = tau * delta;
    if (std::sqrt(residual_sum(m, 0.0)) <= threshold)
        return {0.0, StoppingTime::Status::kInitialBelowThreshold};
    const ScanResult r = scan_interval(m, threshold, 0.0, t_max, scan_points);
    return {r.t, r.found ? StoppingTime::Status::kFound : StoppingTime::Status::kNotReached};
}

void SourceConditionFixture::validate() const {
    if (!(mu > 0.0)) throw std::invalid_argument("source condition: mu must be positive");
    if (v0.empty()) throw std::invalid_argument("source condition: v0 is empty");
    if (norm2(v0) > rho * (1.0 + 1e-12))
        throw std::invalid_argument("source condition: ||v0|| exceeds rho");
}

RateProblem default_rate_problem(std::size_t n_modes, double s) {
    RateProblem pb;
    pb.s = s;
    pb.sigma.resize(n_modes);
    for (std::size_t j = 0; j < n_modes; ++j)
        pb.sigma[j] = std::pow(10.0, -6.0 * static_cast<double>(j) / static_cast<double>(n_modes - 1));
    pb.f_dagger.assign(n_modes, 0.0);
    pb.noise_direction.assign(n_modes, 1.0);
    return pb;
}

SourceConditionFixture unit_source(double mu, std::size_t n) {
    return {mu, std::sqrt(static_cast<double>(n)), Vector(n, 1.0)};
}

RateResult rate_experiment(const SourceConditionFixture& fx, const RateProblem& pb,
                           std::span<const double> deltas, const RateOptions& opts) {
    check_rate_inputs(fx, pb, deltas);
    RateResult res;
    SpectralModel m{pb.sigma, {}, {}, pb.s};
    for (double delta : deltas) {
        build_data(fx, pb, delta, m.f0, m.y);
        RatePoint pt;
        pt.delta = delta;
        if (opts.rule == RateRule::kAPriori) {
            pt.stop = opts.apriori_constant * std::pow(delta, -1.0 / (2.0 * fx.mu + 1.0));
        } else {
            const double threshold = opts.tau * delta;
            if (std::sqrt(residual_sum(m, 0.0)) <= threshold)
                throw std::runtime_error("rate experiment: initial residual below tau * delta");
            // Doubling windows; each window [T/2, T] is scanned with step T/1e4.
            ScanResult r = scan_interval(m, threshold, 0.0, 1.0, 10000);
            double hi = 1.0;
            while (!r.found && hi < 1e12) {
                r = scan_interval(m, threshold, hi, 2.0 * hi, 5000);
                hi *= 2.0;
            }
            pt.reached = r.found;
            pt.stop = r.t;
        }
        Vector xi = spectral_solution(m, pt.stop);
        kernels::axpy(-1.0, pb.f_dagger, xi);
        pt.error = norm2(xi);
        res.points.push_back(pt);
    }
    fit(res);
    return res;
}

RateResult discrete_rate_experiment(const SourceConditionFixture& fx, const RateProblem& pb,
                                    std::span<const double> deltas, const RateOptions& opts) {
    check_rate_inputs(fx, pb, deltas);
    RateResult res;
    const DiagonalOperator op(pb.sigma);
    SchemeParams params;
    params.s = pb.s;
    params.dt = opts.dt;
    params.op_norm = pb.sigma.front();
    Vector f0, y;
    for (double delta : deltas) {
        build_data(fx, pb, delta, f0, y);
        StoppingRule stop;
        if (opts.rule == RateRule::kAPriori) {
            const double t = opts.apriori_constant * std::pow(delta, -1.0 / (2.0 * fx.mu + 1.0));
            stop = StoppingRule::a_priori(
                std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(t / opts.dt))));
        } else {
            stop = StoppingRule::discrepancy(opts.tau, delta, opts.max_iter);
        }
        RunRecord rec = run(Method::kArm, op, y, f0, params, stop);
        if (rec.stopped_by == StopReason::kInitialBelowThreshold)
            throw std::runtime_error("rate experiment: initial residual below tau * delta");
        RatePoint pt;
        pt.delta = delta;
        pt.stop = static_cast<double>(rec.k_star);
        pt.reached = rec.stopped_by != StopReason::kMaxIter &&
                     rec.stopped_by != StopReason::kDivergence;
        kernels::axpy(-1.0, pb.f_dagger, rec.solution);
        pt.error = norm2(rec.solution);
        res.points.push_back(pt);
    }
    fit(res);
    return res;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("loglog_slope: need two or more matching points");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(x.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    if (sxx == 0.0) throw std::invalid_argument("loglog_slope: x values are identical");
    return sxy / sxx;
}

}  // namespace accreg
