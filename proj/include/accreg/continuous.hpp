#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "accreg/kernels.hpp"

namespace accreg {

// Filter of the continuous flow: r(t, lambda) = 2^s Gamma(s+1) J_s(x) / x^s,
// x = sqrt(lambda) t. Equals 1 at t = 0 and is bounded by 1 in modulus.
double bias_r(double s, double t, double lambda);
// d r / d t.
double bias_r_dot(double s, double t, double lambda);
// g(t, lambda) = (1 - r(t, lambda)) / lambda.
double filter_g(double s, double t, double lambda);

// RK4 integration of r'' + ((1+2s)/tau) r' + lambda r = 0 from tau = 1e-4
// (two-term series data), in log time up to tau = 1 and uniform time after.
double ode_bias_oracle(double s, double t, double lambda, int n_steps);

// Diagonal representation of the flow: K = diag(sigma), f0 and y^delta as
// coefficient vectors.
struct SpectralModel {
    Vector sigma;
    Vector f0;
    Vector y;
    double s = 1.0;

    std::size_t size() const { return sigma.size(); }
    void validate() const;
};

Vector spectral_solution(const SpectralModel& model, double t);
double spectral_residual(const SpectralModel& model, double t);
double discrepancy_chi(const SpectralModel& model, double t, double tau, double delta);
// 1/2 ||f'(t)||^2 + 1/2 ||K f(t) - y||^2
double spectral_energy(const SpectralModel& model, double t);

struct StoppingTime {
    enum class Status { kFound, kInitialBelowThreshold, kNotReached };
    double t = 0.0;
    Status status = Status::kNotReached;
};

// First root of chi on [0, t_max]: uniform scan with step t_max / scan_points,
// then bisection to 1e-8 (relative to max(1, t)).
StoppingTime find_stopping_time(const SpectralModel& model, double tau, double delta,
                                double t_max, std::size_t scan_points = 10000);

// Source condition f0 - f_dagger = (K*K)^mu v0.
struct SourceConditionFixture {
    double mu = 0.5;
    double rho = 0.0;
    Vector v0;

    void validate() const;
};

// Problem template for rate studies: spectrum, exact solution, damping and a
// fixed noise direction (normalized internally).
struct RateProblem {
    Vector sigma;
    Vector f_dagger;
    Vector noise_direction;
    double s = 1.0;
};

enum class RateRule { kAPriori, kDiscrepancy };

struct RateOptions {
    RateRule rule = RateRule::kDiscrepancy;
    double tau = 2.0;
    double apriori_constant = 1.0;  // T = c * delta^{-1/(2 mu + 1)}
    double dt = 1.0;                // discrete runs only
    std::size_t max_iter = 1000000;  // discrete runs only
};

struct RatePoint {
    double delta = 0.0;
    double stop = 0.0;  // T* (continuous) or k* (discrete)
    double error = 0.0;
    bool reached = true;
};

struct RateResult {
    std::vector<RatePoint> points;
    double error_slope = 0.0;
    double stop_slope = 0.0;
};

// Default problem for rate experiments: log-spaced spectrum on [1e-6, 1],
// f_dagger = 0, uniform noise direction.
RateProblem default_rate_problem(std::size_t n_modes = 1200, double s = 1.0);
SourceConditionFixture unit_source(double mu, std::size_t n);

// Continuous flow: evaluates the spectral solution at T*(delta).
RateResult rate_experiment(const SourceConditionFixture& fixture, const RateProblem& problem,
                           std::span<const double> deltas, const RateOptions& opts = {});
// Discrete ARM (Stormer-Verlet) on the diagonal operator.
RateResult discrete_rate_experiment(const SourceConditionFixture& fixture,
                                    const RateProblem& problem, std::span<const double> deltas,
                                    const RateOptions& opts = {});

// Least-squares slope of log(y) against log(x).
double loglog_slope(std::span<const double> x, std::span<const double> y);

}  // namespace accreg
