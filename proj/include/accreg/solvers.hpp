#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "accreg/linear_operator.hpp"

namespace accreg {

enum class Method { kLandweber, kNu, kNesterov, kArm, kMsvm, kEuler };

std::string_view method_name(Method m);
Method parse_method(std::string_view name);  // throws std::invalid_argument

enum class StepCheck {
    kProofBound,  // dt * ||K|| <= 1 (ARM, MSVM) and the classical bounds otherwise
    kNone,
};

struct SchemeParams {
    double s = 1.0;
    double dt = 0.1;
    double nu = 0.5;
    double alpha = 3.0;
    double omega = 1.0;
    StepCheck step_check = StepCheck::kProofBound;
    std::optional<double> op_norm;  // ||K||; estimated when needed and absent
};

struct IterationState {
    Vector f;
    Vector f_prev;
    Vector q;     // velocity, second-order schemes only
    Vector grad;  // K*(y - K f) at f; empty when the scheme does not keep it
    double residual_norm = 0.0;
    std::size_t k = 0;
    double dt = 0.0;
    double t = 0.0;
};

IterationState initial_state(const LinearOperator& op, std::span<const double> y,
                             std::span<const double> f0, double dt = 0.0);

std::pair<double, double> arm_coefficients(std::size_t k, double s, double dt);
std::pair<double, double> msv_coefficients(std::size_t k, double s, double dt);
std::pair<double, double> euler_coefficients(std::size_t k, double s, double dt);
std::pair<double, double> nu_coefficients(std::size_t k, double nu);

// f^{k+1} = f^k + a (f^k - f^{k-1}) + omega K*(y - K f^k).
IterationState semi_iterative_step(IterationState state, double a_k, double omega_k,
                                   const LinearOperator& op, std::span<const double> y);
// Variable-step form: t advances by dt_k instead of being k * dt.
IterationState semi_iterative_step(IterationState state, double a_k, double omega_k,
                                   double dt_k, const LinearOperator& op,
                                   std::span<const double> y);

IterationState sv_step(IterationState state, const SchemeParams& p, const LinearOperator& op,
                       std::span<const double> y);
IterationState msv_step(IterationState state, const SchemeParams& p, const LinearOperator& op,
                        std::span<const double> y);
IterationState nu_step(IterationState state, const SchemeParams& p, const LinearOperator& op,
                       std::span<const double> y);
IterationState nesterov_step(IterationState state, const SchemeParams& p,
                             const LinearOperator& op, std::span<const double> y);
IterationState landweber_step(IterationState state, const SchemeParams& p,
                              const LinearOperator& op, std::span<const double> y);
IterationState euler_step(IterationState state, const SchemeParams& p, const LinearOperator& op,
                          std::span<const double> y);

IterationState step(Method m, IterationState state, const SchemeParams& p,
                    const LinearOperator& op, std::span<const double> y);

struct StoppingRule {
    enum class Kind { kAPriori, kDiscrepancy, kMaxIter };
    Kind kind = Kind::kMaxIter;
    std::size_t k_star = 0;
    double tau = 0.0;
    double delta = 0.0;
    std::size_t max_iter = 5000;

    static StoppingRule a_priori(std::size_t k_star);
    static StoppingRule discrepancy(double tau, double delta, std::size_t max_iter = 5000);
    static StoppingRule max_iterations(std::size_t n);
    void validate() const;
};

enum class StopReason { kAPriori, kDiscrepancy, kMaxIter, kInitialBelowThreshold, kDivergence };
std::string_view stop_reason_name(StopReason r);

struct RunRecord {
    std::string method;
    SchemeParams params;
    double tau = 0.0;
    double delta = 0.0;
    double delta_prime = 0.0;
    Vector residual_history;
    Vector error_history;
    std::size_t k_star = 0;
    StopReason stopped_by = StopReason::kMaxIter;
    bool step_bound_exceeded = false;
    Vector solution;

    double final_error() const;
};

struct RunOptions {
    // Relative error is measured in the source inner product of the operator.
    std::optional<Vector> truth;
    bool keep_solution = true;
};

// Throws std::invalid_argument for inadmissible parameters.
void validate_params(Method m, const SchemeParams& p, double op_norm);

RunRecord run(Method m, const LinearOperator& op, std::span<const double> y,
              std::span<const double> f0, const SchemeParams& params, const StoppingRule& stop,
              const RunOptions& opts = {});

// r_k(lambda): the iterate after k steps on K = sqrt(lambda), y = 0, f0 = 1.
double residual_polynomial(Method m, std::size_t k, double lambda, const SchemeParams& p);
// Rows k = 0..k_max, one column per lambda.
std::vector<Vector> residual_polynomials(Method m, std::size_t k_max,
                                         std::span<const double> lambdas,
                                         const SchemeParams& p);

}  // namespace accreg
