#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "accreg/blt.hpp"
#include "accreg/solvers.hpp"

namespace accreg {

// Invalid configuration; the message names the field and the accepted values.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SpectralProblemConfig {
    std::size_t modes = 600;
    double sigma_min = 1e-6;
    double mu = 0.5;  // f_true = (K*K)^mu 1, f0 = 0
};

struct BltProblemConfig {
    int example = 1;
    int level = 2;
    int data_level = 4;
    DiskMeshOptions mesh{7, 3, 0.5};
    std::string mesh_file;       // optional, overrides the built-in mesher
    std::string data_mesh_file;  // optional
    Omega0Mode omega0_mode = Omega0Mode::kTriangles;
    double mu_a = 0.04;
    double mu_s_prime = 1.5;
    double robin_a = 3.2;
    double f0 = 1.0;  // constant initial guess on Omega0
};

// Step sizes relative to omega_norm = 1 / ||K||^2 override the absolute ones.
struct MethodOverrides {
    std::optional<double> dt;
    std::optional<double> omega;
    std::optional<double> dt_scale;
    std::optional<double> omega_scale;
    std::optional<double> s;
    std::optional<double> nu;
    std::optional<double> alpha;
};

struct SweepConfig {
    std::string parameter;  // tau, dt, s, omega, nu, alpha, delta_prime
    std::vector<double> values;
};

struct RatesConfig {
    std::vector<double> mu;
    std::vector<double> deltas;
    std::size_t modes = 600;
    double s = 1.0;
    double tau = 2.0;
    double dt = 1.0;
};

struct ExperimentConfig {
    std::string name;
    std::string problem_type = "blt";  // blt or spectral
    BltProblemConfig blt;
    SpectralProblemConfig spectral;
    std::vector<Method> methods;
    SchemeParams params;
    std::map<Method, MethodOverrides> overrides;
    std::vector<double> delta_primes{0.05};
    std::uint64_t seed = 1;
    std::string stopping = "discrepancy";  // discrepancy or max_iter
    double tau = 1.0;
    std::size_t n_max = 5000;
    std::optional<SweepConfig> sweep;
    std::optional<RatesConfig> rates;
    std::string output;
    std::string history;
};

// Parses JSON text; throws ConfigError.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

// One row of output: the run and the sweep value it belongs to.
struct ExperimentRecord {
    RunRecord run;
    std::optional<double> sweep_value;
};

// Runs every (sweep value, delta', method) point, up to `workers` at a time.
// Records come back in declaration order: sweep value, then delta', then
// method.
std::vector<ExperimentRecord> run_config(const ExperimentConfig& cfg, unsigned workers = 1);

// Step size written to the dt column: omega for the nu-method and Nesterov,
// dt otherwise.
double reported_step(const RunRecord& r);

// "method,delta_prime,tau,dt,s,k_star,E_kstar,stopped_by", %.5e numbers.
void emit_csv(std::span<const ExperimentRecord> records, std::ostream& out);
// Long format E_k and residual series: method,delta_prime,sweep,k,residual,E_k.
void emit_history_csv(std::span<const ExperimentRecord> records, std::ostream& out);

struct CheckOutcome {
    bool passed = true;
    std::vector<std::string> messages;
};

// tau sweeps: k* nonincreasing in tau once below N_max, 10% slack.
// dt sweeps: k* dt constant within 10% between consecutive points that
// stopped by the discrepancy principle, up to the first divergence.
// compare (no sweep): k* of ARM and the nu-method <= k* of Landweber / 5,
// and E grows with delta' for every method.
CheckOutcome check_trends(const ExperimentConfig& cfg, std::span<const ExperimentRecord> records);

struct RateRow {
    double mu = 0.0;
    std::string kind;  // continuous or discrete
    double error_slope = 0.0;
    double error_theory = 0.0;
    double stop_slope = 0.0;
    double stop_theory = 0.0;
};

// Per-mu slope table for the flow and discrete ARM with discrepancy stopping.
std::vector<RateRow> rate_report(const RatesConfig& cfg);
void emit_rate_csv(std::span<const RateRow> rows, std::ostream& out);

}  // namespace accreg
