#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>

#include <Eigen/Dense>

#include "accreg/fem.hpp"
#include "accreg/linear_operator.hpp"
#include "accreg/mesh.hpp"
#include "accreg/solvers.hpp"

namespace accreg {

// K f = u_D(f, 0) - u_N(f, 0) from sources on Omega0 nodes to nodal fields,
// with the C0 and C mass inner products. The adjoint solves
// L w_D = C v (w_D = 0 on the boundary) and L w_N = C v and returns
// (w_D - w_N) on Omega0.
class BltOperator final : public LinearOperator {
public:
    explicit BltOperator(std::shared_ptr<const FemSystem> sys);

    std::size_t source_dim() const override { return sys_->num_sources(); }
    std::size_t data_dim() const override { return sys_->num_nodes(); }
    const InnerProduct& source_inner() const override { return source_inner_; }
    const InnerProduct& data_inner() const override { return data_inner_; }

    const FemSystem& system() const { return *sys_; }
    std::shared_ptr<const FemSystem> system_ptr() const { return sys_; }

    // y = u_N(0, g2) - u_D(0, g1).
    Vector data(std::span<const double> g1, std::span<const double> g2) const;
    // K f - y for given boundary data, from two combined solves:
    // u_D(f, g1) - u_N(f, g2).
    Vector residual(std::span<const double> f, std::span<const double> g1,
                    std::span<const double> g2) const;

protected:
    void apply_impl(std::span<const double> f, std::span<double> out) const override;
    void adjoint_impl(std::span<const double> v, std::span<double> out) const override;

private:
    std::shared_ptr<const FemSystem> sys_;
    InnerProduct source_inner_;
    InnerProduct data_inner_;
};

struct BoundaryData {
    Vector g1;        // Dirichlet trace, one value per boundary node
    Vector g2;        // Neumann flux density
    Vector g;         // noisy outgoing flux
    Vector g_exact;   // noise-free outgoing flux
    double delta_prime = 0.0;
    double delta = 0.0;  // ||y^delta - y||_C on the reconstruction mesh
    bool inverse_crime = false;  // measurement mesh not finer by 4x in elements
};

// Solves the Robin forward problem on the fine system for a source given on
// its Omega0 nodes and returns the outgoing flux g = (u - g_minus) / (2A) at
// the coarse boundary nodes, interpolated in angle along the fine boundary.
// g_minus is a constant incoming flux.
Vector measure_flux(const FemSystem& fine, std::span<const double> f_fine,
                    const FemSystem& coarse, double g_minus = 0.0);

// Adds uniform noise to g and forms g1 = g_minus + 2A g, g2 = -g, and the
// data-space noise level on the coarse system.
BoundaryData noisy_boundary_data(const BltOperator& op, std::span<const double> g_exact,
                                 const NoiseSpec& noise, double g_minus = 0.0);

// measure_flux followed by noisy_boundary_data, with the inverse-crime flag.
BoundaryData simulate_measurements(const FemSystem& fine, std::span<const double> f_fine,
                                   const BltOperator& op, const NoiseSpec& noise,
                                   double g_minus = 0.0);

// ||f - f_true||_{C0} / ||f_true||_{C0}.
double relative_error(const FemSystem& sys, std::span<const double> f,
                      std::span<const double> f_true);

// 1 / ||K||^2 from power iteration.
double omega_norm(const LinearOperator& op, int iters = 200, std::uint64_t seed = 0);
// ||1|| / ||K*K 1|| in the source norm.
double omega_norm_one_step(const LinearOperator& op);

// Dense matrix of K (columns K e_j) and the singular values of K in the
// source and data inner products, sorted descending.
Eigen::MatrixXd dense_matrix(const LinearOperator& op);
Eigen::VectorXd weighted_singular_values(const BltOperator& op);

// |<K f, v>_C - <f, K* v>_{C0}| / (||f||_{C0} ||v||_C).
double adjoint_defect(const LinearOperator& op, std::span<const double> f,
                      std::span<const double> v);

// f0 = f_true + K* v_star.
Vector source_condition_start(const LinearOperator& op, std::span<const double> f_true,
                              std::span<const double> v_star);

// Runs a regularization method on the BLT operator, recording relative
// errors when the true source is known.
RunRecord reconstruct(const BltOperator& op, std::span<const double> y_delta, Method method,
                      const SchemeParams& params, const StoppingRule& stop,
                      std::span<const double> f0,
                      std::optional<Vector> f_true = std::nullopt);

// Source geometry and exact source of the two model problems.
struct BltExample {
    int id = 1;
    Region omega0 = Region::whole();
    std::function<double(const Point&)> source;
    double tau = 1.0;
    double dt = 0.125;
};
BltExample blt_example(int id);  // 1 or 2; throws otherwise

struct BltFixtureOptions {
    int example = 1;
    int level = 2;
    int data_level = 4;
    DiskMeshOptions mesh{7, 3, 0.5};
    Omega0Mode omega0_mode = Omega0Mode::kTriangles;
    Coefficients coeff = Coefficients::blt();
    NoiseSpec noise{0.05, 1};
};

// Reconstruction system, operator, exact source and noisy data in one place.
struct BltFixture {
    BltExample example;
    std::shared_ptr<const FemSystem> sys;
    std::shared_ptr<const BltOperator> op;
    Vector f_true;
    Vector g_exact;  // noise-free flux at the coarse boundary nodes
    BoundaryData data;
    Vector y_delta;
};

BltFixture make_blt_fixture(const BltFixtureOptions& opts);
// Replaces the noise draw, keeping the system and the exact flux.
void set_noise(BltFixture& fixture, const NoiseSpec& noise);

// "index value" lines.
void write_columns(std::ostream& out, std::span<const double> values);

}  // namespace accreg
