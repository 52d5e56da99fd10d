#include "accreg/blt.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <utility>

namespace accreg {

BltOperator::BltOperator(std::shared_ptr<const FemSystem> sys) : sys_(std::move(sys)) {
    if (!sys_) throw std::invalid_argument("BltOperator: null system");
    source_inner_ = InnerProduct::gram(std::shared_ptr<const CsrMatrix>(sys_, &sys_->C0));
    data_inner_ = InnerProduct::gram(std::shared_ptr<const CsrMatrix>(sys_, &sys_->C));
}

void BltOperator::apply_impl(std::span<const double> f, std::span<double> out) const {
    const Vector zero_g(sys_->boundary.size(), 0.0);
    const Vector u_d = solve_dirichlet(*sys_, f, zero_g);
    const Vector u_n = solve_neumann(*sys_, f, zero_g);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = u_d[i] - u_n[i];
}

void BltOperator::adjoint_impl(std::span<const double> v, std::span<double> out) const {
    const Vector rhs = sys_->C.multiply(v);
    const Vector w_d = solve_dirichlet_rhs(*sys_, rhs, Vector(sys_->boundary.size(), 0.0));
    const Vector w_n = solve_neumann_rhs(*sys_, rhs);
    for (std::size_t k = 0; k < out.size(); ++k) {
        const std::size_t i = sys_->omega0[k];
        out[k] = w_d[i] - w_n[i];
    }
}

Vector BltOperator::data(std::span<const double> g1, std::span<const double> g2) const {
    const Vector zero_f(sys_->num_sources(), 0.0);
    Vector y = solve_neumann(*sys_, zero_f, g2);
    kernels::axpy(-1.0, solve_dirichlet(*sys_, zero_f, g1), y);
    return y;
}

Vector BltOperator::residual(std::span<const double> f, std::span<const double> g1,
                             std::span<const double> g2) const {
    Vector r = solve_dirichlet(*sys_, f, g1);
    kernels::axpy(-1.0, solve_neumann(*sys_, f, g2), r);
    return r;
}

Vector measure_flux(const FemSystem& fine, std::span<const double> f_fine, const FemSystem& coarse,
                    double g_minus) {
    const Vector g_minus_fine(fine.boundary.size(), g_minus);
    const Vector u = solve_robin(fine, f_fine, g_minus_fine);
    const double two_a = 2.0 * fine.coeff.robin_a;

    std::vector<std::pair<double, double>> samples;  // (angle, flux)
    samples.reserve(fine.boundary.size());
    for (std::size_t i : fine.boundary) {
        const Point& p = fine.mesh->nodes[i];
        samples.emplace_back(std::atan2(p.y, p.x), (u[i] - g_minus) / two_a);
    }
    std::sort(samples.begin(), samples.end());
    const double two_pi = 2.0 * std::numbers::pi;

    Vector g(coarse.boundary.size());
    for (std::size_t b = 0; b < coarse.boundary.size(); ++b) {
        const Point& p = coarse.mesh->nodes[coarse.boundary[b]];
        const double theta = std::atan2(p.y, p.x);
        auto hi = std::lower_bound(samples.begin(), samples.end(), std::make_pair(theta, -HUGE_VAL));
        std::pair<double, double> right = hi == samples.end() ? samples.front() : *hi;
        std::pair<double, double> left = hi == samples.begin() ? samples.back() : *(hi - 1);
        if (hi == samples.end()) right.first += two_pi;
        if (hi == samples.begin()) left.first -= two_pi;
        const double span = right.first - left.first;
        const double w = span > 0.0 ? (theta - left.first) / span : 0.0;
        g[b] = (1.0 - w) * left.second + w * right.second;
    }
    return g;
}

BoundaryData noisy_boundary_data(const BltOperator& op, std::span<const double> g_exact,
                                 const NoiseSpec& noise, double g_minus) {
    const FemSystem& sys = op.system();
    if (g_exact.size() != sys.boundary.size())
        throw std::invalid_argument("noisy_boundary_data: flux has wrong length");
    if (!(noise.relative_level >= 0.0))
        throw std::invalid_argument("noisy_boundary_data: noise level must be nonnegative");
    const double two_a = 2.0 * sys.coeff.robin_a;

    BoundaryData d;
    d.g_exact.assign(g_exact.begin(), g_exact.end());
    d.g = add_uniform_noise(g_exact, noise);
    d.delta_prime = noise.relative_level;
    d.g1.resize(d.g.size());
    d.g2.resize(d.g.size());
    Vector dg1(d.g.size()), dg2(d.g.size());
    for (std::size_t b = 0; b < d.g.size(); ++b) {
        d.g1[b] = g_minus + two_a * d.g[b];
        d.g2[b] = -d.g[b];
        dg1[b] = two_a * (d.g[b] - g_exact[b]);
        dg2[b] = -(d.g[b] - g_exact[b]);
    }
    d.delta = op.data_inner().norm(op.data(dg1, dg2));
    return d;
}

BoundaryData simulate_measurements(const FemSystem& fine, std::span<const double> f_fine,
                                   const BltOperator& op, const NoiseSpec& noise,
                                   double g_minus) {
    const Vector g = measure_flux(fine, f_fine, op.system(), g_minus);
    BoundaryData d = noisy_boundary_data(op, g, noise, g_minus);
    d.inverse_crime = fine.mesh->triangles.size() < 4 * op.system().mesh->triangles.size();
    return d;
}

double relative_error(const FemSystem& sys, std::span<const double> f,
                      std::span<const double> f_true) {
    if (f.size() != sys.num_sources() || f_true.size() != sys.num_sources())
        throw std::invalid_argument("relative_error: vectors must live on Omega0");
    Vector e(f.begin(), f.end());
    kernels::axpy(-1.0, f_true, e);
    const double ref = std::sqrt(kernels::dot(f_true, sys.C0.multiply(f_true)));
    if (!(ref > 0.0)) throw std::invalid_argument("relative_error: true source is zero");
    return std::sqrt(std::max(0.0, kernels::dot(e, sys.C0.multiply(e)))) / ref;
}

double omega_norm(const LinearOperator& op, int iters, std::uint64_t seed) {
    const double n = estimate_norm(op, iters, seed);
    return 1.0 / (n * n);
}

double omega_norm_one_step(const LinearOperator& op) {
    const Vector one(op.source_dim(), 1.0);
    const Vector kk = op.apply_adjoint(op.apply(one));
    return op.source_inner().norm(one) / op.source_inner().norm(kk);
}

Eigen::MatrixXd dense_matrix(const LinearOperator& op) {
    Eigen::MatrixXd a(op.data_dim(), op.source_dim());
    Vector e(op.source_dim(), 0.0);
    for (std::size_t j = 0; j < op.source_dim(); ++j) {
        e[j] = 1.0;
        const Vector col = op.apply(e);
        e[j] = 0.0;
        for (std::size_t i = 0; i < col.size(); ++i) a(static_cast<Eigen::Index>(i),
                                                       static_cast<Eigen::Index>(j)) = col[i];
    }
    return a;
}

namespace {

Eigen::MatrixXd to_dense(const CsrMatrix& m) {
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m.rows),
                                              static_cast<Eigen::Index>(m.cols));
    for (std::size_t i = 0; i < m.rows; ++i)
        for (std::size_t p = m.row_ptr[i]; p < m.row_ptr[i + 1]; ++p)
            d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(m.col_idx[p])) = m.values[p];
    return d;
}

}  // namespace

Eigen::VectorXd weighted_singular_values(const BltOperator& op) {
    const Eigen::MatrixXd k = dense_matrix(op);
    const Eigen::LLT<Eigen::MatrixXd> lc(to_dense(op.system().C));
    const Eigen::LLT<Eigen::MatrixXd> l0(to_dense(op.system().C0));
    if (lc.info() != Eigen::Success || l0.info() != Eigen::Success)
        throw std::runtime_error("weighted_singular_values: mass matrix is not positive definite");
    // ||K f||_C = ||Lc^T K f|| and f = L0^{-T} g gives ||f||_{C0} = ||g||.
    const Eigen::MatrixXd lct = lc.matrixU();
    const Eigen::MatrixXd kt = l0.matrixU().solve<Eigen::OnTheRight>(lct * k);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(kt);
    return svd.singularValues();
}

double adjoint_defect(const LinearOperator& op, std::span<const double> f,
                      std::span<const double> v) {
    const double lhs = op.data_inner().dot(op.apply(f), v);
    const double rhs = op.source_inner().dot(f, op.apply_adjoint(v));
    return std::abs(lhs - rhs) / (op.source_inner().norm(f) * op.data_inner().norm(v));
}

Vector source_condition_start(const LinearOperator& op, std::span<const double> f_true,
                              std::span<const double> v_star) {
    Vector f0 = op.apply_adjoint(v_star);
    kernels::axpy(1.0, f_true, f0);
    return f0;
}

RunRecord reconstruct(const BltOperator& op, std::span<const double> y_delta, Method method,
                      const SchemeParams& params, const StoppingRule& stop,
                      std::span<const double> f0, std::optional<Vector> f_true) {
    RunOptions opts;
    opts.truth = std::move(f_true);
    return run(method, op, y_delta, f0, params, stop, opts);
}

BltExample blt_example(int id) {
    BltExample ex;
    ex.id = id;
    if (id == 1) {
        ex.omega0 = Region::square(0.0, 0.0, 0.5);
        // Smooth extension; the restriction to Omega0 nodes supplies the indicator.
        ex.source = [](const Point& p) { return 1.0 + p.x + p.y; };
        ex.tau = 1.0;
        ex.dt = 0.125;
    } else if (id == 2) {
        ex.omega0 = Region::disk(-0.5, 0.0, 0.1);
        ex.omega0.unite(Region::disk(0.5, 0.0, 0.1));
        ex.source = [](const Point& p) {
            return p.x < 0.0 ? 1.0 + p.x + p.y : std::exp(1.0 + p.x + p.y);
        };
        ex.tau = 5.0;
        ex.dt = 0.25;
    } else {
        throw std::invalid_argument("blt_example: id must be 1 or 2");
    }
    return ex;
}

BltFixture make_blt_fixture(const BltFixtureOptions& opts) {
    if (opts.data_level <= opts.level)
        throw std::invalid_argument("make_blt_fixture: data_level must exceed level");
    BltFixture fx;
    fx.example = blt_example(opts.example);
    auto coarse_mesh = std::make_shared<const Mesh>(
        mark_omega0(disk_mesh(opts.level, opts.mesh), fx.example.omega0, opts.omega0_mode));
    auto fine_mesh = std::make_shared<const Mesh>(
        mark_omega0(disk_mesh(opts.data_level, opts.mesh), fx.example.omega0, opts.omega0_mode));
    auto sys = std::make_shared<const FemSystem>(assemble(coarse_mesh, opts.coeff));
    fx.sys = sys;
    fx.op = std::make_shared<const BltOperator>(sys);
    fx.f_true = interpolate_omega0(*sys, fx.example.source);
    {
        const FemSystem fine = assemble(fine_mesh, opts.coeff);
        const Vector f_fine = interpolate_omega0(fine, fx.example.source);
        fx.g_exact = measure_flux(fine, f_fine, *sys);
        set_noise(fx, opts.noise);
        fx.data.inverse_crime = fine_mesh->triangles.size() < 4 * coarse_mesh->triangles.size();
    }
    return fx;
}

void set_noise(BltFixture& fx, const NoiseSpec& noise) {
    const bool crime = fx.data.inverse_crime;
    fx.data = noisy_boundary_data(*fx.op, fx.g_exact, noise);
    fx.data.inverse_crime = crime;
    fx.y_delta = fx.op->data(fx.data.g1, fx.data.g2);
}

void write_columns(std::ostream& out, std::span<const double> values) {
    char buf[64];
    for (std::size_t i = 0; i < values.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu %.17g\n", i, values[i]);
        out << buf;
    }
}

}  // namespace accreg
