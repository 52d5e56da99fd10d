#include "accreg/cg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace accreg {

PcgSolver::PcgSolver(CsrMatrix a, CgOptions opts) : a_(std::move(a)), opts_(opts) {
    if (a_.rows != a_.cols) throw std::invalid_argument("PcgSolver: matrix must be square");
    inv_diag_ = a_.diagonal();
    for (std::size_t i = 0; i < inv_diag_.size(); ++i) {
        if (!(inv_diag_[i] > 0.0)) {
            std::ostringstream msg;
            msg << "PcgSolver: non-positive diagonal entry at row " << i;
            throw std::invalid_argument(msg.str());
        }
        inv_diag_[i] = 1.0 / inv_diag_[i];
    }
}

CgResult PcgSolver::solve(std::span<const double> b, std::span<double> x) const {
    const std::size_t n = a_.rows;
    if (b.size() != n || x.size() != n) throw std::invalid_argument("PcgSolver: length mismatch");

    const double bnorm = std::sqrt(kernels::dot(b, b));
    if (bnorm == 0.0) {
        std::fill(x.begin(), x.end(), 0.0);
        return {};
    }
    const std::size_t cap = opts_.max_iter ? opts_.max_iter : 10 * n;
    const double target = opts_.rel_tol * bnorm;

    Vector r(n), z(n), p(n), ap(n);
    kernels::spmv(a_, x, r);
    kernels::axpby(1.0, b, -1.0, r);
    double rnorm = std::sqrt(kernels::dot(r, r));
    if (rnorm <= target) return {0, rnorm / bnorm};

    for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag_[i] * r[i];
    p = z;
    double rz = kernels::dot(r, z);

    for (std::size_t it = 1; it <= cap; ++it) {
        kernels::spmv(a_, p, ap);
        const double alpha = rz / kernels::dot(p, ap);
        kernels::axpy(alpha, p, x);
        kernels::axpy(-alpha, ap, r);
        rnorm = std::sqrt(kernels::dot(r, r));
        if (rnorm <= target) return {it, rnorm / bnorm};
        for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag_[i] * r[i];
        const double rz_new = kernels::dot(r, z);
        kernels::axpby(1.0, z, rz_new / rz, p);
        rz = rz_new;
    }
    std::ostringstream msg;
    msg << "conjugate gradients did not converge in " << cap
        << " iterations (relative residual " << rnorm / bnorm << ")";
    throw SolverError(msg.str(), rnorm / bnorm);
}

}  // namespace accreg
