#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>

#include "accreg/sparse.hpp"

namespace accreg {

class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, double residual)
        : std::runtime_error(what), residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

struct CgOptions {
    double rel_tol = 1e-10;
    std::size_t max_iter = 0;  // 0 means 10 * n
};

struct CgResult {
    std::size_t iterations = 0;
    double rel_residual = 0.0;
};

// Jacobi-preconditioned conjugate gradients for an SPD matrix.
class PcgSolver {
public:
    PcgSolver() = default;
    explicit PcgSolver(CsrMatrix a, CgOptions opts = {});

    const CsrMatrix& matrix() const { return a_; }
    std::size_t size() const { return a_.rows; }

    // Solves A x = b using x as the starting guess; throws SolverError on
    // non-convergence.
    CgResult solve(std::span<const double> b, std::span<double> x) const;

private:
    CsrMatrix a_;
    Vector inv_diag_;
    CgOptions opts_;
};

}  // namespace accreg
