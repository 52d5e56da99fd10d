#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace accreg {

using Vector = std::vector<double>;

struct CsrMatrix;

// Vector kernels. The functions in `kernels` are OpenMP-parallel when the
// library is built with OpenMP; `kernels::serial` holds the plain loops used
// as the reference in tests and benchmarks.
namespace kernels {

double dot(std::span<const double> a, std::span<const double> b);
double weighted_dot(std::span<const double> w, std::span<const double> a,
                    std::span<const double> b);
// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);
// y = alpha * x + beta * y
void axpby(double alpha, std::span<const double> x, double beta, std::span<double> y);
void scale(double alpha, std::span<double> x);
// y = A x
void spmv(const CsrMatrix& a, std::span<const double> x, std::span<double> y);

int max_threads();

namespace serial {
double dot(std::span<const double> a, std::span<const double> b);
double weighted_dot(std::span<const double> w, std::span<const double> a,
                    std::span<const double> b);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void axpby(double alpha, std::span<const double> x, double beta, std::span<double> y);
void scale(double alpha, std::span<double> x);
void spmv(const CsrMatrix& a, std::span<const double> x, std::span<double> y);
}  // namespace serial

}  // namespace kernels
}  // namespace accreg
