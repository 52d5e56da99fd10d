#include "accreg/kernels.hpp"

#include <cassert>
#include <stdexcept>

#include "accreg/sparse.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace accreg::kernels {

namespace {
// Below this length a parallel region costs more than it saves.
constexpr std::ptrdiff_t kParallelMin = 4096;

void check_sizes(std::size_t a, std::size_t b) {
    if (a != b) throw std::invalid_argument("kernels: vector length mismatch");
}
}  // namespace

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

double dot(std::span<const double> a, std::span<const double> b) {
    check_sizes(a.size(), b.size());
    const auto n = static_cast<std::ptrdiff_t>(a.size());
    double sum = 0.0;
#pragma omp parallel for reduction(+ : sum) schedule(static) if (n >= kParallelMin)
    for (std::ptrdiff_t i = 0; i < n; ++i) sum += a[i] * b[i];
    return sum;
}

double weighted_dot(std::span<const double> w, std::span<const double> a,
                    std::span<const double> b) {
    check_sizes(a.size(), b.size());
    check_sizes(w.size(), a.size());
    const auto n = static_cast<std::ptrdiff_t>(a.size());
    double sum = 0.0;
#pragma omp parallel for reduction(+ : sum) schedule(static) if (n >= kParallelMin)
    for (std::ptrdiff_t i = 0; i < n; ++i) sum += w[i] * a[i] * b[i];
    return sum;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    check_sizes(x.size(), y.size());
    const auto n = static_cast<std::ptrdiff_t>(x.size());
#pragma omp parallel for schedule(static) if (n >= kParallelMin)
    for (std::ptrdiff_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void axpby(double alpha, std::span<const double> x, double beta, std::span<double> y) {
    check_sizes(x.size(), y.size());
    const auto n = static_cast<std::ptrdiff_t>(x.size());
#pragma omp parallel for schedule(static) if (n >= kParallelMin)
    for (std::ptrdiff_t i = 0; i < n; ++i) y[i] = alpha * x[i] + beta * y[i];
}

void scale(double alpha, std::span<double> x) {
    const auto n = static_cast<std::ptrdiff_t>(x.size());
#pragma omp parallel for schedule(static) if (n >= kParallelMin)
    for (std::ptrdiff_t i = 0; i < n; ++i) x[i] *= alpha;
}

void spmv(const CsrMatrix& a, std::span<const double> x, std::span<double> y) {
    check_sizes(x.size(), a.cols);
    check_sizes(y.size(), a.rows);
    const auto n = static_cast<std::ptrdiff_t>(a.rows);
    const std::size_t* rp = a.row_ptr.data();
    const std::size_t* ci = a.col_idx.data();
    const double* v = a.values.data();
#pragma omp parallel for schedule(static) if (n >= kParallelMin / 4)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        double sum = 0.0;
        for (std::size_t p = rp[i]; p < rp[i + 1]; ++p) sum += v[p] * x[ci[p]];
        y[i] = sum;
    }
}

namespace serial {

double dot(std::span<const double> a, std::span<const double> b) {
    check_sizes(a.size(), b.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
    return sum;
}

double weighted_dot(std::span<const double> w, std::span<const double> a,
                    std::span<const double> b) {
    check_sizes(a.size(), b.size());
    check_sizes(w.size(), a.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sum += w[i] * a[i] * b[i];
    return sum;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    check_sizes(x.size(), y.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

void axpby(double alpha, std::span<const double> x, double beta, std::span<double> y) {
    check_sizes(x.size(), y.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = alpha * x[i] + beta * y[i];
}

void scale(double alpha, std::span<double> x) {
    for (double& xi : x) xi *= alpha;
}

void spmv(const CsrMatrix& a, std::span<const double> x, std::span<double> y) {
    check_sizes(x.size(), a.cols);
    check_sizes(y.size(), a.rows);
    for (std::size_t i = 0; i < a.rows; ++i) {
        double sum = 0.0;
        for (std::size_t p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p)
            sum += a.values[p] * x[a.col_idx[p]];
        y[i] = sum;
    }
}

}  // namespace serial
}  // namespace accreg::kernels
