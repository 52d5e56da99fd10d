#pragma once

namespace accreg {

// Bessel function of the first kind J_s(x) for real order s >= -1/2, x >= 0.
// Power series for small or order-dominated arguments, Hankel's asymptotic
// expansion (with upward order recurrence) for large arguments.
double bessel_j(double s, double x);

// Argument at which bessel_j switches from the series to the asymptotic branch.
double bessel_switch_point(double s);

namespace detail {
double bessel_j_series(double s, double x);
double bessel_j_asymptotic(double s, double x);
}  // namespace detail

}  // namespace accreg
