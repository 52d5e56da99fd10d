#include "accreg/special.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace accreg {

namespace {
constexpr double kSwitch = 20.0;
}

double bessel_switch_point(double s) { return std::max(kSwitch, s); }

namespace detail {

double bessel_j_series(double s, double x) {
    if (x == 0.0) {
        if (s == 0.0) return 1.0;
        return s > 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    }
    const long double h = 0.5L * x;
    const long double h2 = h * h;
    long double term = std::pow(h, static_cast<long double>(s)) / std::tgamma(static_cast<long double>(s) + 1.0L);
    long double sum = term;
    for (int m = 1; m < 500; ++m) {
        term *= -h2 / (static_cast<long double>(m) * (static_cast<long double>(m) + s));
        sum += term;
        if (std::fabs(term) <= 1e-21L * std::fabs(sum) && static_cast<long double>(m) > h) break;
    }
    return static_cast<double>(sum);
}

// Hankel expansion: J_s(x) = sqrt(2/(pi x)) (P cos chi - Q sin chi) with
// chi = x - (s/2 + 1/4) pi, summed until the terms stop decreasing.
double bessel_j_asymptotic(double s, double x) {
    const double mu = 4.0 * s * s;
    const double inv8x = 1.0 / (8.0 * x);
    double p = 1.0, q = 0.0;
    double term = 1.0;
    double prev = std::numeric_limits<double>::infinity();
    for (int k = 1; k < 200; ++k) {
        const double odd = 2.0 * k - 1.0;
        term *= (mu - odd * odd) * inv8x / k;
        const double mag = std::abs(term);
        if (mag > prev) break;
        prev = mag;
        // a_k / x^k alternates between Q (odd k) and P (even k) with signs
        // +, -, -, +, + ...
        const int r = k % 4;
        if (r == 1) q += term;
        else if (r == 2) p -= term;
        else if (r == 3) q -= term;
        else p += term;
        if (mag < 1e-17) break;
    }
    const double phase = (0.5 * s + 0.25) * std::numbers::pi;
    const double c = std::cos(x) * std::cos(phase) + std::sin(x) * std::sin(phase);
    const double sn = std::sin(x) * std::cos(phase) - std::cos(x) * std::sin(phase);
    return std::sqrt(2.0 / (std::numbers::pi * x)) * (p * c - q * sn);
}

}  // namespace detail

double bessel_j(double s, double x) {
    if (s < -0.5) throw std::invalid_argument("bessel_j: order must be >= -1/2");
    if (x < 0.0 || std::isnan(x)) throw std::invalid_argument("bessel_j: argument must be >= 0");
    if (x <= bessel_switch_point(s)) return detail::bessel_j_series(s, x);
    if (s <= 2.0) return detail::bessel_j_asymptotic(s, x);

    // Upward recurrence J_{n+1} = (2n/x) J_n - J_{n-1} is stable while n < x.
    const double base = s - std::floor(s);
    double jm = detail::bessel_j_asymptotic(base, x);
    double j = detail::bessel_j_asymptotic(base + 1.0, x);
    for (double n = base + 1.0; n < s - 0.5; n += 1.0) {
        const double next = 2.0 * n / x * j - jm;
        jm = j;
        j = next;
    }
    return j;
}

}  // namespace accreg
