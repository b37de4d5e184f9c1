#pragma once

#include <cmath>
#include <functional>
#include <limits>

#include "owp/common.hpp"

namespace owp {

// exp(lgamma(a) - lgamma(b)); stable for large arguments.
inline double gamma_ratio(double a, double b) {
    return std::exp(std::lgamma(a) - std::lgamma(b));
}

namespace detail {

// Regularized lower incomplete gamma P(a, x) by series (x < a + 1) or
// continued fraction (x >= a + 1).
inline double regularized_gamma_p(double a, double x) {
    require_domain(a > 0.0 && x >= 0.0, "regularized_gamma_p: need a > 0, x >= 0");
    if (x == 0.0) return 0.0;
    const double lg = std::lgamma(a);
    const double prefix = std::exp(a * std::log(x) - x - lg);
    if (x < a + 1.0) {
        double ap = a;
        double sum = 1.0 / a;
        double del = sum;
        for (int i = 0; i < 500; ++i) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::abs(del) < std::abs(sum) * 1e-16) break;
        }
        return sum * prefix;
    }
    // Lentz's continued fraction for Q(a, x).
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 500; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-16) break;
    }
    return 1.0 - prefix * h;
}

inline double beta_cf(double a, double b, double x) {
    const double tiny = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 500; ++m) {
        const double dm = m;
        double aa = dm * (b - dm) * x / ((qam + 2.0 * dm) * (a + 2.0 * dm));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + dm) * (qab + dm) * x / ((a + 2.0 * dm) * (qap + 2.0 * dm));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-16) break;
    }
    return h;
}

// Regularized incomplete beta I_x(a, b).
inline double regularized_beta(double a, double b, double x) {
    require_domain(a > 0.0 && b > 0.0, "regularized_beta: need a, b > 0");
    require_domain(x >= 0.0 && x <= 1.0, "regularized_beta: need x in [0, 1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
    return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

// Inverts a monotone CDF on [0, hi) by bisection with exponential bracket growth.
inline double invert_cdf(const std::function<double(double)>& cdf, double prob,
                         double initial_hi) {
    double lo = 0.0;
    double hi = initial_hi;
    for (int i = 0; i < 200 && cdf(hi) < prob; ++i) hi *= 2.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (cdf(mid) < prob)
            lo = mid;
        else
            hi = mid;
        if (hi - lo <= 1e-13 * (1.0 + hi)) break;
    }
    return 0.5 * (lo + hi);
}

}  // namespace detail

// CDF of chi(d), the norm of a d-dimensional standard normal vector.
inline double chi_cdf(double dof, double x) {
    if (x <= 0.0) return 0.0;
    return detail::regularized_gamma_p(0.5 * dof, 0.5 * x * x);
}

inline double chi_quantile(double dof, double prob) {
    require_domain(prob >= 0.0 && prob < 1.0, "chi_quantile: need prob in [0, 1)");
    if (prob == 0.0) return 0.0;
    return detail::invert_cdf([dof](double x) { return chi_cdf(dof, x); }, prob,
                              std::sqrt(dof) + 1.0);
}

// CDF of the F(d1, d2) distribution.
inline double f_cdf(double d1, double d2, double x) {
    if (x <= 0.0) return 0.0;
    return detail::regularized_beta(0.5 * d1, 0.5 * d2, d1 * x / (d1 * x + d2));
}

inline double f_quantile(double d1, double d2, double prob) {
    require_domain(prob >= 0.0 && prob < 1.0, "f_quantile: need prob in [0, 1)");
    if (prob == 0.0) return 0.0;
    return detail::invert_cdf([d1, d2](double x) { return f_cdf(d1, d2, x); }, prob, 1.0);
}

}  // namespace owp
