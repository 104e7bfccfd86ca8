#include "smoothnorm/special_functions.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace smoothnorm {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kSqrt2Pi = 2.50662827463100050242;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;
constexpr double kLog2Pi = 1.83787706640934548356;

void require_finite(double x, const char* who) {
    if (!std::isfinite(x)) {
        throw std::domain_error(std::string(who) + ": argument must be finite");
    }
}

// Peter Acklam's rational approximation to the normal quantile
// (relative error < 1.15e-9 everywhere); refined by the caller.
double normal_quantile_initial(double p) {
    static const double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                -2.759285104469687e+02, 1.383577518672690e+02,
                                -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                -1.556989798598866e+02, 6.680131188771972e+01,
                                -1.328068155288572e+01};
    static const double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                -2.400758277161838e+00, -2.549732539343734e+00,
                                4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                2.445134137142996e+00, 3.754408661907416e+00};
    const double p_low = 0.02425;

    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p <= 1.0 - p_low) {
        const double q = p - 0.5;
        const double r = q * q;
        return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
               (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    }
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
}

// Solves Phi(-x) = p for log(p) far in the lower tail, where the CDF
// underflows and the Halley polish cannot run. Uses the expansion
// Phi(-x) ~ phi(x)/x * (1 - 1/x^2 + 3/x^4).
double tail_quantile_from_log(double log_p) {
    const double t = -2.0 * log_p;
    double x = std::sqrt(t);
    for (int i = 0; i < 4; ++i) {
        const double x2 = x * x;
        const double corr = std::log1p(-1.0 / x2 + 3.0 / (x2 * x2));
        x = std::sqrt(t - kLog2Pi - 2.0 * std::log(x) + 2.0 * corr);
    }
    return x;
}

double regularized_gamma_p_series(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    for (int n = 1; n < 1000; ++n) {
        term *= x / (a + n);
        sum += term;
        if (std::fabs(term) < std::fabs(sum) * 1e-17) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Upper tail Q(a, x) by modified Lentz continued fraction.
double regularized_gamma_q_cf(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 1000; ++i) {
        const double an = -static_cast<double>(i) * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-16) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

double regularized_gamma_p(double a, double x) {
    if (x <= 0.0) return 0.0;
    if (x < a + 1.0) return regularized_gamma_p_series(a, x);
    return 1.0 - regularized_gamma_q_cf(a, x);
}

double chi_square_pdf(double x, int k) {
    const double a = 0.5 * k;
    return std::exp((a - 1.0) * std::log(x) - 0.5 * x - a * std::log(2.0) - std::lgamma(a));
}

}  // namespace

double std_normal_cdf(double x) {
    require_finite(x, "std_normal_cdf");
    return 0.5 * std::erfc(-x * kInvSqrt2);
}

double std_normal_pdf(double x) {
    require_finite(x, "std_normal_pdf");
    return kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

double std_normal_quantile(double p) {
    if (!std::isfinite(p) || p <= 0.0 || p >= 1.0) {
        throw std::domain_error("std_normal_quantile: p must lie strictly in (0,1)");
    }
    if (p < 1e-300) {
        return -tail_quantile_from_log(std::log(p));
    }
    double x = normal_quantile_initial(p);
    // One Halley step against the erfc-based CDF.
    const double e = std_normal_cdf(x) - p;
    const double u = e * kSqrt2Pi * std::exp(0.5 * x * x);
    x -= u / (1.0 + 0.5 * x * u);
    return x;
}

double chi_square_cdf(double x, int k) {
    if (k < 1) throw std::domain_error("chi_square_cdf: k must be a positive integer");
    if (!std::isfinite(x) || x < 0.0) throw std::domain_error("chi_square_cdf: x must be finite and >= 0");
    return regularized_gamma_p(0.5 * k, 0.5 * x);
}

double chi_square_quantile(double p, int k) {
    if (k < 1) throw std::domain_error("chi_square_quantile: k must be a positive integer");
    if (!std::isfinite(p) || p < 0.0 || p >= 1.0) {
        throw std::domain_error("chi_square_quantile: p must lie in [0,1)");
    }
    if (p == 0.0) return 0.0;

    // Bracket, then safeguarded Newton from a Wilson-Hilferty start.
    double lo = 0.0;
    double hi = k + 10.0 * std::sqrt(2.0 * k) + 100.0;
    while (chi_square_cdf(hi, k) < p) hi *= 2.0;

    const double z = std_normal_quantile(p);
    const double t = 1.0 - 2.0 / (9.0 * k) + z * std::sqrt(2.0 / (9.0 * k));
    double x = k * t * t * t;
    if (!(x > lo && x < hi)) x = 0.5 * hi;

    for (int iter = 0; iter < 200; ++iter) {
        const double f = chi_square_cdf(x, k) - p;
        if (f > 0.0) {
            hi = x;
        } else {
            lo = x;
        }
        if (std::fabs(f) < 1e-13) break;
        const double dens = chi_square_pdf(x, k);
        double next = x - f / dens;
        if (!std::isfinite(next) || next <= lo || next >= hi) next = 0.5 * (lo + hi);
        if (std::fabs(next - x) < 1e-15 * (1.0 + x)) {
            x = next;
            break;
        }
        x = next;
    }
    return x;
}

QuadratureRule gauss_legendre_rule(int n, double lo, double hi) {
    if (n < 2) throw std::domain_error("gauss_legendre_rule: n must be at least 2");
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi)) {
        throw std::domain_error("gauss_legendre_rule: interval must be finite with lo < hi");
    }

    QuadratureRule rule;
    rule.lo = lo;
    rule.hi = hi;
    rule.nodes.resize(n);
    rule.weights.resize(n);

    const double mid = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    const int m = (n + 1) / 2;
    const double pi = 3.14159265358979323846;

    for (int i = 0; i < m; ++i) {
        // Newton iteration on P_n from the Chebyshev-angle initial guess.
        double z = std::cos(pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = z;
            for (int j = 2; j <= n; ++j) {
                const double p2 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            pp = n * (z * p1 - p0) / (z * z - 1.0);
            const double dz = p1 / pp;
            z -= dz;
            if (std::fabs(dz) < 1e-15) break;
        }
        const double w = 2.0 / ((1.0 - z * z) * pp * pp);
        rule.nodes[i] = mid - half * z;
        rule.nodes[n - 1 - i] = mid + half * z;
        rule.weights[i] = half * w;
        rule.weights[n - 1 - i] = half * w;
    }
    return rule;
}

}  // namespace smoothnorm
