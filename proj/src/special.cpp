#include "fdlab/special.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace fdlab {

double log_beta(double a, double b) {
    if (!(a > 0.0) || !(b > 0.0))
        throw std::invalid_argument("log_beta: parameters must be positive");
    return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

double beta_function(double a, double b) { return std::exp(log_beta(a, b)); }

namespace {

// Continued fraction for the incomplete beta, modified Lentz iteration.
double betacf(double a, double b, double x) {
    constexpr int max_iter = 300;
    const double eps = std::numeric_limits<double>::epsilon();
    const double fpmin = std::numeric_limits<double>::min() / eps;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < fpmin) d = fpmin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= max_iter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) <= eps) return h;
    }
    throw std::runtime_error("reg_inc_beta: continued fraction did not converge");
}

}  // namespace

double reg_inc_beta(double x, double a, double b) {
    if (!(a > 0.0) || !(b > 0.0))
        throw std::invalid_argument("reg_inc_beta: parameters must be positive");
    if (!(x >= 0.0 && x <= 1.0))
        throw std::invalid_argument("reg_inc_beta: x must lie in [0, 1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double lnfront =
        a * std::log(x) + b * std::log1p(-x) - log_beta(a, b);
    const double front = std::exp(lnfront);
    if (x < (a + 1.0) / (a + b + 2.0))
        return front * betacf(a, b, x) / a;
    return 1.0 - std::exp(b * std::log1p(-x) + a * std::log(x) - log_beta(b, a)) *
                     betacf(b, a, 1.0 - x) / b;
}

double unit_sphere_measure(double d) {
    if (!(d > 0.0))
        throw std::invalid_argument("unit_sphere_measure: dimension must be positive");
    constexpr double pi = 3.14159265358979323846;
    return 2.0 * std::exp(0.5 * d * std::log(pi) - std::lgamma(0.5 * d));
}

double barenblatt_tail_integral(double S, double c, double n) {
    if (!(S >= 0.0)) throw std::invalid_argument("barenblatt_tail_integral: S >= 0 required");
    if (!(c > 0.5 * n))
        throw std::invalid_argument("barenblatt_tail_integral: integral diverges, need c > n/2");
    // substitute w = s^2 then t = 1/(1+w): tail = (1/2) B_x(c - n/2, n/2), x = 1/(1+S^2)
    const double x = 1.0 / (1.0 + S * S);
    const double a = c - 0.5 * n;
    const double b = 0.5 * n;
    return 0.5 * beta_function(a, b) * reg_inc_beta(x, a, b);
}

}  // namespace fdlab
