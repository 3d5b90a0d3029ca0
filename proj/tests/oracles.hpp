#pragma once

// Test-side numerical oracles, independent of the library's closed forms:
// adaptive Simpson quadrature (finite intervals and the half line) and a
// log-log slope helper for convergence-order checks.

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace oracle {

using Fn = std::function<double(double)>;

inline double simpson(double a, double b, double fa, double fm, double fb) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double simpson_adapt(const Fn& f, double a, double b, double fa, double fm,
                            double fb, double whole, double tol, int depth) {
    const double mid = 0.5 * (a + b);
    const double lm = 0.5 * (a + mid), rm = 0.5 * (mid + b);
    const double flm = f(lm), frm = f(rm);
    const double left = simpson(a, mid, fa, flm, fm);
    const double right = simpson(mid, b, fm, frm, fb);
    const double err = left + right - whole;
    if (depth <= 0 || std::abs(err) <= 15.0 * tol) return left + right + err / 15.0;
    return simpson_adapt(f, a, mid, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_adapt(f, mid, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

inline double integrate(const Fn& f, double a, double b, double tol = 1e-12) {
    const double mid = 0.5 * (a + b);
    const double fa = f(a), fm = f(mid), fb = f(b);
    return simpson_adapt(f, a, b, fa, fm, fb, simpson(a, b, fa, fm, fb), tol, 48);
}

// Integral over (0, inf): [0,1] directly, [1,inf) via the substitution
// r = 1/t. Integrands must vanish fast enough at both ends for this to
// converge; endpoint evaluations at 0 are guarded.
inline double integrate_halfline(const Fn& f, double tol = 1e-12) {
    auto guarded = [&](double r) { return r <= 0.0 ? 0.0 : f(r); };
    auto tail = [&](double t) { return t <= 0.0 ? 0.0 : f(1.0 / t) / (t * t); };
    return integrate(guarded, 0.0, 1.0, tol) + integrate(tail, 0.0, 1.0, tol);
}

// Least-squares slope of log|y| against log x, for convergence-order checks.
// Skips pairs with y = 0.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t k = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (y[i] == 0.0) continue;
        const double lx = std::log(x[i]), ly = std::log(std::abs(y[i]));
        sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
        ++k;
    }
    const double denom = k * sxx - sx * sx;
    return (k * sxy - sx * sy) / denom;
}

}  // namespace oracle
