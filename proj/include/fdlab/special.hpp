#pragma once

// Small self-contained special-function kit: log Beta, regularized incomplete
// Beta (continued fraction), unit-sphere surface measure, and the Barenblatt
// tail integral built from them.

namespace fdlab {

double log_beta(double a, double b);
double beta_function(double a, double b);

// Regularized lower incomplete beta I_x(a, b), x in [0, 1].
double reg_inc_beta(double x, double a, double b);

// |S^{d-1}| = 2 pi^{d/2} / Gamma(d/2)
double unit_sphere_measure(double d);

// integral_S^inf (1 + s^2)^{-c} s^{n-1} ds, requires c > n/2, S >= 0.
double barenblatt_tail_integral(double S, double c, double n);

}  // namespace fdlab
