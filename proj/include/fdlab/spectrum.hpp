#pragma once

#include <vector>

#include "fdlab/constants.hpp"
#include "fdlab/profiles.hpp"

// Generalized eigensolver for the linearization around the Barenblatt
// profile, one angular mode at a time. The stiffness form is
//   a(f,f) = int (alpha^2 f'^2 + l(l+d-2) f^2/r^2) B r^{n-1} dr
// and the mass form is b(f,f) = int f^2 B^{2-m} r^{n-1} dr, assembled with
// natural (no-flux) truncation at both ends so constants stay exactly in the
// l = 0 kernel; the domain-doubling audit covers the truncation error.
// Self-contained tridiagonal solver: bisection on Sturm counts plus inverse
// iteration.

namespace fdlab {

struct ModeForms {
    std::vector<double> diag;     // stiffness tridiagonal
    std::vector<double> offdiag;  // size N-1
    std::vector<double> b_diag;   // diagonal mass matrix
};

ModeForms assemble_mode(int l, const RadialGrid& g, const DerivedParameters& dp);

// a(f,f) and b(f,f) for an explicit vector, for Rayleigh-quotient checks.
double form_a(const ModeForms& forms, const std::vector<double>& f);
double form_b(const ModeForms& forms, const std::vector<double>& f);

struct ModeEigen {
    int l = 0;
    double lambda = 0.0;
    RadialField eigenfunction;
    bool converged = false;
};

// Smallest admissible eigenvalue of the mode: for l >= 1 the smallest
// generalized eigenvalue; for l = 0 the smallest on the complement of
// constants in the b-inner product (the exact zero mode is deflated and the
// returned eigenvector is b-orthogonalized against constants).
ModeEigen smallest_eigenvalue(int l, const RadialGrid& g, const DerivedParameters& dp);

struct SpectralResult {
    std::vector<ModeEigen> modes;
    double gap = 0.0;
    int gap_mode = 0;
    double closed_form = 0.0;
    double rel_dev = 0.0;
};

SpectralResult hardy_poincare_gap(const DerivedParameters& dp, const RadialGrid& g,
                                  int l_max);

// (baseline 4 alpha^2, improved 4 alpha^2 + 2 zeta, linearized 2(1-m) Lambda);
// asserts the identity 2(1-m) Lambda = 4 alpha^2 + 4 zeta.
struct RatePrediction {
    double baseline = 0.0;
    double improved = 0.0;
    double linearized = 0.0;
};
RatePrediction rate_prediction(const DerivedParameters& dp, double lambda_gap);

}  // namespace fdlab
