#pragma once

#include <optional>
#include <utility>

#include "fdlab/constants.hpp"
#include "fdlab/profiles.hpp"

// Scalar functionals: weighted norms, relative entropy and Fisher
// information, the interpolation deficit, tail functional, best-matching
// entropy, linearized quadratic forms, and inequality-ratio diagnostics.
//
// Discrete convention: derivatives of pressure-like quantities live on
// interior edges, as differences of cell-center values divided by the
// center-to-center spacing. This matches the finite-volume flux stencil of
// the flow module, so the discrete entropy satisfies dF/dt = -I up to time
// discretization error only.

namespace fdlab {

struct EntropyReport {
    double t = 0.0;
    double entropy = 0.0;
    double fisher = 0.0;
    double quotient = 0.0;  // NaN when undefined
    bool quotient_defined = false;
    double mass = 0.0;
    double second_moment = 0.0;
    double tail_A = 0.0;
    double relerr_sup = 0.0;
};

// (integral of |f|^q r^{weight_exponent} dmu)^{1/q} in the grid's frame.
double weighted_norm(const RadialGrid& g, const RadialField& f, double q,
                     double weight_exponent = 0.0);

// Bregman divergence (1/(m-1)) * integral of v^m - ref^m - m ref^{m-1}(v - ref).
// reference_tail is an additive correction for the reference beyond R_max
// (where v is taken to vanish); 0 keeps the grid-only value used by flow
// diagnostics so that entropy decays to exactly zero on the grid.
double relative_entropy(const RadialGrid& g, const RadialField& v, const RadialField& ref,
                        double m, double reference_tail = 0.0);

// Analytic integral of B^m dmu over (R_max, infinity) for the stationary
// Barenblatt reference, usable as reference_tail above.
double barenblatt_entropy_tail(const RadialGrid& g, const DerivedParameters& dp);

// m/(1-m) * integral of v |alpha d/dr (v^{m-1} - ref^{m-1})|^2 dmu.
// Edges where either cell is nonpositive are skipped and flagged degenerate.
double relative_fisher(const RadialGrid& g, const RadialField& v, const RadialField& ref,
                       const DerivedParameters& dp, bool* degenerate = nullptr);

// Same but against the stationary Barenblatt with its exact pressure 1 + r^2,
// the form whose dissipation matches the flow fluxes identically.
double relative_fisher_vs_barenblatt(const RadialGrid& g, const RadialField& v,
                                     const DerivedParameters& dp,
                                     bool* degenerate = nullptr);

// Full diagnostics row against a reference field (flow uses projected B).
EntropyReport entropy_report(const RadialGrid& g, const RadialField& v,
                             const RadialField& ref, const DerivedParameters& dp, double t);

// Interpolation deficit in the unweighted frame. K_gns is calibrated on a
// given grid so the deficit of the optimizer vanishes there by construction;
// C_gns is the corresponding optimal inequality constant.
struct DeficitSpec {
    double d = 0.0;
    double p = 0.0;
    double chi = 0.0;
    double K_gns = 0.0;
    double C_gns = 0.0;
};
DeficitSpec make_deficit_spec(const RadialGrid& g, double d, double p);

struct DeficitBreakdown {
    double grad_term = 0.0;       // (p-1)^2 ||grad f||_2^2
    double potential_term = 0.0;  // 4(d - p(d-2))/(p+1) ||f||_{p+1}^{p+1}
    double subtracted = 0.0;      // K_gns ||f||_{2p}^{2 p chi}
    double value = 0.0;
};
DeficitBreakdown gns_deficit_breakdown(const RadialGrid& g, const RadialField& f,
                                       const DeficitSpec& spec);
double gns_deficit(const RadialGrid& g, const RadialField& f, const DeficitSpec& spec);

// sup over grid edges S of S^{sigma/(1-m) - (d-gamma), mapped to the grid
// frame} times the weighted mass beyond S.
double tail_A(const RadialGrid& g, const RadialField& v, const DerivedParameters& dp);

// Minimum of relative entropy over the mass-preserving scaling family
// lambda^n B(lambda r), golden-section on log lambda in [-3, 3] to 1e-8.
struct BestMatch {
    double entropy = 0.0;
    double lambda = 1.0;
    bool converged = false;
};
BestMatch best_matching_entropy(const RadialGrid& g, const RadialField& v,
                                const DerivedParameters& dp);

// Quadratic forms of the linearization around B:
// energy = (m/2) int h^2 B^{2-m} dmu, fisher = m(1-m) int |alpha h'|^2 B dmu.
// The fisher form uses arithmetic edge means of projected B so that the
// nonlinear Fisher information reduces to it exactly at order epsilon^2.
struct LinearizedForms {
    double energy = 0.0;
    double fisher = 0.0;
};
LinearizedForms linearized_forms(const RadialGrid& g, const RadialField& h,
                                 const DerivedParameters& dp);

// ||v - ref||_{1,weighted} / sqrt(F[v]); undefined when F vanishes.
double ckp_ratio(const RadialGrid& g, const RadialField& v, const RadialField& ref,
                 const DerivedParameters& dp, bool* defined = nullptr);

// (second_moment / (mass + tail_A), (int v^m dmu)^{1/m} / Carlson-Levin split).
std::pair<double, double> moment_bounds_ratios(const RadialGrid& g, const RadialField& v,
                                               const DerivedParameters& dp);

// Ratio of sup-norm over the ball of radius R to the interpolation bound
// built from the Holder seminorm (pairwise sup, so O(N^2)) and the weighted
// L^p norm over the double ball.
double holder_interpolation_check(const RadialGrid& g, const RadialField& u, double R,
                                  double p, double mu, const DerivedParameters& dp);

// Infimum over the radial family phi = mu g(lambda .) of
// int |(p-1) grad f + f^p grad phi^{1-p}|^2 dx by nested golden-section.
double stability_rhs(const RadialGrid& g, const RadialField& f, const DeficitSpec& spec,
                     bool* converged = nullptr);

}  // namespace fdlab
