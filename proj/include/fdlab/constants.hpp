#pragma once

// Parameter algebra for the weighted fast-diffusion family: admissible
// (beta, gamma, p) ranges, derived exponents, the symmetry/symmetry-breaking
// classification of the parameter plane, and the closed-form spectral gap
// with the decay-rate constants built from it.

#include <optional>
#include <vector>

namespace fdlab {

// Inputs. Norm weight |x|^{-gamma}, gradient weight |x|^{-beta}, diffusion
// exponent m in (0,1). p and m are dual via p = 1/(2m-1); m is canonical.
struct CknParameters {
  double d = 0;
  double beta = 0;
  double gamma = 0;
  double m = 0;

  static CknParameters from_m(double d, double beta, double gamma, double m);
  // m = (p+1)/(2p), requires p > 1
  static CknParameters from_p(double d, double beta, double gamma, double p);
};

// Exponents derived from (d, beta, gamma, m). alpha = sigma/2 rescales the
// radial derivative; n is the artificial dimension carried by the radial
// measure r^{n-1} dr; nu = d - n <= 0 on the admissible cone.
struct DerivedParameters {
  double d = 0;
  double beta = 0;
  double gamma = 0;
  double m = 0;

  double sigma = 0;         // 2 + beta - gamma
  double alpha = 0;         // 1 + (beta - gamma)/2
  double n = 0;             // 2 (d - gamma) / sigma
  double nu = 0;            // d - n
  double p_star = 0;        // (d - gamma)/(d - beta - 2), +inf when d - beta - 2 <= 0
  double theta = 0;         // interpolation exponent of the inequality
  double m1 = 0;            // 1 - sigma / (2 (d - gamma)) = 1 - 1/n
  double m_c = 0;           // (n - 2)/n
  double delta = 0;         // 1/(1 - m)
  double xi = 0;            // sigma - (d - gamma)(1 - m)
  double xi_art = 0;        // n (m - m_c) = 2 xi / sigma; exponent of the expansion law
  double lambda_scale = 0;  // lambda with lambda^{xi_art} = (1 - m)/(2 m)
  double p = 0;             // 1/(2m - 1); NaN when m <= 1/2
};

enum class RegionLabel { Inadmissible, Symmetry, SymmetryBreaking, FSBoundary };

const char* to_string(RegionLabel label);

// Throws std::invalid_argument on sigma <= 0, gamma >= d, m outside (0,1),
// or n < 2 (the family needs at least two artificial dimensions).
DerivedParameters derive(const CknParameters& params);

// Symmetry-breaking threshold curve beta_FS(gamma). Empty where the
// discriminant (gamma-d)^2 - 4(d-1) is negative (no curve).
std::optional<double> beta_fs(double gamma, double d);

// Exponent of the threshold translation mode; eta >= 1 iff symmetric
// (equivalently beta <= beta_FS where the curve exists). Requires sigma > 0.
double eta(double beta, double gamma, double d);

// Classify one point of the (beta, gamma) plane at fixed d and p.
// Admissibility: gamma < d, gamma - 2 < beta < (d-2) gamma / d, p > 1, and
// for subcritical p < d/(d-2) additionally p <= p_star(beta, gamma). At
// p >= d/(d-2) the scan is the critical family (each point at its own
// critical exponent) and no pointwise p-cut applies. Points within fs_tol of
// the threshold curve (in beta) report FSBoundary.
RegionLabel classify(double beta, double gamma, double d, double p,
                     double fs_tol = 1e-9);

struct RegionScan {
  std::vector<double> betas;   // ascending
  std::vector<double> gammas;  // ascending
  std::vector<RegionLabel> labels;  // row-major, gamma outer, beta inner

  RegionLabel at(std::size_t gi, std::size_t bi) const {
    return labels[gi * betas.size() + bi];
  }
};

// Inclusive linear grids with nb x ng cells.
RegionScan region_scan(double d, double p, double beta_lo, double beta_hi,
                       std::size_t nb, double gamma_lo, double gamma_hi,
                       std::size_t ng);

// Optimal constant of the weighted Hardy-Poincare inequality:
//   Lambda = 2 alpha^2 (2 delta - n)   if alpha^2 <= (d-1) delta^2 / (n (2 delta - n)(delta - 1))
//   Lambda = 2 alpha^2 delta eta       otherwise,
// with eta = sqrt((d-1)/alpha^2 + ((n-2)/2)^2) - (n-2)/2. The two branches
// agree exactly at the threshold. Requires d >= 2, nu <= 0, delta >= n.
double spectral_gap_closed_form(const DerivedParameters& dp);

// Improved-rate increments. zeta_ckn = (2 (1-m) lambda - 4 alpha^2) / 4 is
// driven by the spectral gap and vanishes on the symmetry-breaking boundary;
// zeta_gns = 2 d (m - m1) is the closed unweighted form from the Renyi
// exponent. They measure different mechanisms and need not coincide.
double zeta_ckn(const DerivedParameters& dp, double lambda);
double zeta_gns(double d, double m);  // requires m in (1 - 1/d, 1)

// Attainable fraction of the improved rate after an initial layer of length
// t_star: mu = 4 zeta e^{-4 t_star} / (4 + zeta - zeta e^{-4 t_star}).
double mu_initial_layer(double zeta, double t_star);

}  // namespace fdlab
