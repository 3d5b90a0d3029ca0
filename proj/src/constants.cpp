#include "fdlab/constants.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace fdlab {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

[[noreturn]] void fail(const std::string& msg) {
  throw std::invalid_argument("constants: " + msg);
}
}  // namespace

CknParameters CknParameters::from_m(double d, double beta, double gamma,
                                    double m) {
  return CknParameters{d, beta, gamma, m};
}

CknParameters CknParameters::from_p(double d, double beta, double gamma,
                                    double p) {
  if (!(p > 1.0)) fail("from_p requires p > 1");
  return CknParameters{d, beta, gamma, (p + 1.0) / (2.0 * p)};
}

const char* to_string(RegionLabel label) {
  switch (label) {
    case RegionLabel::Inadmissible: return "inadmissible";
    case RegionLabel::Symmetry: return "symmetry";
    case RegionLabel::SymmetryBreaking: return "symmetry-breaking";
    case RegionLabel::FSBoundary: return "fs-boundary";
  }
  return "?";
}

DerivedParameters derive(const CknParameters& params) {
  const double d = params.d, beta = params.beta, gamma = params.gamma,
               m = params.m;
  const double sigma = 2.0 + beta - gamma;
  if (!(sigma > 0.0)) fail("requires beta + 2 - gamma > 0");
  if (!(gamma < d)) fail("requires gamma < d");
  if (!(m > 0.0 && m < 1.0)) fail("requires m in (0,1)");

  DerivedParameters dp;
  dp.d = d;
  dp.beta = beta;
  dp.gamma = gamma;
  dp.m = m;
  dp.sigma = sigma;
  dp.alpha = 0.5 * sigma;
  dp.n = 2.0 * (d - gamma) / sigma;
  if (dp.n < 2.0 && !(beta == 0.0 && gamma == 0.0 && d <= 2.0))
    fail("requires artificial dimension n >= 2 (d - beta - 2 <= 0)");
  dp.nu = d - dp.n;
  dp.p_star = (d - beta - 2.0 > 0.0) ? (d - gamma) / (d - beta - 2.0) : kInf;
  dp.m1 = 1.0 - sigma / (2.0 * (d - gamma));
  dp.m_c = (dp.n - 2.0) / dp.n;
  dp.delta = 1.0 / (1.0 - m);
  dp.xi = sigma - (d - gamma) * (1.0 - m);
  dp.xi_art = dp.n * (m - dp.m_c);
  dp.lambda_scale = (dp.xi_art > 0.0)
                        ? std::pow((1.0 - m) / (2.0 * m), 1.0 / dp.xi_art)
                        : kNaN;
  if (m > 0.5) {
    dp.p = 1.0 / (2.0 * m - 1.0);
    const double den = dp.p * (d + beta + 2.0 - 2.0 * gamma -
                               dp.p * (d - beta - 2.0));
    dp.theta = (den != 0.0) ? (d - gamma) * (dp.p - 1.0) / den : kNaN;
  } else {
    dp.p = kNaN;
    dp.theta = kNaN;
  }
  return dp;
}

std::optional<double> beta_fs(double gamma, double d) {
  const double disc = (gamma - d) * (gamma - d) - 4.0 * (d - 1.0);
  if (disc < 0.0) return std::nullopt;
  return d - 2.0 - std::sqrt(disc);
}

double eta(double beta, double gamma, double d) {
  const double sigma = 2.0 + beta - gamma;
  if (!(sigma > 0.0)) fail("eta requires beta + 2 - gamma > 0");
  const double w = 0.5 * (d - 2.0 - beta);
  return (2.0 * std::sqrt(d - 1.0 + w * w) - 2.0 * w) / sigma;
}

RegionLabel classify(double beta, double gamma, double d, double p,
                     double fs_tol) {
  if (!(d >= 2.0)) fail("classify requires d >= 2");
  if (!(gamma < d)) return RegionLabel::Inadmissible;
  if (!(beta > gamma - 2.0)) return RegionLabel::Inadmissible;
  if (!(beta < (d - 2.0) * gamma / d)) return RegionLabel::Inadmissible;
  if (!(p > 1.0)) return RegionLabel::Inadmissible;

  // Inside the open cone p_star < d/(d-2) strictly, so a scan at the ambient
  // critical exponent means the critical family: no pointwise p-cut there.
  const double p_crit = (d > 2.0) ? d / (d - 2.0) : kInf;
  if (p < p_crit * (1.0 - 1e-12)) {
    const double ps = (d - gamma) / (d - beta - 2.0);
    if (p > ps * (1.0 + 1e-12)) return RegionLabel::Inadmissible;
  }

  if (auto bfs = beta_fs(gamma, d)) {
    if (std::abs(beta - *bfs) <= fs_tol) return RegionLabel::FSBoundary;
  }
  return eta(beta, gamma, d) >= 1.0 ? RegionLabel::Symmetry
                                    : RegionLabel::SymmetryBreaking;
}

RegionScan region_scan(double d, double p, double beta_lo, double beta_hi,
                       std::size_t nb, double gamma_lo, double gamma_hi,
                       std::size_t ng) {
  if (nb < 2 || ng < 2) fail("region_scan requires at least a 2x2 grid");
  RegionScan scan;
  scan.betas.resize(nb);
  scan.gammas.resize(ng);
  for (std::size_t i = 0; i < nb; ++i)
    scan.betas[i] = beta_lo + (beta_hi - beta_lo) * double(i) / double(nb - 1);
  for (std::size_t j = 0; j < ng; ++j)
    scan.gammas[j] =
        gamma_lo + (gamma_hi - gamma_lo) * double(j) / double(ng - 1);
  scan.labels.reserve(nb * ng);
  for (std::size_t j = 0; j < ng; ++j)
    for (std::size_t i = 0; i < nb; ++i)
      scan.labels.push_back(classify(scan.betas[i], scan.gammas[j], d, p));
  return scan;
}

double spectral_gap_closed_form(const DerivedParameters& dp) {
  if (!(dp.d >= 2.0)) fail("spectral gap requires d >= 2");
  if (dp.nu > 1e-12) fail("spectral gap requires nu <= 0");
  if (dp.delta < dp.n - 1e-12)
    fail("spectral gap requires delta >= n (m >= m1)");
  const double a2 = dp.alpha * dp.alpha;
  const double threshold = (dp.d - 1.0) * dp.delta * dp.delta /
                           (dp.n * (2.0 * dp.delta - dp.n) * (dp.delta - 1.0));
  if (a2 <= threshold) return 2.0 * a2 * (2.0 * dp.delta - dp.n);
  const double w = 0.5 * (dp.n - 2.0);
  const double eta_art = std::sqrt((dp.d - 1.0) / a2 + w * w) - w;
  return 2.0 * a2 * dp.delta * eta_art;
}

double zeta_ckn(const DerivedParameters& dp, double lambda) {
  if (!(lambda > 0.0)) fail("zeta_ckn requires Lambda > 0");
  return (2.0 * (1.0 - dp.m) * lambda - 4.0 * dp.alpha * dp.alpha) / 4.0;
}

double zeta_gns(double d, double m) {
  const double m1 = 1.0 - 1.0 / d;
  if (!(m > m1 && m < 1.0)) fail("zeta_gns requires m in (1 - 1/d, 1)");
  return 2.0 * d * (m - m1);
}

double mu_initial_layer(double zeta, double t_star) {
  if (!(zeta > 0.0)) fail("mu_initial_layer requires zeta > 0");
  if (!(t_star >= 0.0)) fail("mu_initial_layer requires t_star >= 0");
  const double e = std::exp(-4.0 * t_star);
  return 4.0 * zeta * e / (4.0 + zeta - zeta * e);
}

}  // namespace fdlab
