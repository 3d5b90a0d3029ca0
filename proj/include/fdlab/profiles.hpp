#pragma once

#include <cstddef>
#include <optional>
#include <variant>
#include <vector>

#include "fdlab/constants.hpp"

// Radial grids, closed-form profiles, and their finite-volume projection.
//
// Two frames appear throughout. The "artificial" frame uses the variable
// s = r^alpha, where the weighted measure becomes s^{n-1} ds with the
// artificial dimension n; flow and spectral work happens there. The
// "original" frame keeps r itself with weight r^{d-gamma-1} dr. A grid
// carries its own frame data (n_eff, alpha, angular) so integrals never
// need out-of-band context.

namespace fdlab {

enum class Spacing { Uniform, Geometric };

struct RadialGrid {
    std::vector<double> edges;    // cells + 1 entries, edges.front() == 0
    std::vector<double> nodes;    // cell centers, arithmetic midpoints
    std::vector<double> volumes;  // exact per-cell integral of r^{n_eff-1} dr
    double n_eff = 0.0;
    double alpha = 1.0;
    double angular = 0.0;  // |S^{d-1}|

    std::size_t size() const { return nodes.size(); }
    double r_max() const { return edges.back(); }
    // prefactor turning sum_i f_i * volumes[i] into the weighted integral
    double measure() const { return angular / alpha; }
};

struct RadialField {
    std::vector<double> values;
};

// Artificial-frame grid: n_eff = n(dp), alpha = dp.alpha.
RadialGrid make_grid(const DerivedParameters& dp, double r_max, std::size_t cells,
                     Spacing spacing = Spacing::Uniform, double growth = 1.0);

// Original-frame grid: weight r^{d-gamma-1}, alpha = 1.
RadialGrid make_grid_original(const DerivedParameters& dp, double r_max, std::size_t cells,
                              Spacing spacing = Spacing::Uniform, double growth = 1.0);

// grid.measure() * sum_i f_i r_i^{r_power} volumes[i]
double integrate(const RadialGrid& g, const RadialField& f, double r_power = 0.0);

// Profile tags for projection onto a grid.
struct AubinTalenti {};                  // original frame, (1 + r^sigma)^{-1/(p-1)}
struct BarenblattStationary {};          // artificial frame, (1 + s^2)^{-delta}
struct BarenblattEvolving {              // original frame, self-similar spreading solution
    double t = 0.0;
    double mass = -1.0;  // mass < 0 selects the closed-form reference mass
};
struct ScaledBarenblatt {                // artificial frame, lambda^{-n} B(s / lambda)
    double lambda = 1.0;
};
using ProfileSpec =
    std::variant<AubinTalenti, BarenblattStationary, BarenblattEvolving, ScaledBarenblatt>;

double aubin_talenti_value(double r, const DerivedParameters& dp);
double barenblatt_value(double s, const DerivedParameters& dp);
double barenblatt_evolving_value(double t, double mass, double r, const DerivedParameters& dp);

// Weighted mass of the stationary Barenblatt profile, via the Beta function.
double mass_closed_form(const DerivedParameters& dp);

// Expansion factor R(t) solving dR/dt = alpha^2 R^{n(1-m)-1}, R(0) = 1.
double self_similar_R(double t, const DerivedParameters& dp);

// Pointwise evaluation at cell centers; if mass_target is set the field is
// rescaled so its grid quadrature mass equals the target exactly.
RadialField project(const ProfileSpec& p, const DerivedParameters& dp, const RadialGrid& g,
                    std::optional<double> mass_target = std::nullopt);

// Member (C + s^2)^{1/(m-1)} of the stationary family whose weighted grid
// mass equals the given mass. Unlike a multiplicative rescaling this stays
// inside the family, so the result is an exact flow equilibrium and the
// relative entropy against it can decay all the way to rounding level.
RadialField stationary_of_mass(const RadialGrid& g, const DerivedParameters& dp, double mass);

}  // namespace fdlab
