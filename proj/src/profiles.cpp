#include "fdlab/profiles.hpp"

#include <cmath>
#include <stdexcept>

#include "fdlab/special.hpp"

namespace fdlab {

namespace {

RadialGrid build_grid(double n_eff, double alpha, double angular, double r_max,
                      std::size_t cells, Spacing spacing, double growth) {
    if (!(r_max > 0.0)) throw std::invalid_argument("make_grid: r_max must be positive");
    if (cells < 2) throw std::invalid_argument("make_grid: need at least 2 cells");
    RadialGrid g;
    g.n_eff = n_eff;
    g.alpha = alpha;
    g.angular = angular;
    g.edges.resize(cells + 1);
    if (spacing == Spacing::Uniform) {
        for (std::size_t k = 0; k <= cells; ++k)
            g.edges[k] = r_max * static_cast<double>(k) / static_cast<double>(cells);
    } else {
        if (!(growth > 1.0))
            throw std::invalid_argument("make_grid: geometric spacing needs growth > 1");
        const double denom = std::pow(growth, static_cast<double>(cells)) - 1.0;
        for (std::size_t k = 0; k <= cells; ++k)
            g.edges[k] = r_max * (std::pow(growth, static_cast<double>(k)) - 1.0) / denom;
    }
    g.edges.front() = 0.0;
    g.edges.back() = r_max;
    g.nodes.resize(cells);
    g.volumes.resize(cells);
    for (std::size_t i = 0; i < cells; ++i) {
        g.nodes[i] = 0.5 * (g.edges[i] + g.edges[i + 1]);
        g.volumes[i] =
            (std::pow(g.edges[i + 1], n_eff) - std::pow(g.edges[i], n_eff)) / n_eff;
    }
    return g;
}

}  // namespace

RadialGrid make_grid(const DerivedParameters& dp, double r_max, std::size_t cells,
                     Spacing spacing, double growth) {
    return build_grid(dp.n, dp.alpha, unit_sphere_measure(dp.d), r_max, cells, spacing,
                      growth);
}

RadialGrid make_grid_original(const DerivedParameters& dp, double r_max, std::size_t cells,
                              Spacing spacing, double growth) {
    return build_grid(dp.d - dp.gamma, 1.0, unit_sphere_measure(dp.d), r_max, cells,
                      spacing, growth);
}

double integrate(const RadialGrid& g, const RadialField& f, double r_power) {
    if (f.values.size() != g.size())
        throw std::invalid_argument("integrate: field and grid sizes differ");
    double acc = 0.0;
    if (r_power == 0.0) {
        for (std::size_t i = 0; i < g.size(); ++i) acc += f.values[i] * g.volumes[i];
    } else {
        for (std::size_t i = 0; i < g.size(); ++i)
            acc += f.values[i] * std::pow(g.nodes[i], r_power) * g.volumes[i];
    }
    return g.measure() * acc;
}

double aubin_talenti_value(double r, const DerivedParameters& dp) {
    if (!(dp.m > 0.5))
        throw std::invalid_argument("aubin_talenti_value: requires m > 1/2");
    // exponent -1/(p-1) written in terms of m so p = +inf never appears
    const double expo = -0.5 * (2.0 * dp.m - 1.0) * dp.delta;
    return std::pow(1.0 + std::pow(r, dp.sigma), expo);
}

double barenblatt_value(double s, const DerivedParameters& dp) {
    return std::pow(1.0 + s * s, -dp.delta);
}

double mass_closed_form(const DerivedParameters& dp) {
    if (!(dp.delta > 0.5 * dp.n))
        throw std::invalid_argument("mass_closed_form: profile not integrable, need delta > n/2");
    return unit_sphere_measure(dp.d) / dp.sigma *
           std::exp(log_beta(0.5 * dp.n, dp.delta - 0.5 * dp.n));
}

double self_similar_R(double t, const DerivedParameters& dp) {
    const double xa = dp.xi_art;
    if (!(xa > 0.0))
        throw std::invalid_argument("self_similar_R: requires m above the critical exponent");
    const double base = 1.0 + dp.alpha * dp.alpha * xa * t;
    if (!(base > 0.0))
        throw std::invalid_argument("self_similar_R: time before the initial singularity");
    return std::pow(base, 1.0 / xa);
}

double barenblatt_evolving_value(double t, double mass, double r, const DerivedParameters& dp) {
    if (!(dp.xi > 0.0))
        throw std::invalid_argument("barenblatt_evolving_value: requires m above the critical exponent");
    const double ratio = mass < 0.0 ? 1.0 : mass / mass_closed_form(dp);
    if (!(ratio > 0.0))
        throw std::invalid_argument("barenblatt_evolving_value: mass must be positive");
    const double R = self_similar_R(t, dp);
    const double k = std::pow(ratio, (1.0 - dp.m) / dp.xi);
    const double s = std::pow(k * r / R, dp.alpha);
    return std::pow(ratio, dp.sigma / dp.xi) * std::pow(R, -(dp.d - dp.gamma)) *
           std::pow(1.0 + s * s, -dp.delta);
}

RadialField project(const ProfileSpec& p, const DerivedParameters& dp, const RadialGrid& g,
                    std::optional<double> mass_target) {
    RadialField f;
    f.values.resize(g.size());
    std::visit(
        [&](const auto& prof) {
            using T = std::decay_t<decltype(prof)>;
            for (std::size_t i = 0; i < g.size(); ++i) {
                const double r = g.nodes[i];
                if constexpr (std::is_same_v<T, AubinTalenti>) {
                    f.values[i] = aubin_talenti_value(r, dp);
                } else if constexpr (std::is_same_v<T, BarenblattStationary>) {
                    f.values[i] = barenblatt_value(r, dp);
                } else if constexpr (std::is_same_v<T, BarenblattEvolving>) {
                    f.values[i] = barenblatt_evolving_value(prof.t, prof.mass, r, dp);
                } else {
                    if (!(prof.lambda > 0.0))
                        throw std::invalid_argument("project: lambda must be positive");
                    f.values[i] = std::pow(prof.lambda, -dp.n) *
                                  barenblatt_value(r / prof.lambda, dp);
                }
            }
        },
        p);
    if (mass_target) {
        const double mass = integrate(g, f);
        if (!(mass > 0.0))
            throw std::runtime_error("project: cannot renormalize a zero-mass field");
        const double scale = *mass_target / mass;
        for (double& v : f.values) v *= scale;
    }
    return f;
}

RadialField stationary_of_mass(const RadialGrid& g, const DerivedParameters& dp, double mass) {
    if (!(mass > 0.0)) throw std::invalid_argument("stationary_of_mass: mass must be positive");
    const double e = 1.0 / (dp.m - 1.0);
    RadialField f;
    f.values.resize(g.size());
    // Grid mass of (C + s^2)^{1/(m-1)} is smooth, strictly decreasing and
    // convex in C, so guarded Newton from C = 1 converges fast.
    double c = 1.0;
    for (int it = 0; it < 200; ++it) {
        double val = 0.0, der = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double base = c + g.nodes[i] * g.nodes[i];
            const double b = std::pow(base, e);
            f.values[i] = b;
            val += b * g.volumes[i];
            der += e * b / base * g.volumes[i];
        }
        val *= g.measure();
        der *= g.measure();
        if (std::abs(val - mass) <= 1e-14 * mass) return f;
        double next = c - (val - mass) / der;
        if (!(next > 0.0)) next = 0.5 * c;
        c = next;
    }
    throw std::runtime_error("stationary_of_mass: mass solve did not converge");
}

}  // namespace fdlab
