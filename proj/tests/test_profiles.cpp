#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "fdlab/constants.hpp"
#include "fdlab/profiles.hpp"
#include "fdlab/special.hpp"
#include "oracles.hpp"

using namespace fdlab;

namespace {

DerivedParameters dpm(double d, double b, double g, double m) {
    return derive(CknParameters::from_m(d, b, g, m));
}

RadialField ones(const RadialGrid& g) {
    RadialField f;
    f.values.assign(g.size(), 1.0);
    return f;
}

// continuum weighted mass of the stationary profile by adaptive quadrature
double mass_oracle(const DerivedParameters& dp) {
    auto f = [&](double s) {
        return std::pow(1.0 + s * s, -dp.delta) * std::pow(s, dp.n - 1.0);
    };
    return unit_sphere_measure(dp.d) / dp.alpha * oracle::integrate_halfline(f);
}

}  // namespace

TEST_CASE("closed-form profile values") {
    const auto dp8 = dpm(4, 0, 0, 0.8);
    const auto dp34 = dpm(4, 0, 0, 0.75);
    const auto dpw = dpm(4, -0.5, 1, 0.95);

    CHECK(aubin_talenti_value(0, dp8) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(aubin_talenti_value(1, dp34) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(aubin_talenti_value(2, dpw) ==
          doctest::Approx(std::pow(1.0 + std::sqrt(2.0), -9.0)).epsilon(1e-14));

    CHECK(barenblatt_value(0, dp8) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(barenblatt_value(1, dp8) == doctest::Approx(0.03125).epsilon(1e-15));
    CHECK(barenblatt_value(3, dp34) == doctest::Approx(1e-4).epsilon(1e-14));
    double prev = 2.0;
    for (double s : {0.0, 0.3, 1.0, 2.5, 7.0}) {
        const double b = barenblatt_value(s, dp8);
        CHECK(b < prev);
        prev = b;
    }
}

TEST_CASE("stationary profile is the 2p-th power of the optimizer") {
    // B(r^alpha) = g(r)^{2p} pointwise, weighted case included
    for (auto dp : {dpm(4, 0, 0, 0.8), dpm(4, -0.5, 1, 0.95), dpm(3, -1, -1, 0.9)}) {
        for (double r : {0.1, 0.5, 1.0, 2.0, 5.0, 11.0}) {
            const double lhs = barenblatt_value(std::pow(r, dp.alpha), dp);
            const double rhs = std::pow(aubin_talenti_value(r, dp), 2.0 * dp.p);
            CHECK(lhs == doctest::Approx(rhs).epsilon(1e-14));
        }
    }
}

TEST_CASE("closed-form mass against quadrature") {
    const double pi = std::acos(-1.0);
    CHECK(mass_closed_form(dpm(4, 0, 0, 0.75)) == doctest::Approx(pi * pi / 6.0).epsilon(1e-14));
    CHECK(mass_closed_form(dpm(2, 0, 0, 0.9)) == doctest::Approx(pi / 9.0).epsilon(1e-14));
    for (auto dp : {dpm(4, 0, 0, 0.8), dpm(4, -0.5, 1, 0.95), dpm(3, -1.2, -0.5, 0.85),
                    dpm(5, -0.4, 0.3, 0.9), dpm(2, 0, 0, 0.75)}) {
        CHECK(mass_closed_form(dp) == doctest::Approx(mass_oracle(dp)).epsilon(1e-8));
    }
    // non-integrable: delta <= n/2
    CHECK_THROWS_AS(mass_closed_form(dpm(4, 0, 0, 0.4)), std::invalid_argument);
}

TEST_CASE("mass of the optimizer in the original frame matches") {
    // M = integral g^{2p} |x|^{-gamma} dx, evaluated without any change of
    // variables; checks the frame change buried in the closed form
    for (auto dp : {dpm(4, 0, 0, 0.8), dpm(4, -0.5, 1, 0.95)}) {
        auto f = [&](double r) {
            return std::pow(aubin_talenti_value(r, dp), 2.0 * dp.p) *
                   std::pow(r, dp.d - dp.gamma - 1.0);
        };
        const double q = unit_sphere_measure(dp.d) * oracle::integrate_halfline(f);
        CHECK(mass_closed_form(dp) == doctest::Approx(q).epsilon(1e-8));
    }
}

TEST_CASE("expansion factor solves its ODE") {
    const auto dp34 = dpm(4, 0, 0, 0.75);
    CHECK(self_similar_R(0, dp34) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(self_similar_R(3, dp34) == doctest::Approx(4.0).epsilon(1e-14));
    const auto dpw = dpm(4, -0.5, 1, 0.95);
    CHECK(self_similar_R(10, dpw) == doctest::Approx(1.56674).epsilon(1e-5));
    // dR/dt = alpha^2 R^{n(1-m)-1} by central differences
    for (auto dp : {dpm(4, 0, 0, 0.8), dpw}) {
        for (double t : {0.5, 2.0, 10.0}) {
            const double h = 1e-5;
            const double fd =
                (self_similar_R(t + h, dp) - self_similar_R(t - h, dp)) / (2.0 * h);
            const double rhs = dp.alpha * dp.alpha *
                               std::pow(self_similar_R(t, dp), dp.n * (1.0 - dp.m) - 1.0);
            CHECK(fd == doctest::Approx(rhs).epsilon(1e-8));
        }
    }
    // below the critical exponent the expansion law degenerates
    CHECK_THROWS_AS(self_similar_R(1, dpm(4, 0, 0, 0.45)), std::invalid_argument);
}

TEST_CASE("spreading solution: origin value and conserved mass") {
    const auto dp = dpm(4, 0, 0, 0.75);
    // natural mass, t = 1: value at the origin is R(1)^{-(d-gamma)}
    CHECK(barenblatt_evolving_value(1, -1, 0, dp) == doctest::Approx(1.0 / 16.0).epsilon(1e-13));
    // t = 0 reproduces the stationary profile
    for (double r : {0.0, 0.7, 2.0})
        CHECK(barenblatt_evolving_value(0, -1, r, dp) ==
              doctest::Approx(barenblatt_value(r, dp)).epsilon(1e-14));
    // weighted mass is constant in t and proportional to the requested mass
    const double mnat = mass_closed_form(dp);
    for (double mass : {-1.0, 2.0 * mnat}) {
        const double expect = mass < 0.0 ? mnat : mass;
        for (double t : {1.0, 2.0, 4.0}) {
            auto f = [&](double r) {
                return barenblatt_evolving_value(t, mass, r, dp) *
                       std::pow(r, dp.d - dp.gamma - 1.0);
            };
            const double q = unit_sphere_measure(dp.d) * oracle::integrate_halfline(f, 1e-13);
            CHECK(q == doctest::Approx(expect).epsilon(1e-8));
        }
    }
    // before the initial-time singularity of R(t)
    CHECK_THROWS_AS(barenblatt_evolving_value(-2, -1, 0, dp), std::invalid_argument);
}

TEST_CASE("grid construction and exact cell volumes") {
    const auto dp = dpm(4, -0.5, 1, 0.95);  // n = 12
    const auto g = make_grid(dp, 20.0, 256);
    CHECK(g.size() == 256);
    CHECK(g.edges.size() == 257);
    CHECK(g.edges.front() == 0.0);
    CHECK(g.r_max() == doctest::Approx(20.0).epsilon(1e-15));
    CHECK(g.n_eff == doctest::Approx(dp.n).epsilon(1e-15));
    CHECK(g.alpha == doctest::Approx(dp.alpha).epsilon(1e-15));
    CHECK(g.angular == doctest::Approx(unit_sphere_measure(4)).epsilon(1e-14));
    // uniform edges, interleaving, exact volume sum R^n/n
    for (std::size_t k = 0; k < g.edges.size(); ++k)
        CHECK(g.edges[k] == doctest::Approx(20.0 * double(k) / 256.0).epsilon(1e-14));
    double vol = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        CHECK(g.edges[i] < g.nodes[i]);
        CHECK(g.nodes[i] < g.edges[i + 1]);
        vol += g.volumes[i];
    }
    CHECK(vol == doctest::Approx(std::pow(20.0, dp.n) / dp.n).epsilon(1e-12));

    const auto geo = make_grid(dp, 20.0, 256, Spacing::Geometric, 1.02);
    CHECK(geo.edges[1] - geo.edges[0] < (geo.edges[256] - geo.edges[255]) / 10.0);
    CHECK(geo.r_max() == doctest::Approx(20.0).epsilon(1e-12));
    CHECK_THROWS_AS(make_grid(dp, 20.0, 256, Spacing::Geometric, 1.0), std::invalid_argument);

    const auto go = make_grid_original(dp, 20.0, 128);
    CHECK(go.n_eff == doctest::Approx(dp.d - dp.gamma).epsilon(1e-15));
    CHECK(go.alpha == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("midpoint quadrature: exact for the measure, second order in r") {
    const auto dp = dpm(4, 0, 0, 0.8);
    const double R = 10.0;
    // k = 0 is the bare cell-volume telescope: exact
    const auto g0 = make_grid(dp, R, 173);
    CHECK(integrate(g0, ones(g0)) ==
          doctest::Approx(g0.measure() * std::pow(R, dp.n) / dp.n).epsilon(1e-12));
    // k = 1, 2: midpoint rule, error falls by 4 under refinement
    for (double k : {1.0, 2.0}) {
        const double exact = g0.measure() * std::pow(R, dp.n + k) / (dp.n + k);
        double err[2];
        std::size_t Ns[2] = {128, 256};
        for (int j = 0; j < 2; ++j) {
            const auto g = make_grid(dp, R, Ns[j]);
            err[j] = std::abs(integrate(g, ones(g), k) - exact);
        }
        CHECK(err[0] / err[1] == doctest::Approx(4.0).epsilon(0.15));
    }
}

TEST_CASE("projection: natural mass, renormalization, scaling") {
    const auto dp = dpm(4, 0, 0, 0.8);
    const auto g = make_grid(dp, 40.0, 2048);
    const auto b = project(BarenblattStationary{}, dp, g);
    // midpoint quadrature at this resolution carries ~3e-4 relative error
    CHECK(integrate(g, b) == doctest::Approx(mass_closed_form(dp)).epsilon(1e-3));
    // and the agreement improves monotonically under refinement
    double prev_err = 1e300;
    for (std::size_t N : {256u, 512u, 1024u, 2048u}) {
        const auto gr = make_grid(dp, 40.0, N);
        const double err =
            std::abs(integrate(gr, project(BarenblattStationary{}, dp, gr)) -
                     mass_closed_form(dp));
        CHECK(err < prev_err);
        prev_err = err;
    }
    // pointwise evaluation at nodes
    for (std::size_t i : {std::size_t(0), std::size_t(77), std::size_t(2047)})
        CHECK(b.values[i] == doctest::Approx(barenblatt_value(g.nodes[i], dp)).epsilon(1e-15));

    const auto nb = project(BarenblattStationary{}, dp, g, 2.5);
    CHECK(integrate(g, nb) == doctest::Approx(2.5).epsilon(1e-12));

    const auto s1 = project(ScaledBarenblatt{1.0}, dp, g);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(s1.values[i] == b.values[i]);

    // the dilation lambda^{-n} B(s/lambda) conserves continuum mass
    const auto s2 = project(ScaledBarenblatt{2.0}, dp, g);
    CHECK(integrate(g, s2) == doctest::Approx(integrate(g, b)).epsilon(1e-3));

    // original-frame projection of the optimizer
    const auto go = make_grid_original(dp, 30.0, 512);
    const auto at = project(AubinTalenti{}, dp, go);
    for (std::size_t i : {std::size_t(3), std::size_t(500)})
        CHECK(at.values[i] == doctest::Approx(aubin_talenti_value(go.nodes[i], dp)).epsilon(1e-15));
}

TEST_CASE("stationary family member of prescribed mass") {
    const auto dp = dpm(4, -0.5, 1, 0.95);
    const auto g = make_grid(dp, 20.0, 512, Spacing::Geometric, 1.004);
    for (double mass : {0.5, 2.0, 17.0}) {
        const auto v = stationary_of_mass(g, dp, mass);
        CHECK(integrate(g, v) == doctest::Approx(mass).epsilon(1e-13));
        // in-family witness: v = (C + s^2)^{1/(m-1)} for one C across all cells
        const double C =
            std::pow(v.values[0], dp.m - 1.0) - g.nodes[0] * g.nodes[0];
        CHECK(C > 0.0);
        for (std::size_t i = 0; i < g.size(); i += 41) {
            const double vi = std::pow(C + g.nodes[i] * g.nodes[i], 1.0 / (dp.m - 1.0));
            CHECK(v.values[i] == doctest::Approx(vi).epsilon(1e-11));
        }
    }
    // at the natural grid mass the member is the projected profile itself
    const auto b = project(BarenblattStationary{}, dp, g);
    const auto v = stationary_of_mass(g, dp, integrate(g, b));
    for (std::size_t i = 0; i < g.size(); i += 17)
        CHECK(v.values[i] == doctest::Approx(b.values[i]).epsilon(1e-10));
    CHECK_THROWS_AS(stationary_of_mass(g, dp, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(stationary_of_mass(g, dp, -1.0), std::invalid_argument);
}
