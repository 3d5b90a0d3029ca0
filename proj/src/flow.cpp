#include "fdlab/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

namespace fdlab {

namespace {

double max_value(const std::vector<double>& v) {
    double mx = 0.0;
    for (double x : v) mx = std::max(mx, x);
    return mx;
}

// Pressure P(v) = v^{m-1}, evaluated at the floor below it so that the
// conserved variable itself is never modified.
double pressure(double v, double m, double floor_v) {
    return std::pow(std::max(v, floor_v), m - 1.0);
}

double pressure_deriv(double v, double m, double floor_v) {
    if (v <= floor_v) return 0.0;
    return (m - 1.0) * std::pow(v, m - 2.0);
}

struct FluxWork {
    std::vector<double> coef;  // -alpha^2 edge_r^{n-1} per interior edge
    std::vector<double> dr;    // center-to-center spacing per interior edge
    std::vector<double> r2;    // node radius squared

    FluxWork(const RadialGrid& g, const DerivedParameters& dp) {
        const std::size_t nc = g.size();
        coef.resize(nc + 1, 0.0);
        dr.resize(nc + 1, 1.0);
        r2.resize(nc);
        for (std::size_t i = 0; i < nc; ++i) r2[i] = g.nodes[i] * g.nodes[i];
        const double a2 = dp.alpha * dp.alpha;
        for (std::size_t e = 1; e < nc; ++e) {
            // negated so the update dissipates: mass runs from high pressure
            // to low, and the entropy production matches the Fisher form
            coef[e] = -a2 * std::pow(g.edges[e], dp.n - 1.0);
            dr[e] = g.nodes[e] - g.nodes[e - 1];
        }
    }
};

// Edge fluxes of the conservative update; phi[0] = phi[N] = 0 encode the
// no-flux boundary, so cell updates telescope and mass is exact.
void edge_fluxes(const FluxWork& w, const std::vector<double>& v, double m, double floor_v,
                 std::vector<double>& phi) {
    const std::size_t nc = v.size();
    phi.assign(nc + 1, 0.0);
    for (std::size_t e = 1; e < nc; ++e) {
        const double ql = pressure(v[e - 1], m, floor_v) - w.r2[e - 1];
        const double qr = pressure(v[e], m, floor_v) - w.r2[e];
        const double diff = (qr - ql) / w.dr[e];
        const double vhat = 0.5 * (v[e - 1] + v[e]);
        phi[e] = w.coef[e] * vhat * diff;
    }
}

// Residual of the backward-Euler system and its mass-weighted l1 norm.
double residual(const FluxWork& w, const RadialGrid& g, const std::vector<double>& vold,
                const std::vector<double>& v, double dt, double m, double floor_v,
                std::vector<double>& phi, std::vector<double>& res) {
    edge_fluxes(w, v, m, floor_v, phi);
    const std::size_t nc = v.size();
    res.resize(nc);
    double norm = 0.0;
    for (std::size_t i = 0; i < nc; ++i) {
        res[i] = v[i] - vold[i] - dt / g.volumes[i] * (phi[i + 1] - phi[i]);
        norm += std::abs(res[i]) * g.volumes[i];
    }
    return norm * g.measure();
}

void thomas_solve(std::vector<double>& lower, std::vector<double>& diag,
                  std::vector<double>& upper, std::vector<double>& rhs) {
    const std::size_t n = diag.size();
    for (std::size_t i = 1; i < n; ++i) {
        const double w = lower[i] / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    rhs[n - 1] /= diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) {
        rhs[i] = (rhs[i] - upper[i] * rhs[i + 1]) / diag[i];
    }
}

void step_backward_euler(FlowState& state, const FlowConfig& cfg, const DerivedParameters& dp,
                         const FluxWork& w, double floor_v, double dt) {
    const RadialGrid& g = cfg.grid;
    const std::size_t nc = g.size();
    const double m = dp.m;
    const std::vector<double>& vold = state.v.values;
    std::vector<double> v = vold;
    std::vector<double> phi, res;
    double norm = residual(w, g, vold, v, dt, m, floor_v, phi, res);
    const double target = cfg.newton_tol * state.mass0;

    std::vector<double> lower(nc), diag(nc), upper(nc), rhs(nc), vtry(nc);
    int iter = 0;
    while (norm > target) {
        if (iter >= cfg.newton_max_iter) {
            std::ostringstream msg;
            msg << "Newton did not converge: residual " << norm << " vs target " << target
                << " after " << iter << " iterations at t = " << state.t;
            throw std::runtime_error(msg.str());
        }
        // Tridiagonal Jacobian of the residual. Each interior edge couples its
        // two cells through the pressure difference and the arithmetic mean.
        std::fill(lower.begin(), lower.end(), 0.0);
        std::fill(upper.begin(), upper.end(), 0.0);
        for (std::size_t i = 0; i < nc; ++i) diag[i] = 1.0;
        for (std::size_t e = 1; e < nc; ++e) {
            const double ql = pressure(v[e - 1], m, floor_v) - w.r2[e - 1];
            const double qr = pressure(v[e], m, floor_v) - w.r2[e];
            const double diff = (qr - ql) / w.dr[e];
            const double vhat = 0.5 * (v[e - 1] + v[e]);
            const double dpl = pressure_deriv(v[e - 1], m, floor_v);
            const double dpr = pressure_deriv(v[e], m, floor_v);
            const double d_left = w.coef[e] * (0.5 * diff - vhat * dpl / w.dr[e]);
            const double d_right = w.coef[e] * (0.5 * diff + vhat * dpr / w.dr[e]);
            // cell e-1 sees +phi[e] with weight dt/vol, cell e sees -phi[e]
            diag[e - 1] -= dt / g.volumes[e - 1] * d_left;
            upper[e - 1] = -dt / g.volumes[e - 1] * d_right;
            lower[e] = dt / g.volumes[e] * d_left;
            diag[e] += dt / g.volumes[e] * d_right;
        }
        for (std::size_t i = 0; i < nc; ++i) rhs[i] = -res[i];
        thomas_solve(lower, diag, upper, rhs);

        double scale = 1.0;
        bool accepted = false;
        for (int halvings = 0; halvings <= 8; ++halvings) {
            // projected step: vacuum cells cannot leave the positive cone, and
            // a clamped candidate is still judged by its actual residual
            for (std::size_t i = 0; i < nc; ++i) {
                vtry[i] = std::max(0.0, v[i] + scale * rhs[i]);
            }
            const double norm_try = residual(w, g, vold, vtry, dt, m, floor_v, phi, res);
            if (norm_try < norm || norm_try <= target) {
                v.swap(vtry);
                norm = norm_try;
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        ++iter;
        if (!accepted) {
            std::ostringstream msg;
            msg << "Newton line search stalled: residual " << norm << " at t = " << state.t;
            throw std::runtime_error(msg.str());
        }
    }

    // Finalize in flux form from the accepted iterate so the update
    // telescopes: mass changes only by the boundary fluxes, which are zero.
    // Near a vacuum interface the Newton tolerance can leave a cell negative
    // by up to its share of the mass-weighted slack; clamping that to zero
    // sheds mass at most at tolerance level, and only where vacuum exists.
    // Positive trajectories never clamp, so their mass telescopes exactly.
    // A deficit beyond the slack means the step genuinely failed; reject it
    // so the caller can take smaller steps.
    edge_fluxes(w, v, m, floor_v, phi);
    for (std::size_t i = 0; i < nc; ++i) {
        const double through = dt / g.volumes[i] * (std::abs(phi[i + 1]) + std::abs(phi[i]));
        const double slack = 4.0 * target / (g.volumes[i] * g.measure());
        const double vi = vold[i] + dt / g.volumes[i] * (phi[i + 1] - phi[i]);
        if (vi < -(slack + 1e-13 * (vold[i] + through))) {
            std::ostringstream msg;
            msg << "step lost positivity beyond tolerance at t = " << state.t;
            throw std::runtime_error(msg.str());
        }
        state.v.values[i] = vi < 0.0 ? 0.0 : vi;
    }
    state.newton_iters_last = iter;
    state.t += dt;
}

// Newton can fail legitimately when a step asks for too much at once, e.g.
// the first step from compactly supported data, where the vacuum interface
// makes the linearized model locally useless. Halving the step keeps the
// update inside the model's reach; two half-steps still advance exactly dt.
void step_be_adaptive(FlowState& state, const FlowConfig& cfg, const DerivedParameters& dp,
                      const FluxWork& w, double floor_v, double dt, int depth) {
    try {
        step_backward_euler(state, cfg, dp, w, floor_v, dt);
    } catch (const std::runtime_error&) {
        if (depth >= 12) throw;
        step_be_adaptive(state, cfg, dp, w, floor_v, 0.5 * dt, depth + 1);
        step_be_adaptive(state, cfg, dp, w, floor_v, 0.5 * dt, depth + 1);
    }
}

void step_explicit(FlowState& state, const FlowConfig& cfg, const DerivedParameters& dp,
                   const FluxWork& w, double floor_v) {
    const RadialGrid& g = cfg.grid;
    const std::size_t nc = g.size();
    const double m = dp.m;
    const double dt = cfg.dt;
    std::vector<double>& v = state.v.values;

    // Diffusion-style stability estimate per cell from the linearized edge
    // coefficients; advisory rather than sharp, so scaled by cfl_safety.
    double rate_max = 0.0;
    for (std::size_t e = 1; e < nc; ++e) {
        const double vhat = 0.5 * (v[e - 1] + v[e]);
        const double dpl = std::abs(pressure_deriv(v[e - 1], m, floor_v));
        const double dpr = std::abs(pressure_deriv(v[e], m, floor_v));
        const double k = std::abs(w.coef[e]) * vhat * std::max(dpl, dpr) / w.dr[e];
        rate_max = std::max(rate_max, k / g.volumes[e - 1] + k / g.volumes[e]);
    }
    if (dt * rate_max > cfg.cfl_safety) {
        std::ostringstream msg;
        msg << "explicit step unstable: dt " << dt << " exceeds " << cfg.cfl_safety / rate_max
            << "; reduce dt or use the implicit scheme";
        throw std::runtime_error(msg.str());
    }

    std::vector<double> phi;
    edge_fluxes(w, v, m, floor_v, phi);
    for (std::size_t i = 0; i < nc; ++i) {
        const double vi = v[i] + dt / g.volumes[i] * (phi[i + 1] - phi[i]);
        if (vi < 0.0) {
            std::ostringstream msg;
            msg << "explicit step lost positivity in cell " << i << " (r = " << g.nodes[i]
                << "); reduce dt or use the implicit scheme";
            throw std::runtime_error(msg.str());
        }
        state.v.values[i] = vi;
    }
    state.t += dt;
    state.newton_iters_last = 0;
}

void append_row(FlowSeries& s, const FlowState& state, const FlowConfig& cfg,
                const DerivedParameters& dp) {
    SeriesRow row;
    row.report = entropy_report(cfg.grid, state.v, s.reference, dp, state.t);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = 0; i < cfg.grid.size(); ++i) {
        const double ratio = state.v.values[i] / s.reference.values[i];
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
    }
    row.ratio_min = lo;
    row.ratio_max = hi;
    if (cfg.record_snapshots) row.v = state.v;
    s.rows.push_back(std::move(row));
}

}  // namespace

RadialField initial_data(const InitialData& kind, const RadialGrid& g,
                         const DerivedParameters& dp, std::optional<double> mass_target) {
    const std::size_t nc = g.size();
    RadialField base = project(BarenblattStationary{}, dp, g);
    const double target = mass_target ? *mass_target : mass_closed_form(dp);
    if (!(target > 0.0)) throw std::invalid_argument("initial_data: mass target must be positive");

    // b-weighted projection coefficient removing the component along constants,
    // so perturbations keep the mass nearly unchanged before the final rescale.
    auto orthogonalize = [&](std::vector<double>& h) {
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < nc; ++i) {
            const double wgt = std::pow(base.values[i], 2.0 - dp.m) * g.volumes[i];
            num += h[i] * wgt;
            den += wgt;
        }
        const double c = num / den;
        for (double& x : h) x -= c;
    };

    RadialField out;
    out.values.resize(nc);

    if (const auto* pb = std::get_if<PerturbedBarenblatt>(&kind)) {
        if (pb->mode < 1) throw std::invalid_argument("initial_data: mode must be >= 1");
        std::vector<double> h(nc);
        if (pb->mode == 1) {
            // r^2 minus its weighted mean: the first nontrivial radial shape of
            // the linearization, with bounded relative size h B^{1-m}.
            for (std::size_t i = 0; i < nc; ++i) h[i] = g.nodes[i] * g.nodes[i];
        } else {
            // higher fixtures use powers of r^2/(1+r^2) to stay bounded
            for (std::size_t i = 0; i < nc; ++i) {
                const double r2 = g.nodes[i] * g.nodes[i];
                h[i] = std::pow(r2 / (1.0 + r2), pb->mode);
            }
        }
        orthogonalize(h);
        for (std::size_t i = 0; i < nc; ++i) {
            const double b = base.values[i];
            out.values[i] = b + pb->amplitude * std::pow(b, 2.0 - dp.m) * h[i];
            if (out.values[i] <= 0.0) {
                throw std::invalid_argument("initial_data: amplitude breaks positivity");
            }
        }
    } else if (const auto* bump = std::get_if<Bump>(&kind)) {
        if (!(bump->width > 0.0)) throw std::invalid_argument("initial_data: width must be positive");
        for (std::size_t i = 0; i < nc; ++i) {
            const double z = (g.nodes[i] - bump->center) / bump->width;
            const double s = 1.0 - z * z;
            out.values[i] = s > 0.0 ? s * s * s : 0.0;
        }
    } else if (const auto* ht = std::get_if<HeavyTail>(&kind)) {
        if (!(ht->exponent > g.n_eff)) {
            throw std::invalid_argument("initial_data: heavy-tail exponent must exceed n for finite mass");
        }
        for (std::size_t i = 0; i < nc; ++i) {
            out.values[i] = std::pow(1.0 + g.nodes[i] * g.nodes[i], -0.5 * ht->exponent);
        }
    } else {
        const auto& rs = std::get<RandomSmooth>(kind);
        std::mt19937_64 rng(rs.seed);
        std::uniform_real_distribution<double> unif(-1.0, 1.0);
        std::vector<double> h(nc, 0.0);
        for (int k = 1; k <= 4; ++k) {
            const double c = unif(rng);
            std::vector<double> hk(nc);
            for (std::size_t i = 0; i < nc; ++i) {
                const double r2 = g.nodes[i] * g.nodes[i];
                hk[i] = std::pow(r2 / (1.0 + r2), k);
            }
            orthogonalize(hk);
            for (std::size_t i = 0; i < nc; ++i) h[i] += c * hk[i];
        }
        // scale so the largest relative perturbation equals the amplitude
        double rel_max = 0.0;
        for (std::size_t i = 0; i < nc; ++i) {
            rel_max = std::max(rel_max, std::abs(h[i]) / (1.0 + g.nodes[i] * g.nodes[i]));
        }
        const double scale = rel_max > 0.0 ? rs.amplitude / rel_max : 0.0;
        for (std::size_t i = 0; i < nc; ++i) {
            const double b = base.values[i];
            out.values[i] = b + scale * std::pow(b, 2.0 - dp.m) * h[i];
            if (out.values[i] <= 0.0) {
                throw std::invalid_argument("initial_data: amplitude breaks positivity");
            }
        }
    }

    const double mass = integrate(g, out);
    if (!(mass > 0.0)) throw std::invalid_argument("initial_data: zero mass on the grid");
    const double factor = target / mass;
    for (double& x : out.values) x *= factor;
    return out;
}

FlowState make_state(const RadialGrid& g, const RadialField& v0) {
    if (v0.values.size() != g.size()) throw std::invalid_argument("make_state: size mismatch");
    for (double x : v0.values) {
        if (!std::isfinite(x) || x < 0.0) {
            throw std::invalid_argument("make_state: initial data must be finite and nonnegative");
        }
    }
    FlowState st;
    st.v = v0;
    st.mass0 = integrate(g, v0);
    if (!(st.mass0 > 0.0)) throw std::invalid_argument("make_state: initial mass must be positive");
    return st;
}

void step(FlowState& state, const FlowConfig& cfg, const DerivedParameters& dp) {
    if (!(cfg.dt > 0.0)) throw std::invalid_argument("step: dt must be positive");
    if (!(cfg.newton_tol > 0.0) || cfg.newton_tol > 1e-6) {
        throw std::invalid_argument("step: newton_tol must lie in (0, 1e-6]");
    }
    const double vmax = max_value(state.v.values);
    // Default floor only guards exact zeros: reference profiles with large
    // 1/(1-m) reach ~1e-50 of their peak inside the domain and must see an
    // honest pressure there, so the default sits far below any positive value.
    double floor_v = cfg.positivity_floor > 0.0
                         ? cfg.positivity_floor
                         : std::max(1e-300 * vmax, std::numeric_limits<double>::min());
    if (floor_v > 1e-12 * vmax) {
        throw std::invalid_argument("step: positivity floor exceeds 1e-12 of the field maximum");
    }
    FluxWork w(cfg.grid, dp);
    const FlowState saved = state;
    try {
        if (cfg.scheme == Scheme::BackwardEulerNewton) {
            step_be_adaptive(state, cfg, dp, w, floor_v, cfg.dt, 0);
        } else {
            step_explicit(state, cfg, dp, w, floor_v);
        }
    } catch (...) {
        state = saved;
        throw;
    }
}

FlowSeries evolve(const RadialField& v0, const FlowConfig& cfg, const DerivedParameters& dp) {
    if (!(cfg.t_end >= 0.0)) throw std::invalid_argument("evolve: t_end must be nonnegative");
    if (cfg.record_every < 1) throw std::invalid_argument("evolve: record_every must be >= 1");

    FlowSeries s;
    s.dp = dp;
    s.config = cfg;

    FlowState st = make_state(cfg.grid, v0);
    // Compare against the stationary-family member of the trajectory's own
    // mass: a mass offset or an off-family rescaling would both leave an
    // undecayable floor under the entropy.
    s.reference = stationary_of_mass(cfg.grid, dp, st.mass0);
    append_row(s, st, cfg, dp);

    long k = 0;
    while (st.t < cfg.t_end - 1e-12 * cfg.dt) {
        step(st, cfg, dp);
        ++k;
        const bool last = st.t >= cfg.t_end - 1e-12 * cfg.dt;
        if (k % cfg.record_every == 0 || last) append_row(s, st, cfg, dp);
    }
    return s;
}

Reconstruction reconstruct_original(const RadialGrid& g, const RadialField& v,
                                    double t_self_similar, const DerivedParameters& dp) {
    if (!(dp.xi_art > 0.0)) {
        throw std::invalid_argument("reconstruct_original: needs xi_art > 0");
    }
    if (v.values.size() != g.size()) {
        throw std::invalid_argument("reconstruct_original: size mismatch");
    }
    const double tau = t_self_similar;
    const double R = std::exp(2.0 * tau);
    const double a2 = dp.alpha * dp.alpha;
    const double t_orig = std::expm1(2.0 * dp.xi_art * tau) / (a2 * dp.xi_art);
    const double b = dp.lambda_scale / R;
    const double bn = std::pow(b, dp.n);
    const double inv_alpha = 1.0 / dp.alpha;

    const std::size_t nc = g.size();
    Reconstruction rec;
    rec.t_orig = t_orig;
    rec.grid.n_eff = dp.d - dp.gamma;
    rec.grid.alpha = 1.0;
    rec.grid.angular = g.angular;
    rec.grid.edges.resize(nc + 1);
    rec.grid.nodes.resize(nc);
    rec.grid.volumes.resize(nc);
    rec.u.values.resize(nc);

    // Radius map r -> (r/b)^{1/alpha}; cell volumes transport exactly under
    // the change of variables, so they are scaled, never re-integrated.
    for (std::size_t j = 0; j <= nc; ++j) {
        rec.grid.edges[j] = std::pow(g.edges[j] / b, inv_alpha);
    }
    double mass = 0.0;
    double entropy = 0.0;
    for (std::size_t i = 0; i < nc; ++i) {
        rec.grid.nodes[i] = std::pow(g.nodes[i] / b, inv_alpha);
        rec.grid.volumes[i] = g.volumes[i] / (bn * dp.alpha);
        rec.u.values[i] = bn * v.values[i];
        mass += rec.u.values[i] * rec.grid.volumes[i];
        entropy += std::pow(rec.u.values[i], dp.m) * rec.grid.volumes[i];
    }
    rec.mass = mass * rec.grid.angular;
    rec.entropy_integral = entropy * rec.grid.angular;
    return rec;
}

}  // namespace fdlab
