#include "fdlab/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace fdlab {

namespace {

double barenblatt_weight(double r, double delta) {
    return std::pow(1.0 + r * r, -delta);
}

// Sturm count for the standardized tridiagonal C - s I: number of
// eigenvalues strictly below s, by counting negative LDL^T pivots. A pivot
// that lands exactly on zero is nudged to keep the factorization defined;
// bisection absorbs the ambiguity.
int sturm_count(const std::vector<double>& diag, const std::vector<double>& off, double s,
                double pivot_floor) {
    int count = 0;
    double piv = diag[0] - s;
    if (std::abs(piv) < pivot_floor) piv = -pivot_floor;
    if (piv < 0.0) ++count;
    for (std::size_t i = 1; i < diag.size(); ++i) {
        piv = diag[i] - s - off[i - 1] * off[i - 1] / piv;
        if (std::abs(piv) < pivot_floor) piv = -pivot_floor;
        if (piv < 0.0) ++count;
    }
    return count;
}

// Solve (C - s I) x = rhs in place; near-zero pivots are nudged, which is
// exactly what inverse iteration wants near an eigenvalue.
void shifted_solve(const std::vector<double>& diag, const std::vector<double>& off, double s,
                   double pivot_floor, std::vector<double>& x) {
    const std::size_t n = diag.size();
    std::vector<double> d(n), rhs = x;
    std::vector<double> upper(off);
    d[0] = diag[0] - s;
    if (std::abs(d[0]) < pivot_floor) d[0] = pivot_floor;
    for (std::size_t i = 1; i < n; ++i) {
        const double w = off[i - 1] / d[i - 1];
        d[i] = diag[i] - s - w * off[i - 1];
        if (std::abs(d[i]) < pivot_floor) d[i] = pivot_floor;
        rhs[i] -= w * rhs[i - 1];
    }
    x[n - 1] = rhs[n - 1] / d[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) {
        x[i] = (rhs[i] - upper[i] * x[i + 1]) / d[i];
    }
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

}  // namespace

ModeForms assemble_mode(int l, const RadialGrid& g, const DerivedParameters& dp) {
    if (l < 0) throw std::invalid_argument("assemble_mode: l must be nonnegative");
    const std::size_t nc = g.size();
    ModeForms f;
    f.diag.assign(nc, 0.0);
    f.offdiag.assign(nc - 1, 0.0);
    f.b_diag.assign(nc, 0.0);

    const double a2 = dp.alpha * dp.alpha;
    for (std::size_t e = 1; e < nc; ++e) {
        const double re = g.edges[e];
        const double k = a2 * barenblatt_weight(re, dp.delta) * std::pow(re, dp.n - 1.0) /
                         (g.nodes[e] - g.nodes[e - 1]);
        f.diag[e - 1] += k;
        f.diag[e] += k;
        f.offdiag[e - 1] -= k;
    }
    if (l > 0) {
        // angular eigenvalue uses the true dimension d, the measure uses n
        const double ang = static_cast<double>(l) * (static_cast<double>(l) + dp.d - 2.0);
        for (std::size_t i = 0; i < nc; ++i) {
            const double r = g.nodes[i];
            f.diag[i] += ang * barenblatt_weight(r, dp.delta) / (r * r) * g.volumes[i];
        }
    }
    for (std::size_t i = 0; i < nc; ++i) {
        f.b_diag[i] = std::pow(barenblatt_weight(g.nodes[i], dp.delta), 2.0 - dp.m) * g.volumes[i];
    }
    return f;
}

double form_a(const ModeForms& forms, const std::vector<double>& f) {
    double s = 0.0;
    const std::size_t n = forms.diag.size();
    for (std::size_t i = 0; i < n; ++i) s += forms.diag[i] * f[i] * f[i];
    for (std::size_t i = 0; i + 1 < n; ++i) s += 2.0 * forms.offdiag[i] * f[i] * f[i + 1];
    return s;
}

double form_b(const ModeForms& forms, const std::vector<double>& f) {
    double s = 0.0;
    for (std::size_t i = 0; i < forms.diag.size(); ++i) s += forms.b_diag[i] * f[i] * f[i];
    return s;
}

ModeEigen smallest_eigenvalue(int l, const RadialGrid& g, const DerivedParameters& dp) {
    const ModeForms forms = assemble_mode(l, g, dp);
    const std::size_t n = g.size();
    if (n < 3) throw std::invalid_argument("smallest_eigenvalue: grid too small");

    // Standardize the pencil: C = D^{-1/2} A D^{-1/2} with D the diagonal b.
    std::vector<double> isq(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(forms.b_diag[i] > 0.0)) {
            throw std::runtime_error("smallest_eigenvalue: mass form not positive");
        }
        isq[i] = 1.0 / std::sqrt(forms.b_diag[i]);
    }
    std::vector<double> cd(n), co(n - 1);
    for (std::size_t i = 0; i < n; ++i) cd[i] = forms.diag[i] * isq[i] * isq[i];
    for (std::size_t i = 0; i + 1 < n; ++i) co[i] = forms.offdiag[i] * isq[i] * isq[i + 1];

    double hi = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double row = cd[i];
        if (i > 0) row += std::abs(co[i - 1]);
        if (i + 1 < n) row += std::abs(co[i]);
        hi = std::max(hi, row);
    }
    const double scale = std::max(hi, 1.0);
    const double pivot_floor = scale * 1e-20;
    double lo = -1e-10 * scale;

    // l = 0 keeps constants exactly in the stiffness kernel (natural
    // truncation), so the admissible eigenvalue is the second one.
    const int k_target = l == 0 ? 2 : 1;
    for (int it = 0;
         it < 200 && hi - lo > 1e-10 * std::max(std::abs(lo), std::abs(hi)) + 1e-30; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (sturm_count(cd, co, mid, pivot_floor) >= k_target) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    const double lambda = 0.5 * (lo + hi);

    // Inverse iteration in standardized coordinates, deflating the exact
    // constant mode for l = 0 (which is b-orthogonality to constants).
    std::vector<double> kernel;
    if (l == 0) {
        kernel.resize(n);
        for (std::size_t i = 0; i < n; ++i) kernel[i] = 1.0 / isq[i];
        const double nrm = std::sqrt(dot(kernel, kernel));
        for (double& x : kernel) x /= nrm;
    }
    auto deflate = [&](std::vector<double>& x) {
        if (kernel.empty()) return;
        const double c = dot(x, kernel);
        for (std::size_t i = 0; i < n; ++i) x[i] -= c * kernel[i];
    };

    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = std::cos(0.7 * static_cast<double>(i) + 0.3);
    deflate(x);
    const double shift = lambda + std::max(std::abs(lambda), scale * 1e-8) * 1e-8;
    bool converged = false;
    double rayleigh = lambda;
    for (int it = 0; it < 20; ++it) {
        shifted_solve(cd, co, shift, pivot_floor * 1e-3, x);
        deflate(x);
        const double nrm = std::sqrt(dot(x, x));
        if (!(nrm > 0.0) || !std::isfinite(nrm)) break;
        for (double& xi : x) xi /= nrm;
        // Rayleigh quotient of C equals a(f,f)/b(f,f) for f = D^{-1/2} x
        double cx = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double yi = cd[i] * x[i];
            if (i > 0) yi += co[i - 1] * x[i - 1];
            if (i + 1 < n) yi += co[i] * x[i + 1];
            cx += x[i] * yi;
        }
        rayleigh = cx;
        if (std::abs(rayleigh - lambda) <= 1e-9 * std::max(std::abs(lambda), 1e-30)) {
            converged = true;
            break;
        }
    }

    ModeEigen out;
    out.l = l;
    out.lambda = lambda;
    out.converged = converged;
    out.eigenfunction.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.eigenfunction.values[i] = x[i] * isq[i];
    return out;
}

SpectralResult hardy_poincare_gap(const DerivedParameters& dp, const RadialGrid& g, int l_max) {
    if (l_max < 2) throw std::invalid_argument("hardy_poincare_gap: l_max must be >= 2");
    SpectralResult res;
    res.gap = std::numeric_limits<double>::infinity();
    for (int l = 0; l <= l_max; ++l) {
        ModeEigen me = smallest_eigenvalue(l, g, dp);
        if (me.lambda < res.gap) {
            res.gap = me.lambda;
            res.gap_mode = l;
        }
        res.modes.push_back(std::move(me));
    }
    res.closed_form = spectral_gap_closed_form(dp);
    res.rel_dev = std::abs(res.gap - res.closed_form) / res.closed_form;
    return res;
}

RatePrediction rate_prediction(const DerivedParameters& dp, double lambda_gap) {
    if (!(lambda_gap > 0.0)) throw std::invalid_argument("rate_prediction: gap must be positive");
    const double a2 = dp.alpha * dp.alpha;
    const double zeta = zeta_ckn(dp, lambda_gap);
    RatePrediction rp;
    rp.baseline = 4.0 * a2;
    rp.improved = 4.0 * a2 + 2.0 * zeta;
    rp.linearized = 2.0 * (1.0 - dp.m) * lambda_gap;
    const double lhs = rp.linearized;
    const double rhs = 4.0 * a2 + 4.0 * zeta;
    if (std::abs(lhs - rhs) > 1e-12 * std::max(1.0, std::abs(lhs))) {
        std::ostringstream msg;
        msg << "rate_prediction: identity 2(1-m)Lambda = 4 alpha^2 + 4 zeta violated: " << lhs
            << " vs " << rhs;
        throw std::logic_error(msg.str());
    }
    return rp;
}

}  // namespace fdlab
