#include "fdlab/cli.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fdlab/constants.hpp"
#include "fdlab/csv.hpp"
#include "fdlab/experiments.hpp"
#include "fdlab/flow.hpp"
#include "fdlab/functionals.hpp"
#include "fdlab/profiles.hpp"
#include "fdlab/spectrum.hpp"

namespace fdlab {

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::size_t pos = 0;
    while (true) {
        const std::size_t next = s.find(sep, pos);
        if (next == std::string::npos) {
            parts.push_back(s.substr(pos));
            break;
        }
        parts.push_back(s.substr(pos, next - pos));
        pos = next + 1;
    }
    return parts;
}

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
    return s.substr(b, e - b);
}

struct Range {
    double lo = 0.0;
    double hi = 0.0;
    long steps = 0;
};

Range parse_range(const std::string& s, const std::string& key) {
    const auto parts = split(s, ':');
    if (parts.size() != 3) throw UsageError("--" + key + " expects lo:hi:steps, got '" + s + "'");
    Range r;
    r.lo = parse_double(parts[0]);
    r.hi = parse_double(parts[1]);
    r.steps = std::stol(parts[2]);
    if (!(r.hi > r.lo) || r.steps < 2) {
        throw UsageError("--" + key + ": need hi > lo and steps >= 2");
    }
    return r;
}

const char* kUsage =
    "usage: fdlab <command> [--key value ...] [--config file]\n"
    "commands:\n"
    "  region   classify the (beta, gamma) plane; needs --d --p --beta lo:hi:n\n"
    "           --gamma lo:hi:n -o out.csv\n"
    "  gap      Hardy-Poincare gap vs the closed form; --d --beta --gamma --m\n"
    "  evolve   run the flow and write the series CSV\n"
    "  rates    run, fit the decay rate, compare with predictions\n"
    "  ghp      threshold times and the two-sided sandwich constants\n"
    "  deficit  interpolation deficit of a radial profile (--input to load one)\n"
    "  quotient quotient ODE residual (unweighted runs only)\n"
    "  renyi    entropy-power growth check in original time\n"
    "global keys: out_dir, seed, threads, tol; flow keys: rmax, N, spacing,\n"
    "ratio, dt, t_end, scheme, record_every, snapshots, init, amplitude, mode,\n"
    "center, width, exponent, mass, floor; run parameters: d, beta, gamma, m or p.\n"
    "Config files are flat `key = value` lines; unknown keys are errors.\n";

using KeyList = std::initializer_list<const char*>;

void check_known(const RunConfig& cfg, const std::set<std::string>& allowed,
                 const std::string& cmd) {
    for (const auto& [k, v] : cfg.kv) {
        if (!allowed.count(k)) {
            throw UsageError("unknown key '" + k + "' for command '" + cmd + "'");
        }
    }
}

std::set<std::string> make_allowed(std::initializer_list<KeyList> groups, KeyList extra = {}) {
    std::set<std::string> s;
    for (const auto& g : groups) {
        for (const char* k : g) s.insert(k);
    }
    for (const char* k : extra) s.insert(k);
    return s;
}

std::string out_path(const RunConfig& cfg, const std::string& fallback_name) {
    namespace fs = std::filesystem;
    fs::path dir(cfg.get("out_dir", "."));
    fs::create_directories(dir);
    fs::path file(cfg.get("output", fallback_name));
    if (file.is_absolute()) return file.string();
    return (dir / file).string();
}

DerivedParameters derive_from(const RunConfig& cfg) {
    const double d = cfg.get_num("d", 0.0);
    const double beta = cfg.get_num("beta", 0.0);
    const double gamma = cfg.get_num("gamma", 0.0);
    if (cfg.has("m")) {
        return derive(CknParameters::from_m(d, beta, gamma, cfg.get_num("m", 0.0)));
    }
    if (cfg.has("p")) {
        return derive(CknParameters::from_p(d, beta, gamma, cfg.get_num("p", 0.0)));
    }
    throw UsageError("need --m or --p");
}

Spacing parse_spacing(const std::string& s) {
    if (s == "uniform") return Spacing::Uniform;
    if (s == "geometric") return Spacing::Geometric;
    throw UsageError("spacing must be uniform or geometric, got '" + s + "'");
}

RadialGrid grid_from(const RunConfig& cfg, const DerivedParameters& dp) {
    return make_grid(dp, cfg.get_num("rmax", 20.0),
                     static_cast<std::size_t>(cfg.get_int("N", 512)),
                     parse_spacing(cfg.get("spacing", "uniform")), cfg.get_num("ratio", 1.004));
}

MetaMap echo_meta(const RunConfig& cfg) {
    MetaMap m;
    for (const auto& [k, v] : cfg.kv) m[k] = v;
    return m;
}

struct RunBundle {
    DerivedParameters dp;
    RadialGrid grid;
    FlowSeries series;
};

RunBundle run_flow(const RunConfig& cfg) {
    RunBundle rb;
    rb.dp = derive_from(cfg);
    rb.grid = grid_from(cfg, rb.dp);

    FlowConfig fc;
    fc.grid = rb.grid;
    fc.dt = cfg.get_num("dt", 1e-3);
    fc.t_end = cfg.get_num("t_end", 1.0);
    const std::string scheme = cfg.get("scheme", "be");
    if (scheme == "be") {
        fc.scheme = Scheme::BackwardEulerNewton;
    } else if (scheme == "explicit") {
        fc.scheme = Scheme::Explicit;
    } else {
        throw UsageError("scheme must be be or explicit, got '" + scheme + "'");
    }
    fc.record_every = static_cast<int>(cfg.get_int("record_every", 10));
    fc.record_snapshots = cfg.get_int("snapshots", 0) != 0;
    // absolute pressure floor; compactly supported data needs one to keep the
    // vacuum pressure within Newton's reach
    fc.positivity_floor = cfg.get_num("floor", 0.0);

    const std::string init = cfg.get("init", "perturbed");
    const std::string mass = cfg.get("mass", "closed");
    double target = 0.0;
    if (mass == "closed") {
        target = mass_closed_form(rb.dp);
    } else if (mass == "ref") {
        target = integrate(rb.grid, project(BarenblattStationary{}, rb.dp, rb.grid));
    } else {
        target = parse_double(mass);
    }

    RadialField v0;
    if (init == "barenblatt") {
        v0 = stationary_of_mass(rb.grid, rb.dp, target);
    } else if (init == "perturbed") {
        PerturbedBarenblatt pb;
        pb.mode = static_cast<int>(cfg.get_int("mode", 1));
        pb.amplitude = cfg.get_num("amplitude", 0.05);
        v0 = initial_data(pb, rb.grid, rb.dp, target);
    } else if (init == "bump") {
        Bump b;
        b.center = cfg.get_num("center", 1.0);
        b.width = cfg.get_num("width", 0.5);
        v0 = initial_data(b, rb.grid, rb.dp, target);
    } else if (init == "heavytail") {
        HeavyTail ht;
        ht.exponent = cfg.get_num("exponent", rb.dp.n + 2.0);
        v0 = initial_data(ht, rb.grid, rb.dp, target);
    } else if (init == "random") {
        RandomSmooth rs;
        rs.seed = static_cast<std::uint64_t>(cfg.get_int("seed", 12345));
        rs.amplitude = cfg.get_num("amplitude", 0.1);
        v0 = initial_data(rs, rb.grid, rb.dp, target);
    } else {
        throw UsageError("init must be barenblatt, perturbed, bump, heavytail or random");
    }

    rb.series = evolve(v0, fc, rb.dp);
    return rb;
}

int cmd_region(const RunConfig& cfg, std::ostream& out) {
    const double d = cfg.get_num("d", 0.0);
    const double p = cfg.get_num("p", 0.0);
    if (!cfg.has("d") || !cfg.has("p")) throw UsageError("region needs --d and --p");
    if (!cfg.has("beta") || !cfg.has("gamma")) {
        throw UsageError("region needs --beta lo:hi:steps and --gamma lo:hi:steps");
    }
    if (!cfg.has("output")) throw UsageError("region needs an output path (-o)");
    const Range rb = parse_range(cfg.get("beta", ""), "beta");
    const Range rg = parse_range(cfg.get("gamma", ""), "gamma");
    const RegionScan scan =
        region_scan(d, p, rb.lo, rb.hi, static_cast<std::size_t>(rb.steps), rg.lo, rg.hi,
                    static_cast<std::size_t>(rg.steps));

    const std::string path = out_path(cfg, "region.csv");
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path);
    for (const auto& [k, v] : cfg.kv) os << "# " << k << " = " << v << "\n";
    os << "# columns = beta,gamma,label\n";
    for (std::size_t gi = 0; gi < scan.gammas.size(); ++gi) {
        for (std::size_t bi = 0; bi < scan.betas.size(); ++bi) {
            os << format_double(scan.betas[bi]) << ',' << format_double(scan.gammas[gi]) << ','
               << to_string(scan.at(gi, bi)) << '\n';
        }
    }
    if (!os) throw std::runtime_error("write failed: " + path);
    out << "region: wrote " << scan.betas.size() * scan.gammas.size() << " cells to " << path
        << "\n";
    return 0;
}

int cmd_gap(const RunConfig& cfg, std::ostream& out) {
    const DerivedParameters dp = derive_from(cfg);
    const RadialGrid g =
        make_grid(dp, cfg.get_num("rmax", 80.0), static_cast<std::size_t>(cfg.get_int("N", 2048)),
                  parse_spacing(cfg.get("spacing", "geometric")), cfg.get_num("ratio", 1.004));
    const int lmax = static_cast<int>(cfg.get_int("lmax", 4));
    const SpectralResult res = hardy_poincare_gap(dp, g, lmax);
    out << "l,lambda\n";
    for (const ModeEigen& me : res.modes) {
        out << me.l << ',' << format_double(me.lambda) << (me.converged ? "" : " (unconverged)")
            << "\n";
    }
    out << "gap = " << format_double(res.gap) << " (mode l = " << res.gap_mode << ")\n";
    out << "closed_form = " << format_double(res.closed_form) << "\n";
    out << "rel_dev = " << format_double(res.rel_dev) << "\n";
    if (cfg.has("output")) {
        const std::string path = out_path(cfg, "gap.csv");
        std::ofstream os(path);
        if (!os) throw std::runtime_error("cannot open " + path);
        for (const auto& [k, v] : cfg.kv) os << "# " << k << " = " << v << "\n";
        os << "# columns = l,lambda,closed_form,rel_dev\n";
        for (const ModeEigen& me : res.modes) {
            os << me.l << ',' << format_double(me.lambda) << ','
               << format_double(res.closed_form) << ','
               << format_double(std::abs(me.lambda - res.closed_form) / res.closed_form)
               << '\n';
        }
    }
    return res.rel_dev <= cfg.get_num("tol", 5e-3) ? 0 : 1;
}

int cmd_evolve(const RunConfig& cfg, std::ostream& out) {
    RunBundle rb = run_flow(cfg);
    const std::string path = out_path(cfg, "series.csv");
    write_series(path, rb.series, echo_meta(cfg));
    const auto& last = rb.series.rows.back().report;
    out << "evolve: " << rb.series.rows.size() << " rows to " << path << "\n";
    out << "final_t = " << format_double(last.t) << "\n";
    out << "final_entropy = " << format_double(last.entropy) << "\n";
    out << "final_mass = " << format_double(last.mass) << "\n";
    return 0;
}

int cmd_rates(const RunConfig& cfg, std::ostream& out) {
    RunBundle rb = run_flow(cfg);
    const std::string path = out_path(cfg, "series.csv");
    write_series(path, rb.series, echo_meta(cfg));

    const RadialGrid eig_grid =
        make_grid(rb.dp, cfg.get_num("eig_rmax", 80.0),
                  static_cast<std::size_t>(cfg.get_int("eig_N", 2048)), Spacing::Geometric,
                  cfg.get_num("eig_ratio", 1.004));
    const ModeEigen radial = smallest_eigenvalue(0, eig_grid, rb.dp);
    const double linearized = 2.0 * (1.0 - rb.dp.m) * radial.lambda;

    const double t_end = rb.series.rows.back().report.t;
    double t_lo = cfg.get_num("window_lo", 0.5 * t_end);
    double t_hi = cfg.get_num("window_hi", t_end);
    const RateFit fit = fit_decay_rate(rb.series, t_lo, t_hi, linearized);

    out << "baseline = " << format_double(fit.predictions.baseline) << "\n";
    out << "improved = " << format_double(fit.predictions.improved) << "\n";
    out << "linearized = " << format_double(fit.predictions.linearized) << "\n";
    out << "radial_lambda = " << format_double(radial.lambda) << "\n";
    out << "slope = " << format_double(fit.slope) << "\n";
    out << "r_squared = " << format_double(fit.r_squared) << "\n";
    out << "rows_used = " << fit.rows_used << "\n";
    out << "meets_baseline = " << (fit.meets_baseline ? "yes" : "no") << "\n";
    out << "meets_improved = " << (fit.meets_improved ? "yes" : "no") << "\n";
    out << "matches_linearized = " << (fit.matches_linearized ? "yes" : "no") << "\n";
    return fit.meets_baseline && fit.meets_improved ? 0 : 1;
}

int cmd_ghp(const RunConfig& cfg, std::ostream& out) {
    RunBundle rb = run_flow(cfg);
    const std::string path = out_path(cfg, "series.csv");
    write_series(path, rb.series, echo_meta(cfg));

    std::vector<double> eps;
    for (const std::string& tok : split(cfg.get("epsilons", "0.2,0.1,0.05"), ',')) {
        eps.push_back(parse_double(tok));
    }
    const ThresholdReport rep = threshold_time(rb.series, eps, cfg.get_num("onset", -1.0));

    bool all_finite = true;
    for (std::size_t i = 0; i < eps.size(); ++i) {
        out << "t_star(" << format_double(eps[i]) << ") = ";
        if (rep.censored[i]) {
            out << "censored\n";
            all_finite = false;
        } else {
            out << format_double(rep.t_star[i]) << "\n";
        }
    }
    out << "a_fit = " << format_double(rep.a_fit) << (rep.fit_valid ? "" : " (invalid)") << "\n";
    out << "monotone = " << (rep.monotone ? "yes" : "no") << "\n";
    out << "onset = " << format_double(rep.onset) << "\n";
    out << "ghp_lower = " << format_double(rep.ghp_lower) << "\n";
    out << "ghp_upper = " << format_double(rep.ghp_upper) << "\n";
    if (rep.ghp_upper > 1e8) {
        // locate where the upper ratio is attained for the heavy-tail report
        double worst_r = 0.0, worst = 0.0;
        for (const SeriesRow& row : rb.series.rows) {
            if (row.v.values.empty() || row.report.t < rep.onset) continue;
            for (std::size_t i = 0; i < rb.grid.size(); ++i) {
                const double ratio = row.v.values[i] / rb.series.reference.values[i];
                if (ratio > worst) {
                    worst = ratio;
                    worst_r = rb.grid.nodes[i];
                }
            }
        }
        out << "ghp_upper_attained_at_r = " << format_double(worst_r)
            << " (ratio effectively unbounded)\n";
    }
    const bool ok = all_finite && rep.monotone && rep.ghp_lower <= 1.0 + 1e-9 &&
                    rep.ghp_upper >= 1.0 - 1e-9 && rep.ghp_upper < 1e8;
    return ok ? 0 : 1;
}

int cmd_deficit(const RunConfig& cfg, std::ostream& out) {
    if (!cfg.has("d") || !cfg.has("p")) throw UsageError("deficit needs --d and --p");
    const double d = cfg.get_num("d", 0.0);
    const double p = cfg.get_num("p", 0.0);

    RadialGrid g;
    RadialField f;
    if (cfg.has("input")) {
        FieldFile ff = read_field(cfg.get("input", ""));
        g = std::move(ff.grid);
        f = std::move(ff.field);
    } else {
        const DerivedParameters dp = derive(CknParameters::from_p(d, 0.0, 0.0, p));
        g = make_grid(dp, cfg.get_num("rmax", 256.0),
                      static_cast<std::size_t>(cfg.get_int("N", 8192)),
                      parse_spacing(cfg.get("spacing", "geometric")),
                      cfg.get_num("ratio", 1.002));
        f = project(AubinTalenti{}, dp, g);
    }
    const DeficitSpec spec = make_deficit_spec(g, d, p);
    const DeficitBreakdown br = gns_deficit_breakdown(g, f, spec);
    out << "grad_term = " << format_double(br.grad_term) << "\n";
    out << "potential_term = " << format_double(br.potential_term) << "\n";
    out << "subtracted = " << format_double(br.subtracted) << "\n";
    out << "deficit = " << format_double(br.value) << "\n";
    out << "K_gns = " << format_double(spec.K_gns) << "\n";
    out << "C_gns = " << format_double(spec.C_gns) << "\n";
    const double tol = cfg.get_num("tol", 1e-8);
    return br.value >= -tol * std::max(1.0, br.grad_term) ? 0 : 1;
}

int cmd_quotient(const RunConfig& cfg, std::ostream& out) {
    if (cfg.get_num("beta", 0.0) != 0.0 || cfg.get_num("gamma", 0.0) != 0.0) {
        throw UsageError("quotient requires beta = gamma = 0");
    }
    RunBundle rb = run_flow(cfg);
    const std::string path = out_path(cfg, "series.csv");
    write_series(path, rb.series, echo_meta(cfg));
    const double viol = check_quotient_ode(rb.series);
    out << "quotient_violation = " << format_double(viol) << "\n";
    return viol <= cfg.get_num("tol", 0.02) ? 0 : 1;
}

int cmd_renyi(const RunConfig& cfg, std::ostream& out) {
    RunBundle rb = run_flow(cfg);
    const std::string path = out_path(cfg, "series.csv");
    write_series(path, rb.series, echo_meta(cfg));
    const RenyiCheck rc = renyi_growth_check(rb.series, rb.dp);

    const std::string gpath = out_path(
        RunConfig{{{"out_dir", cfg.get("out_dir", ".")}}}, "renyi.csv");
    std::ofstream os(gpath);
    if (!os) throw std::runtime_error("cannot open " + gpath);
    for (const auto& [k, v] : cfg.kv) os << "# " << k << " = " << v << "\n";
    os << "# columns = t_orig,entropy_power\n";
    for (std::size_t i = 0; i < rc.t_orig.size(); ++i) {
        os << format_double(rc.t_orig[i]) << ',' << format_double(rc.entropy_power[i]) << '\n';
    }
    out << "slope = " << format_double(rc.slope) << "\n";
    out << "max_violation = " << format_double(rc.max_violation) << "\n";
    out << "min_margin = " << format_double(rc.min_margin) << "\n";
    return rc.max_violation <= cfg.get_num("tol", 1e-6) ? 0 : 1;
}

}  // namespace

bool RunConfig::has(const std::string& key) const { return kv.count(key) != 0; }

std::string RunConfig::get(const std::string& key, const std::string& fallback) const {
    const auto it = kv.find(key);
    return it == kv.end() ? fallback : it->second;
}

double RunConfig::get_num(const std::string& key, double fallback) const {
    const auto it = kv.find(key);
    return it == kv.end() ? fallback : parse_double(it->second);
}

long RunConfig::get_int(const std::string& key, long fallback) const {
    const auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    long v = 0;
    const auto res = std::from_chars(it->second.data(), it->second.data() + it->second.size(), v);
    if (res.ec != std::errc() || res.ptr != it->second.data() + it->second.size()) {
        throw UsageError("key '" + key + "' expects an integer, got '" + it->second + "'");
    }
    return v;
}

RunConfig parse_config_text(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw UsageError("config line without '=': '" + line + "'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw UsageError("config line with empty key");
        cfg.kv[key] = value;
    }
    return cfg;
}

std::string config_echo(const RunConfig& cfg) {
    std::ostringstream out;
    for (const auto& [k, v] : cfg.kv) out << k << " = " << v << "\n";
    return out.str();
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    std::vector<std::string> args(argv + std::min(argc, 1), argv + argc);
    if (args.empty()) {
        err << kUsage;
        return 2;
    }
    const std::string cmd = args[0];
    if (cmd == "-h" || cmd == "--help" || cmd == "help") {
        out << kUsage;
        return 0;
    }

    try {
        RunConfig flags;
        std::string config_path;
        for (std::size_t i = 1; i < args.size(); ++i) {
            std::string key = args[i];
            if (key == "-o") {
                key = "--output";
            }
            if (key.rfind("--", 0) != 0) {
                throw UsageError("expected --key, got '" + args[i] + "'");
            }
            key = key.substr(2);
            std::replace(key.begin(), key.end(), '-', '_');
            if (i + 1 >= args.size()) throw UsageError("missing value for --" + key);
            const std::string value = args[++i];
            if (key == "config") {
                config_path = value;
            } else {
                flags.kv[key] = value;
            }
        }

        RunConfig cfg;
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw UsageError("cannot read config file: " + config_path);
            std::ostringstream text;
            text << in.rdbuf();
            cfg = parse_config_text(text.str());
        }
        for (const auto& [k, v] : flags.kv) cfg.kv[k] = v;  // flags override config

        static const KeyList common = {"out_dir", "seed", "threads", "tol", "output"};
        static const KeyList params = {"d", "beta", "gamma", "m", "p"};
        static const KeyList gridk = {"rmax", "N", "spacing", "ratio"};
        static const KeyList flowk = {"dt",        "t_end", "scheme",    "record_every",
                                      "snapshots", "init",  "amplitude", "mode",
                                      "center",    "width", "exponent",  "mass",
                                      "floor"};

        if (cmd == "region") {
            check_known(cfg, make_allowed({common}, {"d", "p", "beta", "gamma"}), cmd);
            return cmd_region(cfg, out);
        }
        if (cmd == "gap") {
            check_known(cfg, make_allowed({common, params, gridk}, {"lmax"}), cmd);
            return cmd_gap(cfg, out);
        }
        if (cmd == "evolve") {
            check_known(cfg, make_allowed({common, params, gridk, flowk}), cmd);
            return cmd_evolve(cfg, out);
        }
        if (cmd == "rates") {
            check_known(cfg,
                        make_allowed({common, params, gridk, flowk},
                                     {"window_lo", "window_hi", "eig_N", "eig_rmax", "eig_ratio"}),
                        cmd);
            return cmd_rates(cfg, out);
        }
        if (cmd == "ghp") {
            check_known(cfg, make_allowed({common, params, gridk, flowk}, {"epsilons", "onset"}),
                        cmd);
            return cmd_ghp(cfg, out);
        }
        if (cmd == "deficit") {
            check_known(cfg, make_allowed({common, gridk}, {"d", "p", "input"}), cmd);
            return cmd_deficit(cfg, out);
        }
        if (cmd == "quotient") {
            check_known(cfg, make_allowed({common, params, gridk, flowk}), cmd);
            return cmd_quotient(cfg, out);
        }
        if (cmd == "renyi") {
            check_known(cfg, make_allowed({common, params, gridk, flowk}), cmd);
            return cmd_renyi(cfg, out);
        }
        err << "unknown command '" << cmd << "'\n" << kUsage;
        return 2;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace fdlab
