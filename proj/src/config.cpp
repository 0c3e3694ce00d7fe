#include "polyfsi/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

namespace polyfsi::cfg {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

bool parse_double(const std::string& v, double& out) {
    try {
        std::size_t pos = 0;
        out = std::stod(v, &pos);
        return pos == v.size();
    } catch (...) {
        return false;
    }
}

bool parse_int(const std::string& v, int& out) {
    try {
        std::size_t pos = 0;
        out = std::stoi(v, &pos);
        return pos == v.size();
    } catch (...) {
        return false;
    }
}

bool parse_bool(const std::string& v, bool& out) {
    if (v == "true" || v == "1" || v == "on") {
        out = true;
        return true;
    }
    if (v == "false" || v == "0" || v == "off") {
        out = false;
        return true;
    }
    return false;
}

bool parse_preset(const std::string& v, Preset& out, std::string& err) {
    const auto open = v.find('(');
    if (open == std::string::npos) {
        out.name = trim(v);
        out.args.clear();
    } else {
        if (v.back() != ')') {
            err = "malformed preset, expected name(args)";
            return false;
        }
        out.name = trim(v.substr(0, open));
        out.args.clear();
        std::string inner = v.substr(open + 1, v.size() - open - 2);
        std::stringstream ss(inner);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            double a;
            if (!parse_double(trim(tok), a)) {
                err = "bad preset argument '" + trim(tok) + "'";
                return false;
            }
            out.args.push_back(a);
        }
    }
    if (!preset_known(out.name)) {
        err = "unknown preset '" + out.name + "'";
        return false;
    }
    return true;
}

}  // namespace

bool preset_known(const std::string& name) {
    static const char* names[] = {"zero", "fourier_mode", "taylor_green", "shear",
                                  "gaussian_bump"};
    return std::find_if(std::begin(names), std::end(names), [&](const char* n) {
               return name == n;
           }) != std::end(names);
}

ParseResult parse_config(const std::string& text, bool strict) {
    ParseResult res;
    RunConfig cfg;
    std::vector<ParseIssue>& errors = res.errors;
    std::vector<ParseIssue>& warnings = res.warnings;

    std::map<std::string, int> seen;  // section.key -> line of first sighting
    std::string section;
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = raw;
        const auto hash = line.find_first_of("#;");
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                errors.push_back({lineno, "malformed section header"});
                continue;
            }
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            errors.push_back({lineno, "expected key = value"});
            continue;
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const std::string full = section + "." + key;
        if (auto it = seen.find(full); it != seen.end()) {
            warnings.push_back(
                {lineno, "duplicate key '" + full + "' (first at line " +
                             std::to_string(it->second) + "); last value wins"});
        }
        seen[full] = lineno;

        auto bad = [&](const std::string& what) { errors.push_back({lineno, what}); };
        auto set_d = [&](double& dst) {
            double v;
            if (parse_double(value, v))
                dst = v;
            else
                bad("expected a number for '" + full + "'");
        };
        auto set_i = [&](int& dst) {
            int v;
            if (parse_int(value, v))
                dst = v;
            else
                bad("expected an integer for '" + full + "'");
        };
        auto set_b = [&](bool& dst) {
            bool v;
            if (parse_bool(value, v))
                dst = v;
            else
                bad("expected a boolean for '" + full + "'");
        };
        auto set_p = [&](Preset& dst) {
            std::string err;
            Preset p;
            if (parse_preset(value, p, err))
                dst = p;
            else
                bad(err + " for '" + full + "'");
        };

        if (full == "geometry.dim") set_i(cfg.dim);
        else if (full == "geometry.kind") cfg.geometry = value;
        else if (full == "geometry.L") set_d(cfg.L);
        else if (full == "geometry.ell") set_d(cfg.ell);
        else if (full == "geometry.kappa0") set_d(cfg.kappa0);
        else if (full == "grid.fluid_n") set_i(cfg.fluid_n);
        else if (full == "grid.shell_n") set_i(cfg.shell_n);
        else if (full == "time.T") set_d(cfg.T);
        else if (full == "time.t_star") set_d(cfg.t_star);
        else if (full == "time.dt") set_d(cfg.dt);
        else if (full == "data.eta0") set_p(cfg.eta0);
        else if (full == "data.eta_star") set_p(cfg.eta_star);
        else if (full == "data.u0") set_p(cfg.u0);
        else if (full == "data.T0") set_p(cfg.t0);
        else if (full == "data.f") set_p(cfg.f);
        else if (full == "data.g") set_p(cfg.g);
        else if (full == "solver.tol_fsi") set_d(cfg.tol_fsi);
        else if (full == "solver.tol_fp") set_d(cfg.tol_fp);
        else if (full == "solver.tol_lin") set_d(cfg.tol_lin);
        else if (full == "solver.max_fp") set_i(cfg.max_fp);
        else if (full == "solver.relax") set_d(cfg.relax);
        else if (full == "solver.aitken") set_b(cfg.aitken);
        else if (full == "solver.load_transfer") cfg.load_transfer = value;
        else if (full == "solver.min_window_steps") set_i(cfg.min_window_steps);
        else if (full == "smallness.c") set_d(cfg.smallness_c);
        else if (full == "smallness.eps") set_d(cfg.smallness_eps);
        else if (full == "output.every") set_i(cfg.output_every);
        else if (full == "run.seed") {
            int v;
            if (parse_int(value, v) && v >= 0)
                cfg.seed = static_cast<unsigned>(v);
            else
                bad("expected a nonnegative integer for 'run.seed'");
        } else if (strict) {
            errors.push_back({lineno, "unknown key '" + full + "'"});
        }
    }

    // validation issues point at the line that set the offending key
    for (const auto& [key, message] : validate_keyed(cfg)) {
        int at = 0;
        if (auto it = seen.find(key); it != seen.end()) at = it->second;
        errors.push_back({at, message});
    }
    if (errors.empty()) res.config = cfg;
    return res;
}

std::vector<std::pair<std::string, std::string>> validate_keyed(const RunConfig& cfg) {
    std::vector<std::pair<std::string, std::string>> errors;
    auto err = [&](const std::string& key, const std::string& m) {
        errors.emplace_back(key, m);
    };
    if (cfg.dim != 2 && cfg.dim != 3) err("geometry.dim", "dim must be 2 or 3");
    if (cfg.geometry != "flat_slab" && cfg.geometry != "annulus")
        err("geometry.kind", "geometry.kind must be flat_slab or annulus");
    if (!(cfg.L > 0)) err("geometry.L", "L must be positive");
    if (!(cfg.ell > 0) || cfg.ell >= cfg.L)
        err("geometry.ell", "ell must satisfy 0 < ell < L");
    if (!(cfg.kappa0 > 0)) err("geometry.kappa0", "kappa0 must be positive");
    if (!is_pow2(cfg.fluid_n))
        err("grid.fluid_n", "grid.fluid_n must be a power of two");
    if (!is_pow2(cfg.shell_n))
        err("grid.shell_n", "grid.shell_n must be a power of two");
    if (is_pow2(cfg.fluid_n) && cfg.fluid_n < 16)
        err("grid.fluid_n", "grid.fluid_n must be at least 16");
    if (!(cfg.T > 0)) err("time.T", "time.T must be positive");
    if (!(cfg.dt > 0)) err("time.dt", "time.dt must be positive");
    if (!(cfg.t_star > 0)) err("time.t_star", "time.t_star must be positive");
    if (!(cfg.tol_fsi > 0)) err("solver.tol_fsi", "solver.tol_fsi must be positive");
    if (!(cfg.tol_fp > 0)) err("solver.tol_fp", "solver.tol_fp must be positive");
    if (!(cfg.tol_lin > 0)) err("solver.tol_lin", "solver.tol_lin must be positive");
    if (cfg.max_fp < 1) err("solver.max_fp", "solver.max_fp must be at least 1");
    if (cfg.load_transfer != "variational" && cfg.load_transfer != "pointwise")
        err("solver.load_transfer",
            "solver.load_transfer must be variational or pointwise");
    if (cfg.output_every < 1) err("output.every", "output.every must be at least 1");
    if (cfg.min_window_steps < 1)
        err("solver.min_window_steps", "solver.min_window_steps must be at least 1");
    return errors;
}

std::vector<ParseIssue> validate(const RunConfig& cfg) {
    std::vector<ParseIssue> out;
    for (const auto& [key, message] : validate_keyed(cfg)) out.push_back({0, message});
    return out;
}

void apply_override(RunConfig& cfg, const std::string& entry,
                    std::vector<ParseIssue>& errors) {
    const auto eq = entry.find('=');
    if (eq == std::string::npos) {
        errors.push_back({0, "override must be section.key=value: '" + entry + "'"});
        return;
    }
    const std::string full = trim(entry.substr(0, eq));
    const auto dot = full.find('.');
    if (dot == std::string::npos) {
        errors.push_back({0, "override key must be section.key: '" + entry + "'"});
        return;
    }
    // reuse the parser on a synthetic two-line document applied over cfg
    const std::string text =
        "[" + full.substr(0, dot) + "]\n" + full.substr(dot + 1) + " = " +
        trim(entry.substr(eq + 1)) + "\n";
    // parse into a scratch config seeded from cfg by replaying
    ParseResult pr = parse_config(render(cfg) + "\n" + text, true);
    for (auto& e : pr.errors) errors.push_back(e);
    if (pr.config) cfg = *pr.config;
}

std::vector<double> shell_preset(const Preset& p, int n) {
    std::vector<double> out(static_cast<std::size_t>(n), 0.0);
    auto arg = [&](std::size_t i, double def) {
        return i < p.args.size() ? p.args[i] : def;
    };
    if (p.name == "zero") return out;
    if (p.name == "fourier_mode") {
        const double k = arg(0, 1.0), amp = arg(1, 0.01);
        for (int i = 0; i < n; ++i)
            out[static_cast<std::size_t>(i)] = amp * std::cos(k * 2.0 * M_PI * i / n);
        return out;
    }
    if (p.name == "gaussian_bump") {
        const double sigma = arg(0, 0.5), amp = arg(1, 0.01);
        for (int i = 0; i < n; ++i) {
            const double y = 2.0 * M_PI * i / n - M_PI;
            out[static_cast<std::size_t>(i)] =
                amp * std::exp(-0.5 * y * y / (sigma * sigma));
        }
        return out;
    }
    if (p.name == "shear" || p.name == "taylor_green")
        throw ConfigError("preset '" + p.name + "' does not define a shell scalar");
    throw ConfigError("unknown preset '" + p.name + "'");
}

coupling::RunSetup make_setup(const RunConfig& cfg) {
    if (cfg.dim != 2)
        throw ConfigError("time stepping runs are two-dimensional; dim=3 is "
                          "supported for the algebra layer and smoke tests only");
    if (cfg.geometry != "flat_slab")
        throw ConfigError("coupled runs use the flat_slab geometry");

    coupling::RunSetup s;
    s.geom = std::make_shared<ReferenceGeometry>(ReferenceGeometry::flat_slab_2d(
        cfg.shell_n, cfg.L, cfg.ell, cfg.kappa0));
    s.nx = cfg.fluid_n;
    s.nz = cfg.fluid_n;
    s.t_end = cfg.T;
    s.t_star = cfg.t_star;
    s.dt = cfg.dt;
    s.fsi.tol_fsi = cfg.tol_fsi;
    s.fsi.relax = cfg.relax;
    s.fsi.aitken = cfg.aitken;
    s.fsi.variational_load = cfg.load_transfer == "variational";
    s.fsi.solver.tol_visc = cfg.tol_lin;
    s.fsi.solver.tol_proj = cfg.tol_lin;
    s.tol_fp = cfg.tol_fp;
    s.max_fp = cfg.max_fp;
    s.min_window_steps = cfg.min_window_steps;
    s.smallness_c = cfg.smallness_c;
    s.smallness_eps = cfg.smallness_eps;
    s.seed = cfg.seed;

    s.eta0 = shell_preset(cfg.eta0, cfg.shell_n);
    s.eta_star = shell_preset(cfg.eta_star, cfg.shell_n);
    {
        double mean = 0;
        for (double v : s.eta_star) mean += v;
        mean /= cfg.shell_n;
        if (std::abs(mean) > 1e-12)
            throw ConfigError("eta_star must have zero mean (enclosed solvent)");
    }

    // velocity preset
    if (cfg.u0.name != "zero") {
        const Preset p = cfg.u0;
        auto arg = [p](std::size_t i, double def) {
            return i < p.args.size() ? p.args[i] : def;
        };
        if (p.name == "taylor_green") {
            const double amp = arg(0, 0.01), a = arg(1, 1.0), b = arg(2, M_PI);
            s.u0 = [amp, a, b](const Vec& x) {
                return Vec(amp * std::sin(a * x[0]) * std::cos(b * x[1]),
                           -(amp * a / b) * std::cos(a * x[0]) * std::sin(b * x[1]));
            };
        } else if (p.name == "shear") {
            const double gamma = arg(0, 1.0);
            s.u0 = [gamma](const Vec& x) { return Vec(gamma * x[1], 0.0); };
        } else if (p.name == "fourier_mode") {
            const double k = arg(0, 1.0), amp = arg(1, 0.01);
            s.u0 = [k, amp](const Vec& x) {
                return Vec(amp * std::cos(k * x[0]), 0.0);
            };
        } else {
            throw ConfigError("preset '" + p.name + "' does not define a velocity");
        }
    }

    // stress preset
    if (cfg.t0.name != "zero") {
        const Preset p = cfg.t0;
        auto arg = [p](std::size_t i, double def) {
            return i < p.args.size() ? p.args[i] : def;
        };
        if (p.name == "shear") {
            const double gamma = arg(0, 1.0);
            s.t0 = [gamma](const Vec&) {
                oldroyd::Mat t(2, 2);
                t << 0.5 * gamma * gamma, 0.5 * gamma, 0.5 * gamma, 0.0;
                return t;
            };
        } else if (p.name == "fourier_mode") {
            const double k = arg(0, 1.0), amp = arg(1, 0.01);
            s.t0 = [k, amp](const Vec& x) {
                oldroyd::Mat t = oldroyd::Mat::Identity(2, 2);
                return oldroyd::Mat(amp * std::cos(k * x[0]) * t);
            };
        } else if (p.name == "gaussian_bump") {
            const double sigma = arg(0, 0.5), amp = arg(1, 0.01);
            s.t0 = [sigma, amp](const Vec& x) {
                const double y = std::fmod(x[0], 2.0 * M_PI) - M_PI;
                oldroyd::Mat t = oldroyd::Mat::Identity(2, 2);
                return oldroyd::Mat(
                    amp * std::exp(-0.5 * y * y / (sigma * sigma)) * t);
            };
        } else {
            throw ConfigError("preset '" + p.name + "' does not define a stress");
        }
    }

    // body force preset
    if (cfg.f.name != "zero") {
        const Preset p = cfg.f;
        auto arg = [p](std::size_t i, double def) {
            return i < p.args.size() ? p.args[i] : def;
        };
        if (p.name == "fourier_mode") {
            // vertical forcing profile, constant in time
            const double k = arg(0, 1.0), amp = arg(1, 0.01);
            s.feeds.body_force = [k, amp](double, const mac::Metrics& m) {
                mac::FaceField f = mac::FaceField::zeros(m.lay);
                for (int i = 0; i < m.lay.nx; ++i)
                    for (int j = 0; j < m.lay.u2_rows(); ++j)
                        f.u2(i, j) = amp * std::cos(k * m.lay.xi_center(i));
                return f;
            };
        } else if (p.name == "gaussian_bump") {
            const double sigma = arg(0, 0.5), amp = arg(1, 0.01);
            s.feeds.body_force = [sigma, amp](double, const mac::Metrics& m) {
                mac::FaceField f = mac::FaceField::zeros(m.lay);
                for (int i = 0; i < m.lay.nx; ++i) {
                    const double y = m.lay.xi_center(i) - M_PI;
                    const double v = amp * std::exp(-0.5 * y * y / (sigma * sigma));
                    for (int j = 0; j < m.lay.u2_rows(); ++j) f.u2(i, j) = v;
                }
                return f;
            };
        } else {
            throw ConfigError("preset '" + p.name + "' does not define a body force");
        }
    }

    // shell force preset (constant in time)
    if (cfg.g.name != "zero") {
        const Preset gp = cfg.g;
        const int n = cfg.shell_n;
        const std::vector<double> gvals = shell_preset(gp, n);
        s.feeds.shell_force = [gvals](double) { return gvals; };
    }
    return s;
}

std::string render(const RunConfig& c) {
    std::ostringstream os;
    auto preset_str = [](const Preset& p) {
        std::string s = p.name;
        if (!p.args.empty()) {
            s += "(";
            for (std::size_t i = 0; i < p.args.size(); ++i) {
                char buf[64];
                std::snprintf(buf, sizeof buf, "%.17g", p.args[i]);
                s += std::string(i ? ", " : "") + buf;
            }
            s += ")";
        }
        return s;
    };
    char num[64];
    auto d = [&](double v) {
        std::snprintf(num, sizeof num, "%.17g", v);
        return std::string(num);
    };
    os << "[geometry]\n";
    os << "dim = " << c.dim << "\n";
    os << "kind = " << c.geometry << "\n";
    os << "L = " << d(c.L) << "\nell = " << d(c.ell) << "\nkappa0 = " << d(c.kappa0)
       << "\n\n";
    os << "[grid]\nfluid_n = " << c.fluid_n << "\nshell_n = " << c.shell_n << "\n\n";
    os << "[time]\nT = " << d(c.T) << "\nt_star = " << d(c.t_star)
       << "\ndt = " << d(c.dt) << "\n\n";
    os << "[data]\n";
    os << "eta0 = " << preset_str(c.eta0) << "\n";
    os << "eta_star = " << preset_str(c.eta_star) << "\n";
    os << "u0 = " << preset_str(c.u0) << "\n";
    os << "T0 = " << preset_str(c.t0) << "\n";
    os << "f = " << preset_str(c.f) << "\n";
    os << "g = " << preset_str(c.g) << "\n\n";
    os << "[solver]\n";
    os << "tol_fsi = " << d(c.tol_fsi) << "\ntol_fp = " << d(c.tol_fp)
       << "\ntol_lin = " << d(c.tol_lin) << "\nmax_fp = " << c.max_fp
       << "\nrelax = " << d(c.relax) << "\naitken = " << (c.aitken ? "true" : "false")
       << "\nload_transfer = " << c.load_transfer
       << "\nmin_window_steps = " << c.min_window_steps << "\n\n";
    os << "[smallness]\nc = " << d(c.smallness_c) << "\neps = " << d(c.smallness_eps)
       << "\n\n";
    os << "[output]\nevery = " << c.output_every << "\n\n";
    os << "[run]\nseed = " << c.seed << "\n";
    return os.str();
}

}  // namespace polyfsi::cfg
