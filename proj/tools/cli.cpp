#include "cli.hpp"

#include <omp.h>

#include <CLI11.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include "jetstab/checks.hpp"
#include "jetstab/errors.hpp"

#ifndef JETSTAB_VERSION
#define JETSTAB_VERSION "0.0.0"
#endif

namespace jetstab::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

enum class KeyType { real, integer, text, int_list, boolean };

struct KeySpec {
    std::string section;
    std::string name;
    KeyType type;
    std::optional<std::string> fallback;  // empty: required
    std::string doc;
    bool allow_auto = false;
};

// Resolved key = value document for one subcommand.
class RunConfig {
public:
    explicit RunConfig(std::vector<KeySpec> keys) : keys_(std::move(keys)) {}

    const std::vector<KeySpec>& keys() const { return keys_; }

    const KeySpec* find(const std::string& name) const {
        for (const auto& k : keys_)
            if (k.name == name) return &k;
        return nullptr;
    }

    void load_file(const std::string& path) {
        boost::property_tree::ptree tree;
        try {
            boost::property_tree::ini_parser::read_ini(path, tree);
        } catch (const boost::property_tree::ini_parser_error& e) {
            throw ConfigError("cannot read config: " + std::string(e.what()));
        }
        for (const auto& [name, node] : tree) {
            if (node.empty() && find(name)) {
                put("", name, node.data());
                continue;
            }
            if (node.empty() && !node.data().empty()) throw ConfigError("unknown key '" + name + "'");
            for (const auto& [key, leaf] : node) {
                if (!leaf.empty()) throw ConfigError("nested section under [" + name + "]");
                put(name, key, leaf.data());
            }
            if (node.empty()) check_section(name);
        }
    }

    void put(const std::string& section, const std::string& name, const std::string& value) {
        const auto* k = find(name);
        if (!k) throw ConfigError("unknown key '" + name + "'" + (section.empty() ? "" : " in [" + section + "]"));
        if (!section.empty() && section != k->section)
            throw ConfigError("key '" + name + "' belongs to [" + k->section + "], found in [" + section + "]");
        values_[name] = value;
    }

    // Fills defaults, reports missing required keys and parses every value once.
    void finalize() {
        for (const auto& k : keys_) {
            if (!values_.count(k.name)) {
                if (!k.fallback) throw ConfigError("missing required key '" + k.name + "' in [" + k.section + "]");
                values_[k.name] = *k.fallback;
            }
            typed(k);
        }
    }

    bool is_auto(const std::string& name) const { return raw(name) == "auto"; }
    double real(const std::string& name) const { return typed(*find(name)).get<double>(); }
    int integer(const std::string& name) const { return typed(*find(name)).get<int>(); }
    bool boolean(const std::string& name) const { return typed(*find(name)).get<bool>(); }
    std::string text(const std::string& name) const { return raw(name); }
    std::vector<int> int_list(const std::string& name) const { return typed(*find(name)).get<std::vector<int>>(); }

    // Replaces an "auto" entry by the value actually used.
    void resolve(const std::string& name, double value) { resolved_[name] = value; }

    json to_json() const {
        json out = json::object();
        for (const auto& k : keys_) {
            auto it = resolved_.find(k.name);
            out[k.section][k.name] = it != resolved_.end() ? json(it->second) : typed(k);
        }
        return out;
    }

private:
    std::vector<KeySpec> keys_;
    std::map<std::string, std::string> values_;
    std::map<std::string, double> resolved_;

    void check_section(const std::string& section) const {
        for (const auto& k : keys_)
            if (k.section == section) return;
        throw ConfigError("unknown section [" + section + "]");
    }

    const std::string& raw(const std::string& name) const {
        auto it = values_.find(name);
        if (it == values_.end()) throw ConfigError("missing key '" + name + "'");
        return it->second;
    }

    json typed(const KeySpec& k) const {
        const std::string& v = raw(k.name);
        auto bad = [&](const char* what) {
            return ConfigError("key '" + k.name + "': '" + v + "' is not " + what);
        };
        switch (k.type) {
            case KeyType::real: {
                if (k.allow_auto && v == "auto") return json("auto");
                size_t pos = 0;
                double d = 0.0;
                try {
                    d = std::stod(v, &pos);
                } catch (const std::exception&) {
                    throw bad("a real number");
                }
                if (pos != v.size() || !std::isfinite(d)) throw bad("a finite real number");
                return json(d);
            }
            case KeyType::integer: {
                size_t pos = 0;
                long n = 0;
                try {
                    n = std::stol(v, &pos);
                } catch (const std::exception&) {
                    throw bad("an integer");
                }
                if (pos != v.size()) throw bad("an integer");
                return json(int(n));
            }
            case KeyType::boolean:
                if (v == "true" || v == "1") return json(true);
                if (v == "false" || v == "0") return json(false);
                throw bad("true or false");
            case KeyType::int_list: {
                std::vector<int> out;
                std::stringstream ss(v);
                std::string item;
                while (std::getline(ss, item, ',')) {
                    size_t a = item.find_first_not_of(' '), b = item.find_last_not_of(' ');
                    if (a == std::string::npos) continue;
                    item = item.substr(a, b - a + 1);
                    size_t pos = 0;
                    long n = 0;
                    try {
                        n = std::stol(item, &pos);
                    } catch (const std::exception&) {
                        throw bad("a comma-separated integer list");
                    }
                    if (pos != item.size()) throw bad("a comma-separated integer list");
                    out.push_back(int(n));
                }
                return json(out);
            }
            case KeyType::text:
                return json(v);
        }
        return json(v);
    }
};

// ---- output helpers

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", v);
    return buf;
}

class CsvWriter {
public:
    CsvWriter(const fs::path& path, const std::string& header) : out_(path) {
        if (!out_) throw ConfigError("cannot write " + path.string());
        out_ << header << '\n';
    }
    void row(const std::vector<double>& values) {
        for (size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << fmt17(values[i]);
        out_ << '\n';
    }

private:
    std::ofstream out_;
};

void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

json spectrum_json(const Spectrum& s) {
    json xi = json::array(), re = json::array(), im = json::array();
    const auto& g = s.grid;
    for (int f = -g.nyquist() + 1; f <= g.nyquist(); ++f) {
        xi.push_back(f);
        re.push_back(s.at(f).real());
        im.push_back(s.at(f).imag());
    }
    return json{{"xi", xi}, {"re", re}, {"im", im}};
}

struct Outcome {
    int code = kExitOk;
    std::string status = "ok";
    std::string message;
};

struct Context {
    std::string command;
    RunConfig cfg;
    fs::path out;
    int threads = 1;
    std::vector<std::string> files;
};

// ---- key tables

KeySpec rho_key() { return {"jet", "rho", KeyType::real, std::nullopt, "cylinder radius, 0 < rho < 1, 1/rho not an integer"}; }
KeySpec modes_key(int n) { return {"jet", "n_modes", KeyType::integer, std::to_string(n), "Fourier grid size (power of two)"}; }
KeySpec ny_key(int n) { return {"jet", "n_y", KeyType::integer, std::to_string(n), "radial nodes of the elliptic solve"}; }

std::vector<KeySpec> keys_for(const std::string& cmd) {
    if (cmd == "dispersion")
        return {rho_key(),
                {"dispersion", "xi_min", KeyType::real, "0", "first wavenumber"},
                {"dispersion", "xi_max", KeyType::real, "20", "last wavenumber"},
                {"dispersion", "points", KeyType::integer, "21", "rows in the table"}};
    if (cmd == "simulate")
        return {rho_key(), modes_key(64), ny_key(32),
                {"integrator", "dt", KeyType::real, "0.05", "time step (negative runs backward)"},
                {"integrator", "t_end", KeyType::real, "10", "length of the run"},
                {"integrator", "snapshot_stride", KeyType::integer, "10", "steps between snapshots"},
                {"seed", "seed_mode", KeyType::integer, "1", "seeded wavenumber"},
                {"seed", "amplitude", KeyType::real, "1e-4", "eta amplitude of the seed"}};
    if (cmd == "scan")
        return {rho_key(), modes_key(128), ny_key(96),
                {"scan", "modes", KeyType::int_list, "", "wavenumbers; empty: growing band plus the first dispersive mode"},
                {"scan", "amplitude", KeyType::real, "1e-6", "seed amplitude"},
                {"scan", "dt", KeyType::real, "0.05", "time step"},
                {"scan", "t_end_dispersive", KeyType::real, "20", "run length for dispersive modes"},
                {"scan", "window_high", KeyType::real, "1e-2", "upper end of the fit window"},
                {"scan", "window_low_factor", KeyType::real, "10", "lower end of the fit window over the seed amplitude"}};
    if (cmd == "dno-check")
        return {rho_key(), modes_key(128),
                {"dno_check", "k_max", KeyType::integer, "32", "highest seeded Dirichlet mode"},
                {"dno_check", "n_y_list", KeyType::int_list, "256,512,1024,2048", "radial grids, coarse to fine"},
                {"dno_check", "expansion", KeyType::boolean, "true", "also run the shape expansion probes"}};
    if (cmd == "paradiff-check")
        return {rho_key(),
                {"paradiff_check", "lattice", KeyType::integer, "512", "cutoff support lattice half-width"},
                {"paradiff_check", "paralinearization", KeyType::boolean, "true", "also run the remainder scalings"}};
    if (cmd == "manifold")
        return {rho_key(), modes_key(32), ny_key(32),
                {"manifold", "direction", KeyType::text, "stable", "stable or unstable"},
                {"manifold", "base_norm", KeyType::real, "1e-3", "H^s0 norm of the base point on mode 1"},
                {"manifold", "horizon", KeyType::real, "auto", "truncation time; auto: exp(-mu T) <= tail_tol", true},
                {"manifold", "tail_tol", KeyType::real, "1e-8", "relative tail dropped beyond the horizon"},
                {"manifold", "weight_a", KeyType::real, "auto", "exponential weight in [0, mu]; auto: mu/2", true},
                {"manifold", "quad_dt", KeyType::real, "0.1", "quadrature step"},
                {"manifold", "damping", KeyType::real, "0.5", "Picard damping in (0, 1]"},
                {"manifold", "tol", KeyType::real, "1e-8", "sup-residual tolerance"},
                {"manifold", "max_iter", KeyType::integer, "60", "Picard iteration cap"},
                {"manifold", "eps0", KeyType::real, "0.05", "cutoff scale"}};
    if (cmd == "center")
        return {rho_key(), modes_key(32), ny_key(32),
                {"center", "base_norm", KeyType::real, "1e-3", "H^s0 norm of the dispersive datum on modes 2 and 3"},
                {"center", "horizon", KeyType::real, "10", "integration window [-T, T]"},
                {"center", "sim_dt", KeyType::real, "0.05", "physical time step"},
                {"center", "sample_stride", KeyType::integer, "2", "steps between quadrature samples"},
                {"center", "damping", KeyType::real, "0.5", "Picard damping in (0, 1]"},
                {"center", "tol", KeyType::real, "1e-6", "relative step tolerance"},
                {"center", "max_iter", KeyType::integer, "40", "Picard iteration cap"},
                {"center", "eps0", KeyType::real, "0.05", "cutoff scale"},
                {"center", "cone_bound", KeyType::real, "1e4", "accepted |g| / |f|^2"}};
    return {};
}

DispersionParams params(const RunConfig& c) { return DispersionParams(c.real("rho")); }

FourierGrid grid(const RunConfig& c) { return FourierGrid(c.integer("n_modes")); }

DnoOptions dno(const RunConfig& c) {
    DnoOptions o;
    o.n_y = c.integer("n_y");
    if (o.n_y < 6) throw ConfigError("n_y must be at least 6");
    return o;
}

void require(bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
}

// ---- subcommands

Outcome cmd_dispersion(Context& ctx) {
    const auto& c = ctx.cfg;
    auto p = params(c);
    const double a = c.real("xi_min"), b = c.real("xi_max");
    const int n = c.integer("points");
    require(a >= 0.0 && b > a, "need 0 <= xi_min < xi_max");
    require(n >= 2, "points must be >= 2");
    CsvWriter csv(ctx.out / "dispersion.csv", "k,lambda_g,lambda_d");
    for (int i = 0; i < n; ++i) {
        double k = a + (b - a) * i / (n - 1);
        csv.row({k, lambda_g(k, p), lambda_d(k, p)});
    }
    ctx.files.push_back("dispersion.csv");
    return {};
}

Outcome cmd_simulate(Context& ctx) {
    const auto& c = ctx.cfg;
    auto p = params(c);
    auto g = grid(c);
    IntegratorConfig ic;
    ic.dt = c.real("dt");
    ic.t_end = c.real("t_end");
    ic.snapshot_stride = c.integer("snapshot_stride");
    ic.dno = dno(c);
    require(ic.dt != 0.0, "dt must be nonzero");
    require(ic.t_end > 0.0, "t_end must be positive");
    require(ic.snapshot_stride >= 1, "snapshot_stride must be >= 1");
    const int mode = c.integer("seed_mode");
    require(mode >= 1 && mode < g.dealias_cutoff() + 1, "seed_mode must lie in [1, dealiasing cutoff]");
    auto tr = simulate(growth_seed(g, p, mode, c.real("amplitude")), ic);

    std::ofstream jl(ctx.out / "trajectory.jsonl");
    if (!jl) throw ConfigError("cannot write trajectory.jsonl");
    CsvWriter csv(ctx.out / "diagnostics.csv", "t,delta_eta,h_s_norm,flux");
    for (const auto& s : tr.samples) {
        json row{{"t", s.t},
                 {"eta", s.state.eta.v},
                 {"psi", s.state.psi.v},
                 {"diagnostics", {{"delta_eta", s.diag.delta_eta}, {"h_s_norm", s.diag.hs_norm}, {"flux", s.diag.flux}}}};
        jl << row.dump() << '\n';
        csv.row({s.t, s.diag.delta_eta, s.diag.hs_norm, s.diag.flux});
    }
    ctx.files = {"trajectory.jsonl", "diagnostics.csv"};
    Outcome o;
    o.status = to_string(tr.status);
    o.message = tr.message;
    if (tr.status == RunStatus::diverged) o.code = kExitNumeric;
    return o;
}

Outcome cmd_scan(Context& ctx) {
    const auto& c = ctx.cfg;
    auto p = params(c);
    GrowthScanConfig sc;
    sc.n_modes = c.integer("n_modes");
    FourierGrid check(sc.n_modes);
    sc.dno = dno(c);
    sc.amplitude = c.real("amplitude");
    sc.dt = c.real("dt");
    sc.t_end_dispersive = c.real("t_end_dispersive");
    sc.window_high = c.real("window_high");
    sc.window_low_factor = c.real("window_low_factor");
    require(sc.amplitude > 0.0 && sc.amplitude < sc.window_high, "need 0 < amplitude < window_high");
    require(sc.dt > 0.0, "dt must be positive");
    auto modes = c.int_list("modes");
    if (modes.empty()) {
        for (int xi = 1; p.rho * xi < 1.0; ++xi) modes.push_back(xi);
        modes.push_back(int(std::floor(1.0 / p.rho)) + 1);
    }
    for (int xi : modes) require(xi >= 1 && xi <= check.dealias_cutoff(), "scan modes must lie in [1, dealiasing cutoff]");
    auto rows = growth_scan(p, modes, sc, ctx.threads);
    CsvWriter csv(ctx.out / "scan.csv", "k,omega_measured,omega_rayleigh");
    Outcome o;
    for (const auto& r : rows) {
        csv.row({double(r.xi), r.omega_measured, r.omega_rayleigh});
        if (r.status == RunStatus::diverged) {
            o.code = kExitNumeric;
            o.status = "diverged";
            o.message = "run at xi = " + std::to_string(r.xi) + " diverged";
        }
        if (r.flagged && o.message.empty()) o.message = "empty fit window at xi = " + std::to_string(r.xi);
    }
    ctx.files.push_back("scan.csv");
    return o;
}

Outcome cmd_dno_check(Context& ctx) {
    const auto& c = ctx.cfg;
    auto p = params(c);
    auto ny = c.int_list("n_y_list");
    require(ny.size() >= 3, "n_y_list needs at least three grids");
    for (size_t i = 0; i < ny.size(); ++i) require(ny[i] >= 6 && (i == 0 || ny[i] > ny[i - 1]), "n_y_list must increase");
    auto f = dno_flat_check(p, c.integer("n_modes"), c.integer("k_max"), ny);
    CsvWriter csv(ctx.out / "dno_convergence.csv", "n_y,h,l2_error");
    for (size_t i = 0; i < ny.size(); ++i) csv.row({double(ny[i]), radial_step(ny[i]), f.errors[i]});
    json j{{"flat",
            {{"order_coarse", f.order_coarse},
             {"order_fine", f.order_fine},
             {"richardson_relative_error", f.richardson_error},
             {"max_solver_residual", f.max_residual}}}};
    if (c.boolean("expansion")) {
        auto e = expansion_check(p);
        j["expansion"] = {{"eps", e.eps},
                          {"cubic_residuals", e.cubic_residuals},
                          {"cubic_slope", e.cubic_slope},
                          {"shape_steps", e.steps},
                          {"shape_residuals", e.shape_residuals},
                          {"shape_slope", e.shape_slope}};
    }
    write_json(ctx.out / "dno_check.json", j);
    ctx.files = {"dno_convergence.csv", "dno_check.json"};
    return {};
}

Outcome cmd_paradiff_check(Context& ctx) {
    const auto& c = ctx.cfg;
    auto p = params(c);
    const int lattice = c.integer("lattice");
    require(lattice >= 16, "lattice must be >= 16");
    auto r = paradiff_check(lattice);
    json j{{"product_identity_error", r.product_identity_error},
           {"constant_symbol_error", r.constant_symbol_error},
           {"cutoff",
            {{"lattice", r.lattice},
             {"zero_violations", r.cutoff_zero_violations},
             {"one_violations_eighth", r.cutoff_one_violations},
             {"one_violations_sixteenth", r.cutoff_one_violations_16}}},
           {"composition",
            {{"slope_r2", r.composition_slope},
             {"predicted_r2", r.composition_predicted},
             {"slope_r1", r.composition_slope_r1},
             {"predicted_r1", r.composition_predicted_r1}}}};
    if (c.boolean("paralinearization")) {
        auto l = paralinearization_check(p);
        j["paralinearization"] = {{"dno_slope", l.dno_slope}, {"h_slope", l.h_slope}, {"rext_slope", l.rext_slope}};
    }
    write_json(ctx.out / "paradiff_check.json", j);
    ctx.files.push_back("paradiff_check.json");
    return {};
}

ExtendedConfig extended(const RunConfig& c) {
    ExtendedConfig e;
    e.coords.params = params(c);
    e.coords.dno = dno(c);
    e.eps0 = c.real("eps0");
    require(e.eps0 > 0.0, "eps0 must be positive");
    return e;
}

void trajectory_csv(const fs::path& path, const std::vector<double>& t, const std::vector<Spectrum>& u,
                    const DispersionParams& p, double s0) {
    CsvWriter csv(path, "t,norm_hs0,hyperbolic_norm,dispersive_norm");
    for (size_t k = 0; k < t.size(); ++k)
        csv.row({t[k], sobolev_norm(u[k], s0), sobolev_norm(proj_g(u[k], p), s0), sobolev_norm(proj_d(u[k], p), s0)});
}

Outcome cmd_manifold(Context& ctx) {
    auto& c = ctx.cfg;
    ManifoldConfig mc;
    mc.ext = extended(c);
    const auto& p = mc.ext.coords.params;
    mc.horizon = c.is_auto("horizon") ? 0.0 : c.real("horizon");
    require(c.is_auto("horizon") || mc.horizon > 0.0, "horizon must be positive or auto");
    mc.tail_tol = c.real("tail_tol");
    if (!c.is_auto("weight_a")) {
        mc.weight_a = c.real("weight_a");
        require(mc.weight_a >= 0.0, "weight_a must lie in [0, mu]");
    }
    mc.quad_dt = c.real("quad_dt");
    mc.damping = c.real("damping");
    mc.tol = c.real("tol");
    mc.max_iter = c.integer("max_iter");
    const std::string dir = c.text("direction");
    require(dir == "stable" || dir == "unstable", "direction must be stable or unstable");
    const int sigma = dir == "stable" ? 1 : -1;
    const double nf = c.real("base_norm");
    require(nf > 0.0 && nf < mc.ext.eps0, "base_norm must lie in (0, eps0)");
    auto rc = resolve(mc);
    c.resolve("horizon", rc.horizon);
    c.resolve("weight_a", rc.weight_a);
    auto g = grid(c);

    std::vector<double> norms{nf, 0.5 * nf, 0.25 * nf}, defects;
    HyperbolicSolution base;
    for (double n : norms) {
        Spectrum f(g);
        f.set(1, cplx(0.0, 0.5));
        f.set(-1, cplx(0.0, 0.5));
        f = cplx(n / sobolev_norm(f, mc.ext.s0)) * f;
        if (sigma < 0) f = time_reflect(f, p);
        auto s = solve_hyperbolic(sigma, f, mc);
        defects.push_back(tangency_defect(s, mc));
        if (n == nf) base = std::move(s);
    }
    json j{{"direction", dir},
           {"base_norm", nf},
           {"manifold_point", spectrum_json(base.manifold_point)},
           {"residual", base.residual},
           {"iterations", base.iterations},
           {"history", base.history},
           {"decay_rate", base.fitted_decay},
           {"mu", growth_rate_min(p)},
           {"lambda", growth_rate_max(p)},
           {"tangency_norms", norms},
           {"tangency_defects", defects},
           {"tangency_slope", loglog_slope(norms, defects)},
           {"tail_bound", base.tail_bound}};
    write_json(ctx.out / "manifold.json", j);
    trajectory_csv(ctx.out / "trajectory.csv", base.times, base.u, p, mc.ext.s0);
    ctx.files = {"manifold.json", "trajectory.csv"};
    return {};
}

Outcome cmd_center(Context& ctx) {
    const auto& c = ctx.cfg;
    CenterConfig cc;
    cc.ext = extended(c);
    const auto& p = cc.ext.coords.params;
    cc.horizon = c.real("horizon");
    cc.sim_dt = c.real("sim_dt");
    cc.sample_stride = c.integer("sample_stride");
    cc.damping = c.real("damping");
    cc.tol = c.real("tol");
    cc.max_iter = c.integer("max_iter");
    cc.cone_bound = c.real("cone_bound");
    require(cc.horizon > 0.0 && cc.sim_dt > 0.0 && cc.sample_stride >= 1, "horizon, sim_dt, sample_stride must be positive");
    require(cc.damping > 0.0 && cc.damping <= 1.0, "damping must lie in (0, 1]");
    require(cc.tol > 0.0 && cc.max_iter >= 1, "tol and max_iter must be positive");
    require(growth_rate_min(p) > 0.0, "no growing modes at this rho");
    const double nf = c.real("base_norm");
    require(nf > 0.0 && nf < cc.ext.eps0, "base_norm must lie in (0, eps0)");
    auto g = grid(c);
    require(g.dealias_cutoff() >= 3, "n_modes too small for the datum on modes 2 and 3");

    std::vector<double> norms{nf, 0.5 * nf, 0.25 * nf}, gn;
    CenterSeed base;
    bool all = true;
    for (double n : norms) {
        auto s = solve_center(center_probe_datum(g, n, cc.ext.s0), cc);
        all = all && s.converged;
        gn.push_back(sobolev_norm(s.g, cc.ext.s0));
        if (n == nf) base = std::move(s);
    }
    bool positive = gn[0] > 0.0 && gn[1] > 0.0 && gn[2] > 0.0;
    json j{{"base_norm", nf},
           {"center_point", spectrum_json(base.g + base.f)},
           {"g", spectrum_json(base.g)},
           {"residual", base.residual},
           {"iterations", base.iterations},
           {"history", base.history},
           {"converged", base.converged},
           {"escaped", base.escaped},
           {"cone_ratio", base.cone_ratio},
           {"in_cone", base.in_cone},
           {"cone_norms", norms},
           {"g_norms", gn},
           {"cone_slope", positive ? json(loglog_slope(norms, gn)) : json(nullptr)},
           {"message", base.message}};
    write_json(ctx.out / "center.json", j);
    ctx.files = {"center.json"};
    if (base.converged) {
        auto run = run_extended(base.g + base.f, cc.horizon, cc, false);
        trajectory_csv(ctx.out / "trajectory.csv", run.times, run.u, p, cc.ext.s0);
        ctx.files.push_back("trajectory.csv");
    }
    Outcome o;
    if (!all) {
        o.code = kExitNoConvergence;
        o.status = "not_converged";
        o.message = base.converged ? "center iteration did not converge at a reduced datum" : base.message;
    }
    return o;
}

using Handler = Outcome (*)(Context&);

const std::vector<std::pair<std::string, Handler>>& commands() {
    static const std::vector<std::pair<std::string, Handler>> list{
        {"dispersion", cmd_dispersion}, {"simulate", cmd_simulate},   {"scan", cmd_scan},
        {"dno-check", cmd_dno_check},   {"paradiff-check", cmd_paradiff_check},
        {"manifold", cmd_manifold},     {"center", cmd_center}};
    return list;
}

const char* summary(const std::string& cmd) {
    if (cmd == "dispersion") return "growth and dispersive rates of the linearization";
    if (cmd == "simulate") return "nonlinear run from a single-mode seed";
    if (cmd == "scan") return "measured growth rates against the linear theory";
    if (cmd == "dno-check") return "radial convergence of the Dirichlet-Neumann solve and its shape expansion";
    if (cmd == "paradiff-check") return "paraproduct identities, cutoff support, composition and remainder scalings";
    if (cmd == "manifold") return "stable or unstable manifold point by Lyapunov-Perron iteration";
    return "center-set point and cone ratio";
}

int thread_count(int flag) {
    if (flag > 0) return flag;
    if (const char* env = std::getenv("JETSTAB_THREADS")) {
        char* end = nullptr;
        long n = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || n < 1) throw ConfigError("JETSTAB_THREADS must be a positive integer");
        return int(n);
    }
    return 1;
}

void write_manifest(const Context& ctx, const Outcome& o) {
    json j{{"artifact", "jetstab"},
           {"version", JETSTAB_VERSION},
           {"command", ctx.command},
           {"config", ctx.cfg.to_json()},
           {"status", o.status},
           {"message", o.message},
           {"outputs", ctx.files}};
    write_json(ctx.out / "manifest.json", j);
}

}  // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"Numerical laboratory for the capillary jet"};
    app.require_subcommand(1);
    std::string config_path, out_dir;
    int threads = 0;
    std::map<std::string, std::map<std::string, std::string>> flags;
    std::map<std::string, std::vector<std::pair<std::string, CLI::Option*>>> flag_opts;
    for (const auto& [name, handler] : commands()) {
        auto* sub = app.add_subcommand(name, summary(name));
        sub->add_option("--config", config_path, "key = value file with [sections]")->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "output directory")->required();
        sub->add_option("--threads", threads, "worker threads (fallback JETSTAB_THREADS, default 1)")
            ->check(CLI::PositiveNumber);
        for (const auto& k : keys_for(name)) {
            auto* opt = sub->add_option("--" + k.name, flags[name][k.name], k.doc);
            flag_opts[name].push_back({k.name, opt});
        }
    }
    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    std::string command;
    Handler handler = nullptr;
    for (const auto& [name, h] : commands())
        if (app.got_subcommand(name)) {
            command = name;
            handler = h;
        }

    std::unique_ptr<Context> ctx;
    try {
        RunConfig cfg(keys_for(command));
        if (!config_path.empty()) cfg.load_file(config_path);
        for (const auto& [key, opt] : flag_opts[command])
            if (opt->count()) cfg.put("", key, flags[command][key]);
        cfg.finalize();
        ctx = std::make_unique<Context>(Context{command, std::move(cfg), fs::path(out_dir), thread_count(threads), {}});
        fs::create_directories(ctx->out);
        omp_set_num_threads(ctx->threads);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    }

    Outcome o;
    try {
        o = handler(*ctx);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const ConvergenceError& e) {
        o = {kExitNumeric, "not_converged", e.what()};
    } catch (const NumericError& e) {
        o = {kExitNumeric, "numeric_error", e.what()};
    }
    try {
        write_manifest(*ctx, o);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    }
    if (!o.message.empty()) std::cerr << command << ": " << o.status << ": " << o.message << '\n';
    return o.code;
}

}  // namespace jetstab::cli
