#include "jetstab/checks.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "jetstab/errors.hpp"

namespace jetstab {

namespace {

Spectrum gaussian_spectrum(const FourierGrid& g, unsigned seed, int kmax, bool hermitian, double decay_power = 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    Spectrum s(g);
    if (hermitian) {
        for (int xi = 1; xi <= kmax; ++xi) {
            cplx c(nd(rng), nd(rng));
            c /= std::pow(double(xi), decay_power);
            s.set(xi, c);
            s.set(-xi, std::conj(c));
        }
    } else {
        for (int xi = -kmax; xi <= kmax; ++xi) s.set(xi, cplx(nd(rng), nd(rng)));
    }
    return s;
}

RealField trig(const FourierGrid& g, double amp, int k, bool use_cos) {
    return RealField::from_function(g, [=](double x) { return amp * (use_cos ? std::cos(k * x) : std::sin(k * x)); });
}

PluriSymbol trig_symbol(const FourierGrid& g, bool use_cos, double power) {
    PluriSymbol s(g, DispersionParams(0.51), power);
    s.add(field_term(trig(g, 1.0, 1, use_cos), RealField(g), power));
    return s;
}

double composition_defect(const PluriSymbol& a, const PluriSymbol& b, double r, int n) {
    Spectrum u(a.grid);
    u.set(n, 1.0);
    auto lhs = paradiff_apply(a.sample(), paradiff_apply(b.sample(), u));
    return l2_norm(lhs - paradiff_apply(compose_symbols(a, b, r).sample(), u));
}

ExtendedConfig extended(const DispersionParams& p) {
    ExtendedConfig c;
    c.coords.params = p;
    c.coords.dno.n_y = 32;
    return c;
}

JetState propagator_seed(const FourierGrid& g, const DispersionParams& p, double e) {
    return JetState(RealField::from_function(g, [=](double x) { return e * (std::cos(2 * x) + 0.5 * std::sin(3 * x)); }),
                    RealField::from_function(g, [=](double x) { return e * 0.3 * std::cos(4 * x); }), p);
}

BackgroundTrajectory physical_background(const JetState& s0, const ExtendedConfig& cfg, double t_end) {
    IntegratorConfig ic;
    ic.dt = 0.05;
    ic.t_end = t_end;
    ic.dno = cfg.coords.dno;
    auto tr = simulate(s0, ic);
    if (tr.status != RunStatus::ok) throw NumericError("background run failed: " + tr.message);
    BackgroundTrajectory bg(s0.grid(), cfg);
    for (const auto& s : tr.samples) bg.push(background_sample(s.t, s.state, cfg));
    return bg;
}

// dispersive datum with content up to |xi| = 10; the cutoff only lets coefficient frequency zeta act on |xi| > 4 zeta
Spectrum rough_datum(const FourierGrid& g) {
    Spectrum h(g);
    for (int xi = 2; xi <= 10; ++xi) {
        h.set(xi, cplx(1.0, 0.5) / double(xi));
        h.set(-xi, cplx(0.3, -0.2) / double(xi));
    }
    h.set(0, 0.2);
    return h;
}

}  // namespace

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw ConfigError("slope fit needs at least two matching points");
    double mx = 0, my = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= x.size();
    my /= y.size();
    double sxy = 0, sxx = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
        sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
    }
    return sxy / sxx;
}

DnoFlatCheck dno_flat_check(const DispersionParams& p, int n_modes, int k_max, std::vector<int> n_y) {
    if (n_y.size() < 3) throw ConfigError("dno flat check needs at least three radial grids");
    FourierGrid g(n_modes);
    if (k_max < 1 || k_max >= g.nyquist()) throw ConfigError("k_max must lie in [1, n_modes/2)");
    auto s = gaussian_spectrum(g, 5, k_max, true);
    auto psi = from_spectrum(s);
    RealField eta(g);
    auto exact = dno_flat(s, p);
    DnoFlatCheck out;
    out.n_y = n_y;
    std::vector<Spectrum> gs;
    std::vector<double> hs;
    for (int ny : n_y) {
        DnoOptions o;
        o.n_y = ny;
        auto r = solve_dno(FlattenedEllipticProblem(eta, psi, p, o));
        out.max_residual = std::max(out.max_residual, r.residual);
        gs.push_back(to_spectrum(r.g));
        hs.push_back(radial_step(ny));
        out.errors.push_back(l2_norm(gs.back() - exact));
    }
    const auto& e = out.errors;
    out.order_coarse = std::log(e[0] / e[1]) / std::log(hs[0] / hs[1]);
    out.order_fine = std::log(e[1] / e[2]) / std::log(hs[1] / hs[2]);
    const size_t m = gs.size();
    double a = hs[m - 2] * hs[m - 2], b = hs[m - 1] * hs[m - 1];
    auto rich = cplx(1.0 / (a - b)) * (cplx(a) * gs[m - 1] - cplx(b) * gs[m - 2]);
    out.richardson_error = l2_norm(rich - exact) / l2_norm(exact);
    return out;
}

ExpansionCheck expansion_check(const DispersionParams& p) {
    ExpansionCheck out;
    {
        FourierGrid g(16);
        auto eta = trig(g, 1.0, 1, true);
        auto psi = trig(g, 1.0, 1, false);
        auto q = quadratic_part(eta, psi, p);
        auto g0 = dno_flat(psi, p);
        DnoOptions o;
        o.n_y = 128;
        out.eps = {1e-2, 3e-3, 1e-3, 3e-4, 1e-4};
        for (double e : out.eps) {
            auto G = dno_corrected(e * eta, e * psi, p, o);
            out.cubic_residuals.push_back(l2_norm(G - e * g0 - (e * e) * q));
        }
        out.cubic_slope = loglog_slope(out.eps, out.cubic_residuals);
    }
    {
        FourierGrid g(32);
        DnoOptions o;
        o.n_y = 512;
        o.solver = DnoSolver::direct;
        auto psi = RealField::from_function(g, [](double x) { return std::sin(x) + 0.2 * std::cos(3 * x); });
        auto eta = trig(g, 0.05, 1, true);
        auto d = trig(g, 1.0, 2, false);
        auto sd = shape_derivative(eta, psi, d, p, o);
        out.steps = {0.08, 0.04, 0.02, 0.01};
        for (double e : out.steps) {
            auto gp = solve_dno(FlattenedEllipticProblem(eta + e * d, psi, p, o)).g;
            auto gm = solve_dno(FlattenedEllipticProblem(eta - e * d, psi, p, o)).g;
            out.shape_residuals.push_back(l2_norm((1.0 / (2 * e)) * (gp - gm) - sd));
        }
        out.shape_slope = loglog_slope(out.steps, out.shape_residuals);
    }
    return out;
}

ParadiffCheck paradiff_check(int lattice) {
    ParadiffCheck out;
    {
        FourierGrid g(256);
        auto a = gaussian_spectrum(g, 11, 127, false);
        auto u = gaussian_spectrum(g, 12, 127, false);
        auto lhs = product(a, u);
        auto rhs = paraproduct(a, u) + paraproduct(u, a) + remainder_pm(a, u);
        out.product_identity_error = l2_norm(lhs - rhs) / l2_norm(lhs);
    }
    {
        FourierGrid g(128);
        auto u = gaussian_spectrum(g, 3, 63, false);
        cplx c(1.7, -0.4);
        auto tu = paradiff_apply(GriddedSymbol::multiplier(g, [c](int) { return c; }), u);
        auto expect = c * (u - partial_sum(u, 2));
        expect.c[g.index(g.nyquist())] = 0.0;
        out.constant_symbol_error = l2_norm(tu - expect) / l2_norm(u);
    }
    out.lattice = lattice;
    for (int xi = -lattice; xi <= lattice; ++xi)
        for (int z = -lattice; z <= lattice; ++z)
            if (2 * std::abs(z) >= std::abs(xi) && quantization_cutoff(z, xi) != 0.0) ++out.cutoff_zero_violations;
    for (int xi = 8; xi <= lattice; ++xi)
        for (int z = 0; 8 * z <= xi; ++z) {
            bool off = std::abs(quantization_cutoff(z, xi) - 1.0) > 1e-15;
            if (off) ++out.cutoff_one_violations;
            if (off && xi >= 16 && 16 * z <= xi) ++out.cutoff_one_violations_16;
        }
    {
        FourierGrid g(2048);
        auto a = trig_symbol(g, true, 1.5);
        auto b = trig_symbol(g, false, 0.5);
        std::vector<double> ns, d2, d1;
        for (int n : {32, 64, 128, 256, 512}) {
            ns.push_back(n);
            d2.push_back(composition_defect(a, b, 2.0, n));
            d1.push_back(composition_defect(a, b, 1.0, n));
        }
        out.composition_slope = loglog_slope(ns, d2);
        out.composition_predicted = 1.5 + 0.5 - 2.0;
        out.composition_slope_r1 = loglog_slope(ns, d1);
        out.composition_predicted_r1 = 1.5 + 0.5 - 1.0;
    }
    return out;
}

ParalinearizationCheck paralinearization_check(const DispersionParams& p) {
    ParalinearizationCheck out;
    {
        FourierGrid g(64);
        DnoOptions o;
        o.n_y = 48;
        std::vector<double> eps, res;
        for (double e : {0.02, 0.01, 0.005}) {
            auto eta = e * (trig(g, 1.0, 1, true) + trig(g, 0.5, 2, false));
            auto psi = e * (trig(g, 1.0, 1, false) + trig(g, 0.3, 3, true));
            auto gu = good_unknown(JetState(eta, psi, p), o);
            auto eh = to_spectrum(eta);
            RealField br(g);
            for (int j = 0; j < g.size(); ++j) br.v[j] = gu.b.v[j] / (p.rho + eta.v[j]);
            auto approx = paradiff_apply(symbol_lambda(eta, p).sample(), to_spectrum(gu.w), Quantization::exact_mean) -
                          derivative(paraproduct(gu.v, eh)) - paraproduct(br, eh);
            auto gs = to_spectrum(gu.g);
            gs.c[g.index(g.nyquist())] = 0.0;
            eps.push_back(e);
            res.push_back(l2_norm(gs - approx));
        }
        out.dno_slope = loglog_slope(eps, res);
    }
    {
        FourierGrid g(64);
        std::vector<double> eps, res;
        for (double e : {0.02, 0.01, 0.005}) {
            auto eta = e * (trig(g, 1.0, 1, true) + trig(g, 0.5, 2, false) + trig(g, 0.2, 4, true));
            auto eh = to_spectrum(eta);
            auto hcurv = to_spectrum(mean_curvature(eta, p));
            auto th = paradiff_apply(symbol_h(eta, p).sample(), eh, Quantization::exact_mean);
            auto approx = th - cplx(1.0 / (p.rho * p.rho)) * eh;
            approx.set(0, approx.at(0) + 1.0 / p.rho);
            approx.c[g.index(g.nyquist())] = 0.0;
            hcurv.c[g.index(g.nyquist())] = 0.0;
            eps.push_back(e);
            res.push_back(l2_norm(hcurv - approx));
        }
        out.h_slope = loglog_slope(eps, res);
    }
    {
        FourierGrid g(32);
        auto cfg = extended(p);
        Spectrum base(g);
        for (int xi = 1; xi <= 10; ++xi) {
            base.set(xi, cplx(1.0, 0.3 * xi) / std::pow(xi, 6.0));
            base.set(-xi, cplx(0.5, -0.2) / std::pow(xi, 6.0));
        }
        base.set(0, cplx(0.0, 0.1));
        std::vector<double> eps, res;
        for (double e : {4e-3, 2e-3, 1e-3}) {
            auto u = cplx(e) * base;
            if (sobolev_norm(u, cfg.s0) >= 2.0 * cfg.eps0) throw ConfigError("R_Ext probe left the cutoff ball");
            eps.push_back(e);
            res.push_back(l2_norm(extended_remainder(u, cfg)));
        }
        out.rext_slope = loglog_slope(eps, res);
    }
    return out;
}

PropagatorCheck propagator_check(const DispersionParams& p) {
    PropagatorCheck out;
    auto cfg = extended(p);
    {
        FourierGrid g(64);
        auto bg = flat_background(g, cfg, -1.0, 3.0);
        auto h = gaussian_spectrum(g, 31, 3, false);
        PropagatorOptions o;
        o.dt_lin = 0.1;
        for (double t1 : {3.0, -1.0}) {
            auto v = propagate(bg, 0.0, t1, h, o).v;
            auto want = apply_multiplier(
                [&](int xi) {
                    bool disp = xi != g.nyquist() && !(std::abs(xi) >= 1 && p.rho * std::abs(xi) < 1.0);
                    return disp ? std::exp(cplx(0.0, t1 * lambda_d(xi, p))) : cplx(0.0);
                },
                h);
            out.unitarity_error = std::max(out.unitarity_error, l2_norm(v - want) / l2_norm(h));
            out.unitarity_error = std::max(out.unitarity_error, std::abs(l2_norm(v) - l2_norm(want)) / l2_norm(want));
        }
    }
    FourierGrid g(32);
    auto h = rough_datum(g);
    PropagatorOptions o;
    o.dt_lin = 0.0125;
    {
        auto bg = physical_background(propagator_seed(g, p, 1e-5), cfg, 1.0);
        auto hd = propagate(bg, 0.0, 0.0, h, o).v;
        auto v = propagate(bg, 0.0, 1.0, h, o).v;
        auto back = propagate(bg, 1.0, 0.0, v, o).v;
        auto mid = propagate(bg, 0.0, 0.4, h, o).v;
        auto two = propagate(bg, 0.4, 1.0, mid, o).v;
        out.transition_error = std::max(l2_norm(back - hd), l2_norm(two - v)) / l2_norm(hd);
    }
    {
        std::vector<double> eps, drift;
        for (double e : {1e-5, 5e-6, 2.5e-6}) {
            auto bg = physical_background(propagator_seed(g, p, e), cfg, 1.0);
            auto hd = propagate(bg, 0.0, 0.0, h, o).v;
            auto v = propagate(bg, 0.0, 1.0, h, o).v;
            eps.push_back(e);
            drift.push_back(std::abs(l2_norm(v) - l2_norm(hd)) / l2_norm(hd));
        }
        out.drift_slope = loglog_slope(eps, drift);
    }
    {
        std::vector<double> sizes, defects;
        for (double e : {1e-5, 5e-6, 2.5e-6}) {
            JetState st(trig(g, e, 2, true), trig(g, e, 2, false), p);
            auto b = background_sample(0.0, st, cfg);
            sizes.push_back(sobolev_norm(b.u, cfg.s0));
            defects.push_back(selfadjoint_defect(b.coef, h, p));
        }
        out.defect_slope = loglog_slope(sizes, defects);
    }
    {
        JetState s0(trig(g, 2e-5, 3, true), RealField(g), p);
        for (double dt : {0.1, 0.05, 0.025}) {
            IntegratorConfig ic;
            ic.dt = dt;
            ic.t_end = 1.0;
            ic.dno = cfg.coords.dno;
            BackgroundTrajectory bg;
            auto ex = extended_samples(simulate(s0, ic), cfg, &bg);
            PropagatorOptions od;
            od.dt_lin = dt / 4;
            out.duhamel_dt.push_back(dt);
            out.duhamel_residuals.push_back(duhamel_residual(ex, bg, od, cfg.s0));
        }
        out.duhamel_order = loglog_slope(out.duhamel_dt, out.duhamel_residuals);
    }
    return out;
}

ManifoldCheck manifold_check(const ManifoldConfig& cfg, int n_modes, const std::vector<double>& norms) {
    const auto& p = cfg.ext.coords.params;
    FourierGrid g(n_modes);
    ManifoldCheck out;
    out.norms = norms;
    out.mu = growth_rate_min(p);
    out.lambda = growth_rate_max(p);
    std::vector<HyperbolicSolution> sols;
    for (double nf : norms) {
        Spectrum f(g);
        f.set(1, cplx(0.0, 0.5));
        f.set(-1, cplx(0.0, 0.5));
        f = cplx(nf / sobolev_norm(f, cfg.ext.s0)) * f;
        auto s = solve_stable(f, cfg);
        out.iterations.push_back(s.iterations);
        out.residuals.push_back(s.residual);
        out.decay_rates.push_back(s.fitted_decay);
        out.tangency.push_back(tangency_defect(s, cfg));
        for (size_t k = 1; k < s.history.size(); ++k) out.monotone = out.monotone && s.history[k] < s.history[k - 1];
        sols.push_back(std::move(s));
    }
    if (norms.size() >= 2) out.tangency_slope = loglog_slope(norms, out.tangency);
    auto rc = resolve(cfg);
    const double sim_dt = rc.quad_dt / std::max(1.0, std::round(rc.quad_dt / 0.05));
    out.replay_deviation = verify_decay_equivalence(sols.front(), cfg, 0.25 * sols.front().horizon, sim_dt).replay_deviation;
    return out;
}

Spectrum center_probe_datum(const FourierGrid& g, double norm, double s0) {
    Spectrum f(g);
    f.set(2, cplx(0.5, 0.2));
    f.set(-2, cplx(0.3, -0.1));
    f.set(3, cplx(0.1, 0.3));
    return cplx(norm / sobolev_norm(f, s0)) * f;
}

CenterCheck center_check(const CenterConfig& cfg, int n_modes, const std::vector<double>& norms) {
    const auto& p = cfg.ext.coords.params;
    const double s0 = cfg.ext.s0;
    FourierGrid g(n_modes);
    CenterCheck out;
    out.norms = norms;
    for (double nf : norms) {
        auto s = solve_center(center_probe_datum(g, nf, s0), cfg);
        out.all_converged = out.all_converged && s.converged;
        out.g_norms.push_back(sobolev_norm(s.g, s0));
        out.cone_ratios.push_back(s.cone_ratio);
    }
    bool positive = std::all_of(out.g_norms.begin(), out.g_norms.end(), [](double v) { return v > 0.0; });
    if (norms.size() >= 2 && positive) out.slope = loglog_slope(norms, out.g_norms);

    const double eps = norms.front();
    auto r1 = lifespan_probe(center_probe_datum(g, eps, s0), cfg, 4.0, out.lifespan_c / eps, 5.0);
    auto r2 = lifespan_probe(center_probe_datum(g, 0.5 * eps, s0), cfg, 4.0, 2.0 * out.lifespan_c / eps, 5.0);
    out.certified = r1.certified;
    out.certified_half = r2.certified;
    out.lifespan_exited = r1.exited || r2.exited;

    auto f = center_probe_datum(g, eps, s0);
    auto seed = solve_center(f, cfg);
    Spectrum e(g);
    e.set(1, 0.5);
    e.set(-1, 0.5);
    e = cplx(eps / sobolev_norm(e, s0)) * proj_u(e, p);
    auto on = run_extended(seed.g + f, 20.0, cfg, false);
    auto off = run_extended(seed.g + f + e, 20.0, cfg, false);
    out.on_cone_escaped = on.escaped;
    out.off_cone_escaped = off.escaped;
    out.off_cone_exit_time = off.exit_time;
    return out;
}

}  // namespace jetstab
