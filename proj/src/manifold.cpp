#include "jetstab/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "jetstab/errors.hpp"

namespace jetstab {

namespace {

const cplx I(0.0, 1.0);

Spectrum decay(const Spectrum& s, double t, const DispersionParams& p) {
    return apply_multiplier([&](int xi) { return cplx(std::exp(-t * lambda_g(xi, p))); }, s);
}

bool growing_freq(int xi, const DispersionParams& p) { return std::abs(xi) >= 1 && p.rho * std::abs(xi) < 1.0; }

Spectrum project_d(const Spectrum& s, const DispersionParams& p) {
    Spectrum out = s;
    for (int k = 0; k < s.size(); ++k) {
        int xi = s.grid.freq(k);
        if (growing_freq(xi, p) || xi == s.grid.nyquist()) out.c[k] = 0.0;
    }
    return out;
}

Spectrum project_g(const Spectrum& s, const DispersionParams& p) {
    Spectrum out = s;
    for (int k = 0; k < s.size(); ++k)
        if (!growing_freq(s.grid.freq(k), p)) out.c[k] = 0.0;
    return out;
}

Spectrum decaying_part(int sigma, const Spectrum& s, const DispersionParams& p) {
    return sigma > 0 ? proj_s(s, p) : proj_u(s, p);
}

Spectrum growing_part(int sigma, const Spectrum& s, const DispersionParams& p) {
    return sigma > 0 ? proj_u(s, p) : proj_s(s, p);
}

std::string norm_text(double v) {
    std::ostringstream os;
    os.precision(3);
    os << std::scientific << v;
    return os.str();
}

double sup_norm_diff(const std::vector<Spectrum>& a, const std::vector<Spectrum>& b, double s) {
    double m = 0.0;
    for (size_t k = 0; k < a.size(); ++k) m = std::max(m, sobolev_norm(a[k] - b[k], s));
    return m;
}

}  // namespace

ManifoldConfig resolve(const ManifoldConfig& cfg) {
    ManifoldConfig r = cfg;
    const auto& p = cfg.ext.coords.params;
    const double mu = growth_rate_min(p);
    if (!(mu > 0.0)) throw ConfigError("no growing modes at this rho; hyperbolic manifolds are empty");
    if (!(cfg.quad_dt > 0.0)) throw ConfigError("quad_dt must be positive");
    if (!(cfg.tail_tol > 0.0 && cfg.tail_tol < 1.0)) throw ConfigError("tail_tol must lie in (0, 1)");
    if (!(cfg.damping > 0.0 && cfg.damping <= 1.0)) throw ConfigError("damping must lie in (0, 1]");
    if (!(cfg.tol > 0.0)) throw ConfigError("tol must be positive");
    if (cfg.max_iter < 1) throw ConfigError("max_iter must be >= 1");
    double t = cfg.horizon > 0.0 ? cfg.horizon : std::log(1.0 / cfg.tail_tol) / mu;
    r.horizon = std::ceil(t / cfg.quad_dt - 1e-9) * cfg.quad_dt;
    if (r.horizon * mu < 10.0) throw ConfigError("horizon too short: need T * mu >= 10 (mu = " + norm_text(mu) + ")");
    r.weight_a = cfg.weight_a < 0.0 ? 0.5 * mu : cfg.weight_a;
    if (r.weight_a > mu) throw ConfigError("weight_a must not exceed mu = " + norm_text(mu));
    r.dt_lin = cfg.dt_lin > 0.0 ? cfg.dt_lin : 0.25 * cfg.quad_dt;
    return r;
}

std::vector<double> sample_times(int sigma, const ManifoldConfig& rc) {
    const int n = int(std::lround(rc.horizon / rc.quad_dt));
    std::vector<double> t(n + 1);
    for (int k = 0; k <= n; ++k) t[k] = sigma * k * rc.quad_dt;
    return t;
}

std::vector<Spectrum> lp_map(int sigma, const std::vector<double>& times, const std::vector<Spectrum>& u,
                             const Spectrum& f, const ManifoldConfig& rc, LiftCache* cache,
                             std::vector<Spectrum>* r_out) {
    const size_t n = times.size();
    const auto& ext = rc.ext;
    const auto& p = ext.coords.params;
    const auto& g = f.grid;
    const double h = std::abs(times[1] - times[0]);
    if (cache && cache->states.size() != n) {
        cache->states.assign(n, JetState());
        cache->valid.assign(n, false);
    }

    std::vector<Spectrum> r(n);
    std::vector<BackgroundSample> bs(n);
    for (size_t k = 0; k < n; ++k) {
        const JetState* guess = cache && cache->valid[k] ? &cache->states[k] : nullptr;
        auto ls = lift(u[k], ext, guess);
        r[k] = extended_remainder(ls, ext);
        bs[k] = {times[k], u[k], ls.coef};
        if (cache && ls.lifted) {
            cache->states[k] = ls.state;
            cache->valid[k] = true;
        }
    }
    BackgroundTrajectory bg(g, ext);
    if (sigma > 0)
        for (auto& b : bs) bg.push(b);
    else
        for (size_t k = n; k-- > 0;) bg.push(bs[k]);

    std::vector<Spectrum> out(n);
    // decaying directions: forward recursion in |t|
    Spectrum acc(g);
    for (size_t k = 0; k < n; ++k) {
        auto dk = decaying_part(sigma, r[k], p);
        if (k > 0) acc = decay(acc + cplx(0.5 * h) * decaying_part(sigma, r[k - 1], p), h, p) + cplx(0.5 * h) * dk;
        out[k] = decay(f, std::abs(times[k]), p) + cplx(double(sigma)) * acc;
    }
    // growing directions: tail integral from |t| to the horizon
    Spectrum tail(g);
    for (size_t k = n; k-- > 0;) {
        auto gk = growing_part(sigma, r[k], p);
        if (k + 1 < n) tail = decay(tail + cplx(0.5 * h) * growing_part(sigma, r[k + 1], p), h, p) + cplx(0.5 * h) * gk;
        out[k] = out[k] - cplx(double(sigma)) * tail;
    }
    // dispersive directions: zero value at the far end, forced by Pi_d R
    std::vector<double> rev(times.rbegin(), times.rend());
    std::vector<Spectrum> rd(n);
    for (size_t k = 0; k < n; ++k) rd[k] = project_d(r[k], p);
    PropagatorOptions po;
    po.dt_lin = rc.dt_lin;
    auto path = propagate_path(bg, rev, Spectrum(g), po, sampled_forcing(times, rd));
    // modes past the dealiasing cutoff are invisible to the physical rate; T_gamma would feed them unchecked
    for (size_t k = 0; k < n; ++k) out[k] = dealias(out[k] + path[n - 1 - k]);
    if (r_out) *r_out = std::move(r);
    return out;
}

HyperbolicSolution solve_hyperbolic(int sigma, const Spectrum& f, const ManifoldConfig& cfg) {
    if (sigma != 1 && sigma != -1) throw ConfigError("sigma must be +1 or -1");
    auto rc = resolve(cfg);
    const auto& p = rc.ext.coords.params;
    const double s0 = rc.ext.s0;
    const double nf = sobolev_norm(f, s0);
    if (sobolev_norm(f - decaying_part(sigma, f, p), s0) > 1e-12 * std::max(nf, 1e-300))
        throw ConfigError(sigma > 0 ? "base point must lie in the stable subspace E_s"
                                    : "base point must lie in the unstable subspace E_u");
    HyperbolicSolution sol;
    sol.sigma = sigma;
    sol.f = f;
    sol.horizon = rc.horizon;
    sol.times = sample_times(sigma, rc);
    const size_t n = sol.times.size();
    std::vector<Spectrum> u(n);
    for (size_t k = 0; k < n; ++k) u[k] = decay(f, std::abs(sol.times[k]), p);

    LiftCache cache;
    double prev = INFINITY;
    int growth = 0;
    bool done = false;
    for (int it = 0; it < rc.max_iter; ++it) {
        std::vector<Spectrum> r;
        auto next = lp_map(sigma, sol.times, u, f, rc, &cache, &r);
        double res = sup_norm_diff(next, u, s0);
        if (!std::isfinite(res)) throw NumericError("Lyapunov-Perron iteration produced non-finite values");
        sol.history.push_back(res);
        sol.iterations = it + 1;
        if (res < rc.tol) {
            // the map output is closer to the fixed point than u by the contraction factor
            sol.u = std::move(next);
            sol.r = std::move(r);
            sol.residual = res;
            done = true;
            break;
        }
        growth = res > prev ? growth + 1 : 0;
        if (growth >= rc.growth_limit)
            throw ConvergenceError("Lyapunov-Perron iteration does not contract for |f| = " + norm_text(nf) +
                                   "; reduce the base norm");
        prev = res;
        for (size_t k = 0; k < n; ++k) u[k] = u[k] + cplx(rc.damping) * (next[k] - u[k]);
    }
    if (!done)
        throw ConvergenceError("Lyapunov-Perron iteration did not reach tol within max_iter for |f| = " +
                               norm_text(nf) + "; reduce the base norm or raise max_iter");

    sol.manifold_point = sol.u.front();
    // decay fit on the first half of the horizon
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (size_t k = 0; k < n; ++k) {
        double t = std::abs(sol.times[k]);
        double nu = sobolev_norm(sol.u[k], s0);
        if (t > 0.5 * rc.horizon || nu <= 0.0) continue;
        double y = std::log(nu);
        sx += t;
        sy += y;
        sxx += t * t;
        sxy += t * y;
        ++m;
    }
    if (m >= 2) sol.fitted_decay = -(m * sxy - sx * sy) / (m * sxx - sx * sx);
    sol.tail_bound = sobolev_norm(sol.r.back(), s0) / (growth_rate_min(p) + 2.0 * rc.weight_a);
    return sol;
}

HyperbolicSolution solve_stable(const Spectrum& f, const ManifoldConfig& cfg) { return solve_hyperbolic(1, f, cfg); }
HyperbolicSolution solve_unstable(const Spectrum& f, const ManifoldConfig& cfg) { return solve_hyperbolic(-1, f, cfg); }

Spectrum time_reflect(const Spectrum& u, const DispersionParams& p) {
    auto c = conj_field(u);
    for (int k = 0; k < c.size(); ++k) c.c[k] *= growing_freq(c.grid.freq(k), p) ? I : cplx(-1.0);
    return c;
}

double tangency_defect(const HyperbolicSolution& s, const ManifoldConfig& cfg) {
    return sobolev_norm(s.manifold_point - s.f, cfg.ext.s0);
}

DecayReport verify_decay_equivalence(const HyperbolicSolution& s, const ManifoldConfig& cfg, double window,
                                     double sim_dt) {
    auto rc = resolve(cfg);
    const double s0 = rc.ext.s0;
    DecayReport rep;
    rep.replay_window = window;
    for (size_t k = 0; k < s.times.size(); ++k) {
        double t = std::abs(s.times[k]);
        double nu = sobolev_norm(s.u[k], s0);
        rep.poly_weighted_sup = std::max(rep.poly_weighted_sup, std::pow(1.0 + t * t, 1.5) * nu);
        rep.exp_weighted_sup = std::max(rep.exp_weighted_sup, std::exp(rc.weight_a * t) * nu);
    }
    if (sobolev_norm(s.manifold_point, s0) == 0.0 || window <= 0.0) return rep;
    const int stride = int(std::lround(rc.quad_dt / sim_dt));
    if (stride < 1 || std::abs(stride * sim_dt - rc.quad_dt) > 1e-9 * rc.quad_dt)
        throw ConfigError("sim_dt must divide quad_dt");
    auto s_init = from_diagonal(s.manifold_point, rc.ext.coords);
    IntegratorConfig ic;
    ic.dt = s.sigma * sim_dt;
    ic.t_end = std::min(window, rc.horizon);
    ic.snapshot_stride = stride;
    ic.dno = rc.ext.coords.dno;
    auto tr = simulate(s_init, ic);
    if (tr.status != RunStatus::ok) throw NumericError("replay failed: " + tr.message);
    for (size_t j = 0; j < tr.samples.size() && j < s.u.size(); ++j) {
        auto up = to_diagonal(tr.samples[j].state, rc.ext.coords);
        rep.replay_deviation = std::max(rep.replay_deviation, sobolev_norm(up - s.u[j], s0));
    }
    return rep;
}

// ---- center set

CenterRun run_extended(const Spectrum& u0, double t_end, const CenterConfig& cfg, bool want_remainder,
                       const JetState* guess) {
    const auto& ext = cfg.ext;
    const double s0 = ext.s0;
    const double radius = cfg.escape_radius > 0.0 ? cfg.escape_radius : 2.0 * ext.eps0;
    CenterRun run;
    JetState st;
    try {
        st = from_diagonal(u0, ext.coords, guess);
    } catch (const NumericError& e) {
        run.escaped = true;
        run.message = std::string("initial lift failed: ") + e.what();
        return run;
    }
    IntegratorConfig ic;
    ic.dt = t_end >= 0.0 ? cfg.sim_dt : -cfg.sim_dt;
    ic.t_end = std::abs(t_end);
    ic.snapshot_stride = cfg.sample_stride;
    ic.dno = ext.coords.dno;
    auto tr = simulate(st, ic);
    for (const auto& smp : tr.samples) {
        Spectrum u;
        try {
            u = to_diagonal(smp.state, ext.coords);
        } catch (const NumericError& e) {
            run.escaped = true;
            run.exit_time = smp.t;
            run.message = e.what();
            return run;
        }
        if (sobolev_norm(u, s0) > radius) {
            run.escaped = true;
            run.exit_time = smp.t;
            run.message = "left the ball |u| <= " + norm_text(radius);
            return run;
        }
        run.times.push_back(smp.t);
        if (want_remainder) {
            LiftedState ls{u, smp.state, extended_coefficients(u, smp.state, ext), true};
            run.r.push_back(extended_remainder(ls, ext));
        }
        run.u.push_back(std::move(u));
    }
    if (tr.status != RunStatus::ok) {
        run.escaped = true;
        run.exit_time = tr.samples.empty() ? 0.0 : tr.samples.back().t;
        run.message = to_string(tr.status) + ": " + tr.message;
    }
    return run;
}

Spectrum center_map(const Spectrum& g, const Spectrum& f, const CenterConfig& cfg, bool* escaped) {
    const auto& p = cfg.ext.coords.params;
    auto u0 = g + f;
    auto fwd = run_extended(u0, cfg.horizon, cfg);
    auto bwd = fwd.escaped ? CenterRun{} : run_extended(u0, -cfg.horizon, cfg);
    if (escaped) *escaped = fwd.escaped || bwd.escaped;
    if (fwd.escaped || bwd.escaped) return g;
    Spectrum out(g.grid);
    // int_{-T}^0 e^{tau Lambda} Pi_s R and int_0^T e^{-tau Lambda} Pi_u R, trapezoid
    auto add = [&](const CenterRun& run, bool stable_part, double sign) {
        const size_t n = run.times.size();
        for (size_t k = 0; k < n; ++k) {
            double w = 0.0;
            if (k > 0) w += 0.5 * std::abs(run.times[k] - run.times[k - 1]);
            if (k + 1 < n) w += 0.5 * std::abs(run.times[k + 1] - run.times[k]);
            auto part = stable_part ? proj_s(run.r[k], p) : proj_u(run.r[k], p);
            out = out + cplx(sign * w) * decay(part, std::abs(run.times[k]), p);
        }
    };
    add(bwd, true, 1.0);
    add(fwd, false, -1.0);
    return out;
}

CenterSeed solve_center(const Spectrum& f, const CenterConfig& cfg, const Spectrum* g_guess) {
    const auto& p = cfg.ext.coords.params;
    const double s0 = cfg.ext.s0;
    if (!(cfg.horizon > 0.0) || !(cfg.sim_dt > 0.0) || cfg.sample_stride < 1)
        throw ConfigError("center horizon, sim_dt and sample_stride must be positive");
    if (!(cfg.damping > 0.0 && cfg.damping <= 1.0)) throw ConfigError("damping must lie in (0, 1]");
    const double nf = sobolev_norm(f, s0);
    if (sobolev_norm(f - project_d(f, p), s0) > 1e-12 * std::max(nf, 1e-300))
        throw ConfigError("center datum must lie in the dispersive subspace E_d");
    CenterSeed seed;
    seed.f = f;
    seed.g = g_guess ? project_g(*g_guess, p) : Spectrum(f.grid);
    double prev = INFINITY;
    int growth = 0;
    for (int it = 0; it < cfg.max_iter; ++it) {
        bool esc = false;
        auto gn = center_map(seed.g, f, cfg, &esc);
        seed.iterations = it + 1;
        if (esc) {
            seed.escaped = true;
            seed.message = "trajectory escaped the cutoff ball within the horizon";
            break;
        }
        double res = sobolev_norm(gn - seed.g, s0);
        seed.history.push_back(res);
        seed.residual = res;
        if (res <= cfg.tol * sobolev_norm(gn, s0)) {
            seed.g = gn;
            seed.converged = true;
            break;
        }
        growth = res > prev ? growth + 1 : 0;
        if (growth >= cfg.growth_limit) {
            seed.message = "Picard iteration for the hyperbolic components does not contract";
            break;
        }
        prev = res;
        seed.g = seed.g + cplx(cfg.damping) * (gn - seed.g);
    }
    if (!seed.converged && seed.message.empty()) seed.message = "Picard iteration did not reach tol within max_iter";
    seed.cone_ratio = nf > 0.0 ? sobolev_norm(seed.g, s0) / (nf * nf) : 0.0;
    seed.in_cone = seed.cone_ratio <= cfg.cone_bound;
    return seed;
}

LifespanReport lifespan_probe(const Spectrum& f, const CenterConfig& cfg, double amp_a, double t_max,
                              double reproject_every) {
    const auto& p = cfg.ext.coords.params;
    const double s0 = cfg.ext.s0;
    if (!(t_max > 0.0) || !(reproject_every > 0.0) || !(amp_a > 0.0))
        throw ConfigError("lifespan probe needs positive amplitude factor, horizon and re-projection interval");
    LifespanReport rep;
    rep.eps = sobolev_norm(f, s0);
    rep.bound = amp_a * rep.eps;
    rep.t_max = t_max;
    auto seed = solve_center(f, cfg);
    if (!seed.converged) throw ConvergenceError("center seed did not converge: " + seed.message);
    Spectrum u0 = seed.g + f;
    double t = 0.0;
    rep.certified = t_max;
    while (t < t_max - 1e-12) {
        double len = std::min(reproject_every, t_max - t);
        auto run = run_extended(u0, len, cfg, false);
        bool out = false;
        for (size_t k = 0; k < run.u.size(); ++k) {
            if (k > 0 || rep.times.empty()) {
                rep.times.push_back(t + run.times[k]);
                rep.norms.push_back(sobolev_norm(run.u[k], s0));
            }
            if (rep.norms.back() > rep.bound) {
                rep.certified = t + run.times[k];
                out = true;
                break;
            }
        }
        if (!out && run.escaped) {
            rep.certified = t + run.exit_time;
            out = true;
        }
        if (out) {
            rep.exited = true;
            break;
        }
        t += len;
        if (t >= t_max - 1e-12) break;
        const Spectrum& uend = run.u.back();
        auto fn = project_d(uend, p);
        auto gold = project_g(uend, p);
        seed = solve_center(fn, cfg, &gold);
        if (!seed.converged) {
            rep.certified = t;
            rep.exited = true;
            break;
        }
        rep.max_jump = std::max(rep.max_jump, sobolev_norm(seed.g - gold, s0));
        ++rep.reprojections;
        u0 = seed.g + fn;
    }
    return rep;
}

}  // namespace jetstab
