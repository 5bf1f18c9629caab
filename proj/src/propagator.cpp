#include "jetstab/propagator.hpp"

#include <algorithm>
#include <cmath>

#include "jetstab/errors.hpp"

namespace jetstab {

namespace {

const cplx I(0.0, 1.0);

bool dispersive_index(const FourierGrid& g, int k, const DispersionParams& p) {
    int xi = g.freq(k);
    if (xi == g.nyquist()) return false;
    return !(std::abs(xi) >= 1 && p.rho * std::abs(xi) < 1.0);
}

Spectrum project_d(const Spectrum& s, const DispersionParams& p) {
    Spectrum out = s;
    for (int k = 0; k < s.size(); ++k)
        if (!dispersive_index(s.grid, k, p)) out.c[k] = 0.0;
    return out;
}

void flat_phase(Spectrum& v, double dt, const DispersionParams& p) {
    for (int k = 0; k < v.size(); ++k) {
        if (v.c[k] == cplx(0.0)) continue;
        v.c[k] *= std::exp(I * (lambda_d(v.grid.freq(k), p) * dt));
    }
}

Eigen::VectorXcd to_vec(const Spectrum& s) {
    Eigen::VectorXcd x(s.size());
    for (int k = 0; k < s.size(); ++k) x(k) = s.c[k];
    return x;
}

void from_vec(const Eigen::VectorXcd& x, Spectrum& s) {
    for (int k = 0; k < s.size(); ++k) s.c[k] = x(k);
}

// i Pi_d (T_gamma - Lambda_d(D)) Pi_d
Eigen::MatrixXcd variable_part(const ExtendedCoefficients& c, const FourierGrid& g, const DispersionParams& p) {
    Eigen::MatrixXcd a = extended_matrix(c, g, p);
    const int n = g.size();
    for (int k = 0; k < n; ++k) a(k, k) -= lambda_d(g.freq(k), p);
    for (int k = 0; k < n; ++k) {
        if (dispersive_index(g, k, p)) continue;
        a.row(k).setZero();
        a.col(k).setZero();
    }
    return I * a;
}

// One Strang step of signed length dt starting at t.
void strang_step(const BackgroundTrajectory& bg, double t, double dt, Spectrum& v, const Forcing& f) {
    const auto& p = bg.cfg.coords.params;
    const auto& g = bg.grid;
    flat_phase(v, 0.5 * dt, p);
    const double tm = t + 0.5 * dt;
    auto a = variable_part(bg.coefficients(tm), g, p);
    Eigen::VectorXcd x = to_vec(v);
    Eigen::VectorXcd b = x + (0.5 * dt) * (a * x);
    if (f) b += dt * to_vec(project_d(f(tm), p));
    if (a.cwiseAbs().maxCoeff() == 0.0) {
        x = b;
    } else {
        Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(g.size(), g.size()) - (0.5 * dt) * a;
        Eigen::PartialPivLU<Eigen::MatrixXcd> lu(m);
        x = lu.solve(b);
        if (!x.allFinite()) throw NumericError("implicit midpoint solve failed in the propagator");
    }
    from_vec(x, v);
    flat_phase(v, 0.5 * dt, p);
}

int step_count(double span, double dt_lin) {
    if (!(dt_lin > 0.0) || !std::isfinite(dt_lin)) throw ConfigError("dt_lin must be positive");
    if (span == 0.0) return 0;
    return std::max(1, int(std::ceil(std::abs(span) / dt_lin - 1e-9)));
}

}  // namespace

void BackgroundTrajectory::push(BackgroundSample s) {
    if (!(s.u.grid == grid)) throw ConfigError("background samples must share one grid");
    if (!samples.empty() && !(s.t > samples.back().t)) throw ConfigError("background times must increase strictly");
    samples.push_back(std::move(s));
}

double BackgroundTrajectory::t_min() const {
    if (samples.empty()) throw ConfigError("empty background");
    return samples.front().t;
}

double BackgroundTrajectory::t_max() const {
    if (samples.empty()) throw ConfigError("empty background");
    return samples.back().t;
}

bool BackgroundTrajectory::contains(double t) const {
    if (samples.empty()) return false;
    const double slack = 1e-9 * std::max(1.0, t_max() - t_min());
    return t >= t_min() - slack && t <= t_max() + slack;
}

ExtendedCoefficients BackgroundTrajectory::coefficients(double t) const {
    if (!contains(t)) throw ConfigError("time outside the background span");
    if (samples.size() == 1 || t <= samples.front().t) return samples.front().coef;
    if (t >= samples.back().t) return samples.back().coef;
    auto it = std::upper_bound(samples.begin(), samples.end(), t,
                               [](double x, const BackgroundSample& s) { return x < s.t; });
    const auto& b = *it;
    const auto& a = *(it - 1);
    return interpolate(a.coef, b.coef, (t - a.t) / (b.t - a.t));
}

BackgroundTrajectory flat_background(const FourierGrid& g, const ExtendedConfig& cfg, double t0, double t1) {
    BackgroundTrajectory bg(g, cfg);
    JetState zero(g, cfg.coords.params);
    double lo = std::min(t0, t1), hi = std::max(t0, t1);
    bg.push(background_sample(lo, zero, cfg));
    if (hi > lo) bg.push(background_sample(hi, zero, cfg));
    return bg;
}

BackgroundSample background_sample(double t, const JetState& s, const ExtendedConfig& cfg) {
    BackgroundSample b;
    b.t = t;
    b.u = to_diagonal(s, cfg.coords);
    b.coef = extended_coefficients(b.u, s, cfg);
    return b;
}

BackgroundSample background_sample(double t, const Spectrum& u, const ExtendedConfig& cfg, const JetState* guess) {
    BackgroundSample b;
    b.t = t;
    b.u = u;
    b.coef = lift(u, cfg, guess).coef;
    return b;
}

Forcing sampled_forcing(std::vector<double> times, std::vector<Spectrum> values) {
    if (times.size() != values.size() || times.empty()) throw ConfigError("forcing samples mismatch");
    if (times.size() > 1 && times.front() > times.back()) {
        std::reverse(times.begin(), times.end());
        std::reverse(values.begin(), values.end());
    }
    return [times = std::move(times), values = std::move(values)](double t) -> Spectrum {
        if (times.size() == 1 || t <= times.front()) return values.front();
        if (t >= times.back()) return values.back();
        auto it = std::upper_bound(times.begin(), times.end(), t);
        size_t j = it - times.begin();
        double th = (t - times[j - 1]) / (times[j] - times[j - 1]);
        return cplx(1.0 - th) * values[j - 1] + cplx(th) * values[j];
    };
}

PropagatorRun propagate(const BackgroundTrajectory& bg, double t0, double t1, const Spectrum& h,
                        const PropagatorOptions& opt, const Forcing& f) {
    if (!bg.contains(t0) || !bg.contains(t1)) throw ConfigError("propagation interval outside the background span");
    if (!(h.grid == bg.grid)) throw ConfigError("propagated datum and background use different grids");
    PropagatorRun run;
    run.t0 = t0;
    run.t1 = t1;
    run.steps = step_count(t1 - t0, opt.dt_lin);
    run.dt_lin = run.steps ? (t1 - t0) / run.steps : 0.0;
    run.v = project_d(h, bg.cfg.coords.params);
    for (int n = 0; n < run.steps; ++n) {
        strang_step(bg, t0 + n * run.dt_lin, run.dt_lin, run.v, f);
        if (opt.log_norms) run.norm_log.push_back(l2_norm(run.v));
    }
    return run;
}

std::vector<Spectrum> propagate_path(const BackgroundTrajectory& bg, const std::vector<double>& times,
                                     const Spectrum& h, const PropagatorOptions& opt, const Forcing& f) {
    std::vector<Spectrum> out;
    if (times.empty()) return out;
    for (size_t j = 2; j < times.size(); ++j)
        if ((times[j] - times[j - 1]) * (times[1] - times[0]) <= 0.0) throw ConfigError("times must be monotone");
    out.push_back(propagate(bg, times[0], times[0], h, opt, f).v);
    for (size_t j = 1; j < times.size(); ++j)
        out.push_back(propagate(bg, times[j - 1], times[j], out.back(), opt, f).v);
    return out;
}

Eigen::MatrixXcd extended_matrix(const ExtendedCoefficients& c, const FourierGrid& g, const DispersionParams& p) {
    return quantization_matrix(extended_symbol(c, g, p, true).sample(), Quantization::exact_mean);
}

double selfadjoint_defect(const ExtendedCoefficients& c, const Spectrum& v, const DispersionParams& p) {
    double nv = l2_norm(v);
    if (nv == 0.0) return 0.0;
    Eigen::MatrixXcd q = extended_matrix(c, v.grid, p);
    Eigen::MatrixXcd d = q - q.adjoint();
    return (d * to_vec(v)).norm() / to_vec(v).norm();
}

double selfadjoint_defect(const Spectrum& u, const Spectrum& v, const ExtendedConfig& cfg) {
    return selfadjoint_defect(lift(u, cfg).coef, v, cfg.coords.params);
}

double selfadjoint_defect_symbolic(const ExtendedCoefficients& c, const Spectrum& v, const DispersionParams& p,
                                   double r) {
    double nv = l2_norm(v);
    if (nv == 0.0) return 0.0;
    auto sym = extended_symbol(c, v.grid, p, true);
    Eigen::MatrixXcd q = quantization_matrix(sym.sample(), Quantization::exact_mean);
    Eigen::MatrixXcd qa = quantization_matrix(adjoint_symbol(sym, r).sample(), Quantization::exact_mean);
    return ((q - qa) * to_vec(v)).norm() / to_vec(v).norm();
}

std::vector<ExtendedSample> extended_samples(const Trajectory& tr, const ExtendedConfig& cfg, BackgroundTrajectory* bg) {
    std::vector<ExtendedSample> out;
    if (tr.samples.empty()) return out;
    const auto& g = tr.samples.front().state.grid();
    if (bg) *bg = BackgroundTrajectory(g, cfg);
    std::vector<BackgroundSample> bs;
    for (const auto& s : tr.samples) {
        LiftedState ls;
        ls.u = to_diagonal(s.state, cfg.coords);
        ls.state = s.state;
        ls.coef = extended_coefficients(ls.u, s.state, cfg);
        ls.lifted = true;
        out.push_back({s.t, ls.u, extended_remainder(ls, cfg)});
        if (bg) bs.push_back({s.t, ls.u, ls.coef});
    }
    if (bg) {
        if (bs.size() > 1 && bs.front().t > bs.back().t) std::reverse(bs.begin(), bs.end());
        for (auto& b : bs) bg->push(std::move(b));
    }
    return out;
}

double duhamel_residual(const std::vector<ExtendedSample>& traj, const BackgroundTrajectory& bg,
                        const PropagatorOptions& opt, double s_index) {
    if (traj.empty()) return 0.0;
    const auto& p = bg.cfg.coords.params;
    const auto& g = traj.front().u.grid;
    const size_t n = traj.size();
    std::vector<double> times(n);
    std::vector<Spectrum> rd(n), ru(n), rs(n);
    for (size_t j = 0; j < n; ++j) {
        times[j] = traj[j].t;
        rd[j] = project_d(traj[j].r, p);
        ru[j] = proj_u(traj[j].r, p);
        rs[j] = proj_s(traj[j].r, p);
    }
    const auto& u0 = traj.front().u;
    // dispersive part: F(t,t0) Pi_d u0 + int F(t,tau) Pi_d R
    auto disp = propagate_path(bg, times, u0, opt, sampled_forcing(times, rd));
    auto pu0 = proj_u(u0, p), ps0 = proj_s(u0, p);
    auto grow = [&](const Spectrum& s, double t) {
        return apply_multiplier([&](int xi) { return cplx(std::exp(t * lambda_g(xi, p))); }, s);
    };
    double worst = 0.0;
    for (size_t k = 0; k < n; ++k) {
        const double tk = times[k];
        Spectrum rhs = grow(pu0, tk - times[0]) + grow(ps0, times[0] - tk) + disp[k];
        for (size_t j = 0; j <= k && k > 0; ++j) {
            double w = 0.0;
            if (j > 0) w += 0.5 * (times[j] - times[j - 1]);
            if (j < k) w += 0.5 * (times[j + 1] - times[j]);
            rhs = rhs + cplx(w) * (grow(ru[j], tk - times[j]) + grow(rs[j], times[j] - tk));
        }
        Spectrum d = traj[k].u - rhs;
        d.c[g.index(g.nyquist())] = 0.0;
        worst = std::max(worst, sobolev_norm(d, s_index));
    }
    return worst;
}

}  // namespace jetstab
