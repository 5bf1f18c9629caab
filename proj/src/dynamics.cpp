#include "jetstab/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "jetstab/errors.hpp"

namespace jetstab {

std::string to_string(RunStatus s) {
    switch (s) {
        case RunStatus::ok: return "ok";
        case RunStatus::pinch_off: return "pinch_off";
        case RunStatus::diverged: return "diverged";
    }
    return "unknown";
}

RealField mean_curvature(const RealField& eta, const DispersionParams& p) {
    auto ex = derivative(eta).v;
    auto exx = derivative(eta, 2).v;
    RealField h(eta.grid);
    for (int i = 0; i < eta.size(); ++i) {
        double r = p.rho + eta.v[i];
        if (!(r > 0.0)) throw DomainError("pinch-off: rho + eta <= 0");
        double q = 1.0 + ex[i] * ex[i];
        h.v[i] = -exx[i] / std::pow(q, 1.5) + 1.0 / (r * std::sqrt(q));
    }
    return dealias(h);
}

StateRate rhs(const JetState& s, const DnoOptions& o) {
    const auto& p = s.params;
    auto ex = derivative(s.eta).v;
    auto px = derivative(s.psi).v;
    auto exx = derivative(s.eta, 2).v;
    auto g = dno_corrected(s.eta, s.psi, p, o);
    RealField dpsi(s.grid());
    for (int i = 0; i < s.eta.size(); ++i) {
        double q = 1.0 + ex[i] * ex[i];
        double sq = std::sqrt(q);
        double r = p.rho + s.eta.v[i];
        if (!(r > 0.0)) throw DomainError("pinch-off: rho + eta <= 0");
        double num = px[i] * ex[i] + g.v[i];
        // 1/rho - 1/(r sqrt q) without the O(1) cancellation
        double cap = (s.eta.v[i] * sq + p.rho * ex[i] * ex[i] / (sq + 1.0)) / (p.rho * r * sq);
        dpsi.v[i] = -0.5 * px[i] * px[i] + num * num / (2.0 * q) + exx[i] / (q * sq) + cap;
    }
    auto dp = dealias(to_spectrum(dpsi));
    dp.set(0, 0.0);
    return {dealias(g), from_spectrum(dp)};
}

StateRate nonlinear_part(const JetState& s, const DnoOptions& o) {
    const auto& p = s.params;
    auto full = rhs(s, o);
    auto eh = to_spectrum(s.eta);
    auto ph = to_spectrum(s.psi);
    auto lin_eta = dno_flat(ph, p);
    auto lin_psi = apply_multiplier([&](int xi) { return cplx(xi == 0 ? 0.0 : -hprime0(xi, p)); }, eh);
    return {full.deta - from_spectrum(dealias(lin_eta)), full.dpsi - from_spectrum(dealias(lin_psi))};
}

void linear_exponential(const Spectrum& eta, const Spectrum& psi, double t, const DispersionParams& p, Spectrum& eta_out,
                        Spectrum& psi_out) {
    eta_out = Spectrum(eta.grid);
    psi_out = Spectrum(eta.grid);
    for (int k = 0; k < eta.size(); ++k) {
        int xi = eta.grid.freq(k);
        double a = g0_multiplier(xi, p);
        double c = xi == 0 ? 0.0 : -hprime0(xi, p);
        double ac = a * c;
        double c0, s1;  // exp(tM) = c0 I + s1 M
        if (ac > 0.0) {
            double w = std::sqrt(ac);
            c0 = std::cosh(w * t);
            s1 = std::sinh(w * t) / w;
        } else if (ac < 0.0) {
            double w = std::sqrt(-ac);
            c0 = std::cos(w * t);
            s1 = std::sin(w * t) / w;
        } else {
            c0 = 1.0;
            s1 = t;
        }
        eta_out.c[k] = c0 * eta.c[k] + s1 * a * psi.c[k];
        psi_out.c[k] = s1 * c * eta.c[k] + c0 * psi.c[k];
    }
}

namespace {

struct Pair {
    Spectrum e, s;
};

Pair operator+(const Pair& a, const Pair& b) { return {a.e + b.e, a.s + b.s}; }
Pair operator*(double h, const Pair& a) { return {cplx(h) * a.e, cplx(h) * a.s}; }

Pair expo(const Pair& u, double t, const DispersionParams& p) {
    Pair out;
    linear_exponential(u.e, u.s, t, p, out.e, out.s);
    return out;
}

Pair nonlin(const Pair& u, const DispersionParams& p, const DnoOptions& o) {
    JetState st(from_spectrum(u.e), from_spectrum(u.s), p);
    auto n = nonlinear_part(st, o);
    return {to_spectrum(n.deta), to_spectrum(n.dpsi)};
}

}  // namespace

JetState step(const JetState& s, double h, const DnoOptions& o) {
    const auto& p = s.params;
    Pair u{dealias(to_spectrum(s.eta)), dealias(to_spectrum(s.psi))};
    u.s.set(0, 0.0);
    Pair k1 = nonlin(u, p, o);
    Pair k2 = nonlin(expo(u + (0.5 * h) * k1, 0.5 * h, p), p, o);
    Pair eu2 = expo(u, 0.5 * h, p);
    Pair k3 = nonlin(eu2 + (0.5 * h) * k2, p, o);
    Pair eu = expo(u, h, p);
    Pair k4 = nonlin(eu + h * expo(k3, 0.5 * h, p), p, o);
    Pair out = eu + (h / 6.0) * (expo(k1, h, p) + 2.0 * expo(k2 + k3, 0.5 * h, p) + k4);
    out.e = dealias(out.e);
    out.s = dealias(out.s);
    out.s.set(0, 0.0);
    return JetState(from_spectrum(out.e), from_spectrum(out.s), p);
}

double delta_eta(const RealField& eta) {
    auto [lo, hi] = std::minmax_element(eta.v.begin(), eta.v.end());
    return *hi - *lo;
}

Diagnostics diagnose(const JetState& s, const IntegratorConfig& cfg) {
    Diagnostics d;
    d.delta_eta = delta_eta(s.eta);
    d.hs_norm = sobolev_norm(to_complex(s), cfg.hs_index);
    auto g = dno_corrected(s.eta, s.psi, s.params, cfg.dno);
    double f = 0.0;
    for (int i = 0; i < s.eta.size(); ++i) f += (s.params.rho + s.eta.v[i]) * g.v[i];
    d.flux = 2.0 * std::numbers::pi * f / s.eta.size();
    return d;
}

namespace {

bool pinched(const JetState& s, double c) {
    double lim = c < 0.0 ? 0.25 * s.params.rho : c;
    for (double v : s.eta.v)
        if (s.params.rho + v < lim) return true;
    return false;
}

bool finite(const JetState& s) {
    for (int i = 0; i < s.eta.size(); ++i)
        if (!std::isfinite(s.eta.v[i]) || !std::isfinite(s.psi.v[i])) return false;
    return true;
}

}  // namespace

Trajectory simulate(const JetState& s0, const IntegratorConfig& cfg) {
    if (cfg.dt == 0.0 || !std::isfinite(cfg.dt)) throw ConfigError("dt must be nonzero");
    if (cfg.snapshot_stride < 1) throw ConfigError("snapshot_stride must be >= 1");
    Trajectory tr;
    const long steps = std::lround(cfg.t_end / std::abs(cfg.dt));
    JetState s = s0;
    auto record = [&](double t) {
        TrajectorySample smp;
        smp.t = t;
        smp.state = s;
        smp.diag = diagnose(s, cfg);
        tr.samples.push_back(std::move(smp));
    };
    DnoOptions o = cfg.dno;
    try {
        if (pinched(s, cfg.min_radius)) {
            tr.status = RunStatus::pinch_off;
            tr.message = "initial state below degeneracy threshold";
            return tr;
        }
        record(0.0);
        for (long n = 1; n <= steps; ++n) {
            s = step(s, cfg.dt, o);
            if (!finite(s)) {
                tr.status = RunStatus::diverged;
                tr.message = "non-finite state";
                return tr;
            }
            if (pinched(s, cfg.min_radius)) {
                tr.status = RunStatus::pinch_off;
                tr.message = "rho + eta fell below the degeneracy threshold";
                record(n * cfg.dt);
                return tr;
            }
            if (n % cfg.snapshot_stride == 0 || n == steps) record(n * cfg.dt);
        }
    } catch (const DomainError& e) {
        tr.status = RunStatus::pinch_off;
        tr.message = e.what();
    } catch (const NumericError& e) {
        tr.status = RunStatus::diverged;
        tr.message = e.what();
    }
    return tr;
}

JetState growth_seed(const FourierGrid& g, const DispersionParams& p, int xi, double amplitude) {
    SpectralSplit split(g, p);
    if (split.is_growing(xi)) {
        Spectrum z(g);
        z.set(xi, 1.0);
        z.set(-xi, 1.0);
        auto st = from_complex(z, p);
        double scale = amplitude / (2.0 * std::abs(to_spectrum(st.eta).at(xi)));
        return JetState(scale * st.eta, scale * st.psi, p);
    }
    return JetState(RealField::from_function(g, [&](double x) { return amplitude * std::cos(xi * x); }), RealField(g),
                    p);
}

GrowthRow growth_fit(const DispersionParams& p, int xi, const GrowthScanConfig& cfg, double direction) {
    FourierGrid g(cfg.n_modes);
    GrowthRow row;
    row.xi = xi;
    row.k = p.rho * xi;
    row.omega_rayleigh = lambda_g(xi, p);
    const bool unstable = row.omega_rayleigh > 0.0;
    const double amp = cfg.amplitude;
    double lo, hi, t_max;
    if (direction > 0) {
        lo = cfg.window_low_factor * amp;
        hi = cfg.window_high;
        t_max = unstable ? (std::log(hi / (2.0 * amp)) + 2.0) / row.omega_rayleigh : cfg.t_end_dispersive;
    } else {
        // backward: the eigenvector decays; fit over two decades below the seed
        hi = 2.0 * amp;
        lo = 2e-2 * amp;
        t_max = unstable ? (std::log(hi / lo) + 0.5) / row.omega_rayleigh : cfg.t_end_dispersive;
    }
    JetState s = growth_seed(g, p, xi, amp);
    const double dt = direction > 0 ? std::abs(cfg.dt) : -std::abs(cfg.dt);
    const long steps = std::lround(t_max / std::abs(dt));
    std::vector<double> ts, ls;
    try {
        for (long n = 0; n <= steps; ++n) {
            double d = delta_eta(s.eta);
            if (!std::isfinite(d)) {
                row.status = RunStatus::diverged;
                break;
            }
            if (d >= lo && d <= hi) {
                ts.push_back(n * dt);
                ls.push_back(std::log(d));
            }
            if (direction > 0 && d > 2.0 * hi) break;
            if (n < steps) s = step(s, dt, cfg.dno);
        }
    } catch (const DomainError&) {
        row.status = RunStatus::pinch_off;
    } catch (const NumericError&) {
        row.status = RunStatus::diverged;
    }
    row.fit_points = static_cast<int>(ts.size());
    if (ts.size() >= 2) {
        double mt = 0, ml = 0;
        for (size_t i = 0; i < ts.size(); ++i) {
            mt += ts[i];
            ml += ls[i];
        }
        mt /= ts.size();
        ml /= ts.size();
        double sxy = 0, sxx = 0;
        for (size_t i = 0; i < ts.size(); ++i) {
            sxy += (ts[i] - mt) * (ls[i] - ml);
            sxx += (ts[i] - mt) * (ts[i] - mt);
        }
        row.omega_measured = sxy / sxx;
    } else {
        row.omega_measured = 0.0;
        row.flagged = unstable;
    }
    return row;
}

std::vector<GrowthRow> growth_scan(const DispersionParams& p, const std::vector<int>& modes, const GrowthScanConfig& cfg,
                                   int threads) {
    std::vector<GrowthRow> rows(modes.size());
#pragma omp parallel for schedule(dynamic) num_threads(std::max(1, threads))
    for (size_t i = 0; i < modes.size(); ++i) rows[i] = growth_fit(p, modes[i], cfg);
    return rows;
}

}  // namespace jetstab
