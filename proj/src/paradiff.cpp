#include "jetstab/paradiff.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>

#include "jetstab/bessel.hpp"
#include "jetstab/dynamics.hpp"
#include "jetstab/errors.hpp"

namespace jetstab {

namespace {

const cplx I(0.0, 1.0);

// chi table per grid size, indexed [|xi'|][|zeta|] for |zeta| < |xi'|/2.
using ChiTable = std::vector<std::vector<double>>;

const ChiTable& chi_table(int n) {
    static std::mutex mu;
    static std::map<int, std::shared_ptr<ChiTable>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return *it->second;
    auto t = std::make_shared<ChiTable>(n / 2 + 1);
    for (int a = 0; a <= n / 2; ++a) {
        auto& row = (*t)[a];
        for (int z = 0; 2 * z < a; ++z) row.push_back(quantization_cutoff(z, a));
    }
    cache[n] = t;
    return *t;
}

double chi_lookup(const ChiTable& t, int zeta, int xi) {
    int a = std::abs(xi), z = std::abs(zeta);
    if (a >= static_cast<int>(t.size())) return quantization_cutoff(zeta, xi);
    const auto& row = t[a];
    return z < static_cast<int>(row.size()) ? row[z] : 0.0;
}

cvec dx(const FourierGrid& g, const cvec& v) { return synthesize(derivative(to_spectrum(g, v), 1)); }

double sgn(double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); }

}  // namespace

double quantization_cutoff(double zeta, double xi) {
    double a = std::abs(xi);
    if (a < 4.0) return 0.0;
    double acc = 0.0;
    int jmax = static_cast<int>(std::ceil(std::log2(a))) + 2;
    for (int j = 3; j <= jmax; ++j) {
        double ph = lp_phi(std::ldexp(xi, -j));
        if (ph == 0.0) continue;
        acc += lp_chi(std::ldexp(zeta, 2 - j)) * ph;
    }
    return acc;
}

GriddedSymbol GriddedSymbol::from_values(const FourierGrid& g, const std::function<void(int, cvec&)>& values) {
    GriddedSymbol s(g);
    const int n = g.size();
#pragma omp parallel for if (n >= 128)
    for (int k = 0; k < n; ++k) {
        cvec col(n);
        values(g.freq(k), col);
        s.coef[k] = to_spectrum(g, col).c;
    }
    return s;
}

GriddedSymbol GriddedSymbol::multiplier(const FourierGrid& g, const std::function<cplx(int)>& m) {
    GriddedSymbol s(g);
    for (int k = 0; k < g.size(); ++k) s.coef[k][0] = m(g.freq(k));
    return s;
}

namespace {

// Entry of the quantization matrix for output xi, input xi'.
inline cplx quant_entry(const GriddedSymbol& a, const ChiTable& t, int xi, int k_in, int xi_in, Quantization q) {
    int zeta = xi - xi_in;
    if (2 * std::abs(zeta) >= std::abs(xi_in) && !(zeta == 0 && xi_in != 0 && q == Quantization::exact_mean))
        return 0.0;
    int kz = a.grid.index(zeta);
    if (kz < 0) return 0.0;
    double c = (zeta == 0 && q == Quantization::exact_mean) ? 1.0 : chi_lookup(t, zeta, xi_in);
    if (c == 0.0) return 0.0;
    return c * a.coef[k_in][kz];
}

}  // namespace

Spectrum paradiff_apply(const GriddedSymbol& a, const Spectrum& u, Quantization q, bool parallel) {
    if (!(a.grid == u.grid)) throw ConfigError("symbol and data on different grids");
    const int n = u.size();
    const int nyq = u.grid.nyquist();
    const auto& t = chi_table(n);
    Spectrum out(u.grid);
#pragma omp parallel for if (parallel && n >= 128) schedule(static)
    for (int k = 0; k < n; ++k) {
        int xi = u.grid.freq(k);
        if (xi == nyq) continue;
        cplx acc = 0.0;
        for (int kp = 0; kp < n; ++kp) {
            if (u.c[kp] == cplx(0.0)) continue;
            int xp = u.grid.freq(kp);
            if (xp == nyq) continue;
            acc += quant_entry(a, t, xi, kp, xp, q) * u.c[kp];
        }
        out.c[k] = acc;
    }
    return out;
}

// Reference loop over inputs; only touches the cutoff support.
Spectrum paradiff_apply_serial(const GriddedSymbol& a, const Spectrum& u, Quantization q) {
    if (!(a.grid == u.grid)) throw ConfigError("symbol and data on different grids");
    const int n = u.size();
    const int nyq = u.grid.nyquist();
    const auto& t = chi_table(n);
    Spectrum out(u.grid);
    for (int kp = 0; kp < n; ++kp) {
        if (u.c[kp] == cplx(0.0)) continue;
        int xp = u.grid.freq(kp);
        if (xp == nyq) continue;
        int half = std::abs(xp) / 2 + 1;
        for (int zeta = -half; zeta <= half; ++zeta) {
            int xi = xp + zeta;
            int k = u.grid.index(xi);
            if (k < 0 || xi == nyq) continue;
            out.c[k] += quant_entry(a, t, xi, kp, xp, q) * u.c[kp];
        }
    }
    return out;
}

Eigen::MatrixXcd quantization_matrix(const GriddedSymbol& a, Quantization q) {
    const int n = a.grid.size();
    const int nyq = a.grid.nyquist();
    const auto& t = chi_table(n);
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
    for (int kp = 0; kp < n; ++kp) {
        int xp = a.grid.freq(kp);
        if (xp == nyq) continue;
        for (int k = 0; k < n; ++k) {
            int xi = a.grid.freq(k);
            if (xi == nyq) continue;
            m(k, kp) = quant_entry(a, t, xi, kp, xp, q);
        }
    }
    return m;
}

Spectrum paraproduct(const Spectrum& a, const Spectrum& u) {
    Spectrum out(u.grid);
    const int jmax = lp_j_max(u.grid) + 1;
    for (int j = 3; j <= jmax; ++j) {
        auto du = lp_block(u, j);
        if (max_abs(du) == 0.0) continue;
        out = out + product(partial_sum(a, j - 3), du);
    }
    return out;
}

Spectrum paraproduct(const RealField& a, const Spectrum& u) { return paraproduct(to_spectrum(a), u); }

Spectrum remainder_pm(const Spectrum& a, const Spectrum& u) {
    const int jmax = lp_j_max(u.grid) + 1;
    std::vector<Spectrum> ba, bu;
    for (int j = 0; j <= jmax; ++j) {
        ba.push_back(lp_block(a, j));
        bu.push_back(lp_block(u, j));
    }
    Spectrum out(u.grid);
    for (int j = 0; j <= jmax; ++j)
        for (int k = std::max(0, j - 2); k <= std::min(jmax, j + 2); ++k) out = out + product(ba[j], bu[k]);
    return out;
}

// ---- pluri-homogeneous symbols

double special_value(Special s, int d, double k, const DispersionParams& p) {
    const double rho = p.rho;
    const double r = rho * k;
    if (s == Special::lambda1) {
        double R = bessel_ratio(r);
        double R1 = bessel_ratio_derivative(r);
        switch (d) {
            case 0: return k * R;
            case 1: return R + r * R1;
            case 2: {
                double R2 = -R1 / r + R / (r * r) - 2.0 * R * R1;
                return 2.0 * rho * R1 + rho * r * R2;
            }
        }
        throw ConfigError("special multiplier derivative order above 2");
    }
    if (r <= 1.0) return 0.0;
    double l0 = special_value(Special::lambda1, 0, k, p);
    double l1 = special_value(Special::lambda1, 1, k, p);
    double e = k * k - 1.0 / (rho * rho);
    double f = l0 * e;
    double lam = std::sqrt(f);
    if (d == 0) return lam;
    double f1 = l1 * e + 2.0 * k * l0;
    if (d == 1) return f1 / (2.0 * lam);
    if (d == 2) {
        double l2 = special_value(Special::lambda1, 2, k, p);
        double f2 = l2 * e + 4.0 * k * l1 + 2.0 * l0;
        return f2 / (2.0 * lam) - f1 * f1 / (4.0 * lam * lam * lam);
    }
    throw ConfigError("special multiplier derivative order above 2");
}

double SymbolTerm::order() const {
    double o = power;
    for (const auto& s : specials) o += (s.kind == Special::lambda1 ? 1.0 : 1.5) - s.derivative;
    return o;
}

double SymbolTerm::multiplier(double abs_xi, const DispersionParams& p) const {
    double k = std::max(abs_xi, 0.5);
    double m = power == 0.0 ? 1.0 : std::pow(k, power);
    for (const auto& s : specials) m *= special_value(s.kind, s.derivative, k, p);
    return m;
}

SymbolTerm constant_term(const FourierGrid& g, cplx even, cplx odd, double power, std::vector<SpecialFactor> specials) {
    SymbolTerm t;
    t.power = power;
    t.specials = std::move(specials);
    t.even.assign(g.size(), even);
    t.odd.assign(g.size(), odd);
    return t;
}

SymbolTerm field_term(const RealField& even, const RealField& odd, double power, std::vector<SpecialFactor> specials) {
    SymbolTerm t;
    t.power = power;
    t.specials = std::move(specials);
    t.even.assign(even.v.begin(), even.v.end());
    t.odd.assign(odd.v.begin(), odd.v.end());
    return t;
}

cvec PluriSymbol::values(int xi) const {
    cvec out(grid.size(), 0.0);
    const double s = sgn(xi);
    for (const auto& t : terms) {
        double m = t.multiplier(std::abs(xi), params);
        if (m == 0.0) continue;
        for (int j = 0; j < grid.size(); ++j) out[j] += (t.even[j] + I * s * t.odd[j]) * m;
    }
    return out;
}

GriddedSymbol PluriSymbol::sample() const {
    const int n = grid.size();
    std::vector<cvec> ev, od;
    for (const auto& t : terms) {
        ev.push_back(to_spectrum(grid, t.even).c);
        od.push_back(to_spectrum(grid, t.odd).c);
    }
    GriddedSymbol g(grid);
    for (int kp = 0; kp < n; ++kp) {
        int xi = grid.freq(kp);
        const double s = sgn(xi);
        for (std::size_t i = 0; i < terms.size(); ++i) {
            double m = terms[i].multiplier(std::abs(xi), params);
            if (m == 0.0) continue;
            for (int k = 0; k < n; ++k) g.coef[kp][k] += (ev[i][k] + I * s * od[i][k]) * m;
        }
    }
    return g;
}

PluriSymbol PluriSymbol::derivative_xi() const {
    PluriSymbol out(grid, params, top_order - 1.0);
    for (const auto& t : terms) {
        // d/dxi of (e + o i sgn) M(|xi|) = (i o + (-i e) i sgn) M'(|xi|)
        cvec ne(t.even.size()), no(t.even.size());
        for (std::size_t j = 0; j < ne.size(); ++j) {
            ne[j] = I * t.odd[j];
            no[j] = -I * t.even[j];
        }
        if (t.power != 0.0) {
            SymbolTerm a;
            a.power = t.power - 1.0;
            a.specials = t.specials;
            a.even = ne;
            a.odd = no;
            for (auto& z : a.even) z *= t.power;
            for (auto& z : a.odd) z *= t.power;
            out.add(std::move(a));
        }
        for (std::size_t k = 0; k < t.specials.size(); ++k) {
            SymbolTerm a;
            a.power = t.power;
            a.specials = t.specials;
            a.specials[k].derivative += 1;
            a.even = ne;
            a.odd = no;
            out.add(std::move(a));
        }
    }
    return out;
}

PluriSymbol PluriSymbol::derivative_x(int order) const {
    PluriSymbol out = *this;
    for (auto& t : out.terms) {
        for (int i = 0; i < order; ++i) {
            t.even = dx(grid, t.even);
            t.odd = dx(grid, t.odd);
        }
    }
    return out;
}

PluriSymbol PluriSymbol::conjugate() const {
    PluriSymbol out = *this;
    for (auto& t : out.terms) {
        for (auto& z : t.even) z = std::conj(z);
        for (auto& z : t.odd) z = -std::conj(z);
    }
    return out;
}

namespace {

SymbolTerm term_product(const SymbolTerm& a, const SymbolTerm& b, cplx scale) {
    SymbolTerm t;
    t.power = a.power + b.power;
    t.specials = a.specials;
    t.specials.insert(t.specials.end(), b.specials.begin(), b.specials.end());
    const std::size_t n = a.even.size();
    t.even.resize(n);
    t.odd.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        t.even[j] = scale * (a.even[j] * b.even[j] - a.odd[j] * b.odd[j]);
        t.odd[j] = scale * (a.even[j] * b.odd[j] + a.odd[j] * b.even[j]);
    }
    return t;
}

double factorial(int a) {
    double f = 1.0;
    for (int i = 2; i <= a; ++i) f *= i;
    return f;
}

}  // namespace

PluriSymbol compose_symbols(const PluriSymbol& a, const PluriSymbol& b, double r) {
    if (!(r > 0.0)) throw ConfigError("composition order r must be positive");
    PluriSymbol out(a.grid, a.params, a.top_order + b.top_order);
    PluriSymbol da = a;
    PluriSymbol db = b;
    for (int alpha = 0; alpha < r; ++alpha) {
        cplx c = 1.0 / (std::pow(I, alpha) * factorial(alpha));
        for (const auto& ta : da.terms) {
            double ja = da.top_order - ta.order();
            for (const auto& tb : db.terms) {
                double jb = db.top_order - tb.order();
                if (ja + jb + alpha < r - 1e-12) out.add(term_product(ta, tb, c));
            }
        }
        da = da.derivative_xi();
        db = db.derivative_x();
    }
    return out;
}

PluriSymbol adjoint_symbol(const PluriSymbol& a, double r) {
    if (!(r > 0.0)) throw ConfigError("adjoint order r must be positive");
    PluriSymbol out(a.grid, a.params, a.top_order);
    PluriSymbol d = a.conjugate();
    for (int alpha = 0; alpha < r; ++alpha) {
        cplx c = 1.0 / (std::pow(I, alpha) * factorial(alpha));
        for (const auto& t : d.terms) {
            double j = d.top_order - t.order();
            if (j + alpha < r - 1e-12) {
                SymbolTerm s = t;
                for (auto& z : s.even) z *= c;
                for (auto& z : s.odd) z *= c;
                out.add(std::move(s));
            }
        }
        d = d.derivative_xi().derivative_x();
    }
    return out;
}

namespace {

void check_radius(const RealField& eta, const DispersionParams& p) {
    for (double e : eta.v)
        if (!(p.rho + e > 0.0)) throw DomainError("pinch-off: rho + eta <= 0");
}

}  // namespace

PluriSymbol symbol_lambda(const RealField& eta, const DispersionParams& p, int order_count) {
    check_radius(eta, p);
    const auto& g = eta.grid;
    PluriSymbol s(g, p, 1.0);
    s.add(constant_term(g, 1.0, 0.0, 0.0, {{Special::lambda1, 0}}));
    if (order_count >= 2) {
        auto ex = derivative(eta).v;
        RealField ev(g), od(g);
        for (int j = 0; j < g.size(); ++j) {
            double r = p.rho + eta.v[j];
            ev.v[j] = eta.v[j] / (2.0 * p.rho * r);
            od.v[j] = -ex[j] / (2.0 * r);
        }
        s.add(field_term(ev, od, 0.0));
    }
    return s;
}

PluriSymbol symbol_h(const RealField& eta, const DispersionParams& p) {
    check_radius(eta, p);
    const auto& g = eta.grid;
    auto ex = derivative(eta).v;
    auto exx = derivative(eta, 2).v;
    RealField h2(g), h1(g), h0(g), zero(g);
    for (int j = 0; j < g.size(); ++j) {
        double r = p.rho + eta.v[j];
        double q = 1.0 + ex[j] * ex[j];
        h2.v[j] = std::pow(q, -1.5);
        h1.v[j] = (3.0 * r * exx[j] - 1.0 - ex[j] * ex[j]) / (r * std::pow(q, 2.5)) * ex[j];
        h0.v[j] = -1.0 / (r * r * std::sqrt(q)) + 1.0 / (p.rho * p.rho);
    }
    PluriSymbol s(g, p, 2.0);
    s.add(field_term(h2, zero, 2.0));
    s.add(field_term(zero, h1, 1.0));
    s.add(field_term(h0, zero, 0.0));
    return s;
}

// ---- good unknown

GoodUnknown good_unknown(const JetState& s, const DnoOptions& o) {
    GoodUnknown gu;
    gu.eta = s.eta;
    gu.g = dno_corrected(s.eta, s.psi, s.params, o);
    boundary_velocities(s.eta, s.psi, gu.g, gu.b, gu.v);
    gu.w = s.psi - from_spectrum(paraproduct(gu.b, to_spectrum(s.eta)));
    return gu;
}

JetState good_unknown_inverse(const RealField& eta, const RealField& w, const DispersionParams& p, const DnoOptions& o,
                              const FixedPointOptions& fp, const RealField* psi_guess) {
    JetState s(eta, psi_guess ? *psi_guess : w, p);
    const double scale = l2_norm(w);
    double prev = INFINITY;
    int growth = 0;
    for (int it = 0; it < fp.max_iter; ++it) {
        auto gu = good_unknown(s, o);
        RealField r = w - gu.w;
        double res = l2_norm(r);
        if (!std::isfinite(res)) throw NumericError("good unknown inversion produced non-finite values");
        if (res <= fp.tol * std::max(scale, l2_norm(s.psi))) return s;
        growth = res > prev ? growth + 1 : 0;
        if (growth >= fp.growth_limit)
            throw ConvergenceError("good unknown inversion does not contract; state too large");
        prev = res;
        s.psi = s.psi + fp.damping * r;
    }
    throw ConvergenceError("good unknown inversion did not converge; state too large");
}

// ---- two-term symbols

TwoTermSymbol::TwoTermSymbol(const FourierGrid& g)
    : grid(g),
      principal(g.size(), cvec(g.size(), 0.0)),
      dprincipal(g.size(), cvec(g.size(), 0.0)),
      sub(g.size(), cvec(g.size(), 0.0)) {}

GriddedSymbol TwoTermSymbol::sample() const {
    return GriddedSymbol::from_values(grid, [this](int xi, cvec& out) {
        int k = grid.index(xi);
        for (std::size_t j = 0; j < out.size(); ++j) out[j] = principal[k][j] + sub[k][j];
    });
}

TwoTermSymbol sharp(const TwoTermSymbol& a, const TwoTermSymbol& b) {
    TwoTermSymbol c(a.grid);
    const int n = a.grid.size();
    for (int k = 0; k < n; ++k) {
        auto bx = dx(a.grid, b.principal[k]);
        for (int j = 0; j < n; ++j) {
            c.principal[k][j] = a.principal[k][j] * b.principal[k][j];
            c.dprincipal[k][j] = a.dprincipal[k][j] * b.principal[k][j] + a.principal[k][j] * b.dprincipal[k][j];
            c.sub[k][j] = a.sub[k][j] * b.principal[k][j] + a.principal[k][j] * b.sub[k][j] -
                          I * a.dprincipal[k][j] * bx[j];
        }
    }
    return c;
}

TwoTermSymbol star(const TwoTermSymbol& a) {
    TwoTermSymbol c(a.grid);
    const int n = a.grid.size();
    for (int k = 0; k < n; ++k) {
        cvec cd(n);
        for (int j = 0; j < n; ++j) cd[j] = std::conj(a.dprincipal[k][j]);
        auto cdx = dx(a.grid, cd);
        for (int j = 0; j < n; ++j) {
            c.principal[k][j] = std::conj(a.principal[k][j]);
            c.dprincipal[k][j] = cd[j];
            c.sub[k][j] = std::conj(a.sub[k][j]) - I * cdx[j];
        }
    }
    return c;
}

TwoTermSymbol operator-(const TwoTermSymbol& a, const TwoTermSymbol& b) {
    TwoTermSymbol c(a.grid);
    for (int k = 0; k < a.grid.size(); ++k)
        for (int j = 0; j < a.grid.size(); ++j) {
            c.principal[k][j] = a.principal[k][j] - b.principal[k][j];
            c.dprincipal[k][j] = a.dprincipal[k][j] - b.dprincipal[k][j];
            c.sub[k][j] = a.sub[k][j] - b.sub[k][j];
        }
    return c;
}

TwoTermNorm two_term_norm(const TwoTermSymbol& a, int n_cut) {
    TwoTermNorm r;
    for (int k = 0; k < a.grid.size(); ++k) {
        if (std::abs(a.grid.freq(k)) < n_cut) continue;
        for (int j = 0; j < a.grid.size(); ++j) {
            r.principal = std::max(r.principal, std::abs(a.principal[k][j]));
            r.sub = std::max(r.sub, std::abs(a.sub[k][j]));
        }
    }
    return r;
}

void check_cut(const FourierGrid& g, const DispersionParams& p, int n_cut) {
    (void)g;
    if (!(n_cut > 1.0 / p.rho)) throw ConfigError("n_cut must exceed 1/rho");
    // below 8 the cutoff at zero coefficient frequency is not 1 and T_p, T_q do not reduce to multipliers
    if (n_cut < 8) throw ConfigError("n_cut must be at least 8");
}

TwoTermSymbol lambda_two_term(const RealField& eta, const DispersionParams& p, const std::vector<cvec>& sub) {
    const auto& g = eta.grid;
    TwoTermSymbol l(g);
    for (int k = 0; k < g.size(); ++k) {
        int xi = g.freq(k);
        if (xi == 0) continue;
        double a = std::abs(xi);
        double l0 = special_value(Special::lambda1, 0, a, p);
        double l1 = sgn(xi) * special_value(Special::lambda1, 1, a, p);
        for (int j = 0; j < g.size(); ++j) {
            l.principal[k][j] = l0;
            l.dprincipal[k][j] = l1;
            l.sub[k][j] = sub[k][j];
        }
    }
    return l;
}

DiagSymbols diag_symbols(const RealField& eta, const DispersionParams& p, int n_cut) {
    check_cut(eta.grid, p, n_cut);
    check_radius(eta, p);
    const auto& g = eta.grid;
    const int n = g.size();
    auto ex = derivative(eta).v;
    auto exx = derivative(eta, 2).v;
    std::vector<double> A(n), R(n), C(n);
    for (int j = 0; j < n; ++j) {
        double q = 1.0 + ex[j] * ex[j];
        R[j] = p.rho + eta.v[j];
        A[j] = std::pow(q, -1.5);
        C[j] = (3.0 * R[j] * exx[j] - 1.0 - ex[j] * ex[j]) / (R[j] * std::pow(q, 2.5)) * ex[j];
    }
    const double irho2 = 1.0 / (p.rho * p.rho);

    DiagSymbols d;
    std::vector<cvec> lam0(n, cvec(n, 0.0));
    for (int k = 0; k < n; ++k) {
        int xi = g.freq(k);
        if (xi == 0) continue;
        for (int j = 0; j < n; ++j) lam0[k][j] = eta.v[j] / (2.0 * p.rho * R[j]) - ex[j] / (2.0 * R[j]) * I * sgn(xi);
    }
    d.lambda = lambda_two_term(eta, p, lam0);
    d.lambda_inv = TwoTermSymbol(g);
    d.gamma = TwoTermSymbol(g);
    d.q = TwoTermSymbol(g);
    d.h_shift = TwoTermSymbol(g);
    for (int k = 0; k < n; ++k) {
        int xi = g.freq(k);
        double a = std::abs(xi);
        double s = sgn(xi);
        double l0 = special_value(Special::lambda1, 0, a, p);
        double l1 = s * special_value(Special::lambda1, 1, a, p);
        for (int j = 0; j < n; ++j) {
            d.h_shift.principal[k][j] = A[j] * xi * xi - irho2;
            d.h_shift.dprincipal[k][j] = 2.0 * A[j] * xi;
            d.h_shift.sub[k][j] = C[j] * I * double(xi);
        }
        if (a < n_cut) continue;
        for (int j = 0; j < n; ++j) {
            double e = A[j] * xi * xi - irho2;
            if (!(e > 0.0)) throw NumericError("radicand of gamma is not positive; slope too large for n_cut");
            double gm = std::sqrt(e * l0);
            d.gamma.principal[k][j] = gm;
            d.gamma.dprincipal[k][j] = (2.0 * A[j] * xi * l0 + e * l1) / (2.0 * gm);
            d.q.principal[k][j] = std::sqrt(R[j] * l0);
            d.q.dprincipal[k][j] = std::sqrt(R[j]) * l1 / (2.0 * std::sqrt(l0));
            d.lambda_inv.principal[k][j] = 1.0 / l0;
            d.lambda_inv.dprincipal[k][j] = -l1 / (l0 * l0);
            d.lambda_inv.sub[k][j] = -lam0[k][j] / (l0 * l0);
        }
        auto gx = dx(g, d.gamma.dprincipal[k]);
        for (int j = 0; j < n; ++j) d.gamma.sub[k][j] = -0.5 * I * gx[j];
    }
    d.p = sharp(sharp(d.gamma, d.q), d.lambda_inv);
    return d;
}

// ---- complex unknown

namespace {

enum class Band { zero, growing, mid, high, nyquist };

Band band_of(int xi, const DispersionParams& p, int n_cut, const FourierGrid& g) {
    if (xi == g.nyquist()) return Band::nyquist;
    if (xi == 0) return Band::zero;
    int a = std::abs(xi);
    if (p.rho * a < 1.0) return Band::growing;
    if (a < n_cut) return Band::mid;
    return Band::high;
}

Spectrum combine(const Spectrum& re, const Spectrum& im) {
    Spectrum u(re.grid);
    for (int k = 0; k < u.size(); ++k) u.c[k] = re.c[k] + I * im.c[k];
    return u;
}

Spectrum high_band(const Spectrum& s, const DispersionParams& p, int n_cut) {
    Spectrum out = s;
    for (int k = 0; k < s.size(); ++k)
        if (band_of(s.grid.freq(k), p, n_cut, s.grid) != Band::high) out.c[k] = 0.0;
    return out;
}

}  // namespace

Spectrum complex_diag_flat(const Spectrum& eh, const Spectrum& wh, const DispersionParams& p, int n_cut) {
    Spectrum re(eh.grid), im(eh.grid);
    const double irho2 = 1.0 / (p.rho * p.rho);
    const double srho = std::sqrt(p.rho);
    for (int k = 0; k < eh.size(); ++k) {
        int xi = eh.grid.freq(k);
        double s = std::sqrt(g0_multiplier(xi, p));
        switch (band_of(xi, p, n_cut, eh.grid)) {
            case Band::zero: im.c[k] = eh.c[k]; break;
            case Band::growing: {
                double a = std::sqrt(irho2 - double(xi) * xi);
                re.c[k] = a * eh.c[k] + s * wh.c[k];
                im.c[k] = a * eh.c[k] - s * wh.c[k];
                break;
            }
            case Band::mid:
                re.c[k] = s * wh.c[k];
                im.c[k] = std::sqrt(double(xi) * xi - irho2) * eh.c[k];
                break;
            case Band::high:
                re.c[k] = srho * s * wh.c[k];
                im.c[k] = srho * std::sqrt(double(xi) * xi - irho2) * eh.c[k];
                break;
            case Band::nyquist: break;
        }
    }
    return combine(re, im);
}

void complex_diag_flat_inverse(const Spectrum& u, const DispersionParams& p, int n_cut, Spectrum& eh, Spectrum& wh) {
    auto re = real_part(u);
    auto im = imag_part(u);
    eh = Spectrum(u.grid);
    wh = Spectrum(u.grid);
    const double irho2 = 1.0 / (p.rho * p.rho);
    const double srho = std::sqrt(p.rho);
    for (int k = 0; k < u.size(); ++k) {
        int xi = u.grid.freq(k);
        double s = std::sqrt(g0_multiplier(xi, p));
        switch (band_of(xi, p, n_cut, u.grid)) {
            case Band::zero: eh.c[k] = im.c[k]; break;
            case Band::growing: {
                double a = std::sqrt(irho2 - double(xi) * xi);
                eh.c[k] = 0.5 * (re.c[k] + im.c[k]) / a;
                wh.c[k] = 0.5 * (re.c[k] - im.c[k]) / s;
                break;
            }
            case Band::mid:
                wh.c[k] = re.c[k] / s;
                eh.c[k] = im.c[k] / std::sqrt(double(xi) * xi - irho2);
                break;
            case Band::high:
                wh.c[k] = re.c[k] / (srho * s);
                eh.c[k] = im.c[k] / (srho * std::sqrt(double(xi) * xi - irho2));
                break;
            case Band::nyquist: break;
        }
    }
}

Spectrum complex_diag(const RealField& eta, const RealField& w, const DispersionParams& p, int n_cut) {
    check_cut(eta.grid, p, n_cut);
    auto eh = to_spectrum(eta);
    auto wh = to_spectrum(w);
    // low bands are multipliers; the high band goes through T_q, T_p
    Spectrum el = eh, wl = wh;
    for (int k = 0; k < eh.size(); ++k)
        if (band_of(eh.grid.freq(k), p, n_cut, eh.grid) == Band::high) el.c[k] = wl.c[k] = 0.0;
    Spectrum u = complex_diag_flat(el, wl, p, n_cut);
    auto eh_hi = high_band(eh, p, n_cut);
    auto wh_hi = high_band(wh, p, n_cut);
    if (max_abs(eh_hi) == 0.0 && max_abs(wh_hi) == 0.0) return u;
    auto d = diag_symbols(eta, p, n_cut);
    auto tq = real_part(paradiff_apply(d.q.sample(), wh_hi, Quantization::exact_mean));
    auto tp = real_part(paradiff_apply(d.p.sample(), eh_hi, Quantization::exact_mean));
    return u + combine(tq, tp);
}

void complex_diag_inverse(const Spectrum& u, const DispersionParams& p, int n_cut, RealField& eta, RealField& w,
                          const FixedPointOptions& fp) {
    check_cut(u.grid, p, n_cut);
    Spectrum eh, wh;
    complex_diag_flat_inverse(u, p, n_cut, eh, wh);
    eta = from_spectrum(eh);
    w = from_spectrum(wh);
    const double scale = l2_norm(u);
    double prev = INFINITY;
    int growth = 0;
    for (int it = 0; it < fp.max_iter; ++it) {
        Spectrum r = u - complex_diag(eta, w, p, n_cut);
        // Re u at xi = 0 and the Nyquist mode are outside the range of the map
        auto rr = real_part(r);
        rr.set(0, 0.0);
        r = combine(rr, imag_part(r));
        r.c[r.grid.index(r.grid.nyquist())] = 0.0;
        double res = l2_norm(r);
        if (!std::isfinite(res)) throw NumericError("complex unknown inversion produced non-finite values");
        if (res <= fp.tol * scale) return;
        growth = res > prev ? growth + 1 : 0;
        if (growth >= fp.growth_limit) throw ConvergenceError("complex unknown inversion does not contract");
        prev = res;
        Spectrum de, dw;
        complex_diag_flat_inverse(r, p, n_cut, de, dw);
        eta = eta + fp.damping * from_spectrum(de);
        w = w + fp.damping * from_spectrum(dw);
    }
    throw ConvergenceError("complex unknown inversion did not converge; state too large");
}

Spectrum to_diagonal(const JetState& s, const DiagonalCoordinates& c) {
    auto gu = good_unknown(s, c.dno);
    return complex_diag(gu.eta, gu.w, c.params, c.n_cut);
}

JetState from_diagonal(const Spectrum& u, const DiagonalCoordinates& c, const JetState* guess) {
    RealField eta, w;
    complex_diag_inverse(u, c.params, c.n_cut, eta, w, c.fixed_point);
    return good_unknown_inverse(eta, w, c.params, c.dno, c.fixed_point, guess ? &guess->psi : nullptr);
}

Spectrum diagonal_rate(const JetState& s, const DiagonalCoordinates& c) {
    auto r = rhs(s, c.dno);
    double ns = std::max(l2_norm(s.eta), l2_norm(s.psi));
    double nr = std::max(l2_norm(r.deta), l2_norm(r.dpsi));
    if (nr == 0.0) return Spectrum(s.grid());
    // central difference of the coordinate map along the flow
    double d = 1e-3 * ns / nr;
    JetState sp(s.eta + d * r.deta, s.psi + d * r.dpsi, s.params);
    JetState sm(s.eta - d * r.deta, s.psi - d * r.dpsi, s.params);
    return cplx(0.5 / d) * (to_diagonal(sp, c) - to_diagonal(sm, c));
}

// ---- extended system

double kappa(double x) { return lp_chi(0.25 * x); }

ExtendedCoefficients extended_coefficients(const Spectrum& u, const JetState& s, const ExtendedConfig& cfg) {
    ExtendedCoefficients c;
    c.kappa_s0 = kappa(sobolev_norm(u, cfg.s0) / cfg.eps0);
    c.kappa_4 = kappa(sobolev_norm(u, 4.0) / cfg.eps0);
    auto ex = derivative(s.eta).v;
    c.b = RealField(s.grid());
    for (int j = 0; j < s.eta.size(); ++j) c.b.v[j] = std::pow(1.0 + ex[j] * ex[j], -0.75) - 1.0;
    auto g = dno_corrected(s.eta, s.psi, s.params, cfg.coords.dno);
    RealField b;
    boundary_velocities(s.eta, s.psi, g, b, c.v);
    return c;
}

ExtendedCoefficients interpolate(const ExtendedCoefficients& a, const ExtendedCoefficients& b, double th) {
    ExtendedCoefficients c;
    c.kappa_s0 = (1.0 - th) * a.kappa_s0 + th * b.kappa_s0;
    c.kappa_4 = (1.0 - th) * a.kappa_4 + th * b.kappa_4;
    c.b = (1.0 - th) * a.b + th * b.b;
    c.v = (1.0 - th) * a.v + th * b.v;
    return c;
}

LiftedState lift(const Spectrum& u, const ExtendedConfig& cfg, const JetState* guess) {
    LiftedState ls;
    ls.u = u;
    const auto& g = u.grid;
    double k = kappa(sobolev_norm(u, cfg.s0) / cfg.eps0);
    if (k == 0.0) {
        ls.state = JetState(g, cfg.coords.params);
        ls.coef.kappa_s0 = 0.0;
        ls.coef.kappa_4 = kappa(sobolev_norm(u, 4.0) / cfg.eps0);
        ls.coef.b = RealField(g);
        ls.coef.v = RealField(g);
        return ls;
    }
    ls.state = from_diagonal(u, cfg.coords, guess);
    ls.coef = extended_coefficients(u, ls.state, cfg);
    ls.lifted = true;
    return ls;
}

PluriSymbol extended_symbol(const ExtendedCoefficients& c, const FourierGrid& g, const DispersionParams& p,
                            bool with_cutoff) {
    double ks = with_cutoff ? c.kappa_s0 : 1.0;
    double k4 = with_cutoff ? c.kappa_4 : 1.0;
    RealField bext = k4 * c.b;
    RealField zero(g);
    PluriSymbol s(g, p, 1.5);
    s.add(field_term(ks * (bext + RealField(g, std::vector<double>(g.size(), 1.0))), zero, 0.0,
                     {{Special::lambda_d, 0}}));
    s.add(field_term(zero, (-0.75 * ks) * derivative(bext), 0.5));
    // V xi = (-i V) i sgn(xi) |xi|
    SymbolTerm tv;
    tv.power = 1.0;
    tv.even.assign(g.size(), 0.0);
    tv.odd.resize(g.size());
    for (int j = 0; j < g.size(); ++j) tv.odd[j] = -I * ks * c.v.v[j];
    s.add(std::move(tv));
    return s;
}

PluriSymbol extended_symbol(const Spectrum& u, const ExtendedConfig& cfg) {
    auto ls = lift(u, cfg);
    return extended_symbol(ls.coef, u.grid, cfg.coords.params, true);
}

Spectrum hyperbolic_part(const Spectrum& u, const DispersionParams& p) {
    auto cu = conj_field(u);
    return apply_multiplier([&](int xi) { return cplx(lambda_g(xi, p)); }, cu);
}

Spectrum dispersive_part(const PluriSymbol& gamma, const Spectrum& u) {
    auto t = paradiff_apply(gamma.sample(), u, Quantization::exact_mean);
    const auto& p = gamma.params;
    return apply_multiplier([&](int xi) { return (std::abs(xi) >= 1 && p.rho * std::abs(xi) < 1.0) ? cplx(0.0) : I; }, t);
}

Spectrum extended_remainder(const LiftedState& ls, const ExtendedConfig& cfg) {
    const auto& g = ls.u.grid;
    if (!ls.lifted || ls.coef.kappa_s0 == 0.0) return Spectrum(g);
    const auto& p = cfg.coords.params;
    auto ut = diagonal_rate(ls.state, cfg.coords);
    auto gamma = extended_symbol(ls.coef, g, p, false);
    return cplx(ls.coef.kappa_s0) * (ut - hyperbolic_part(ls.u, p) - dispersive_part(gamma, ls.u));
}

Spectrum extended_remainder(const Spectrum& u, const ExtendedConfig& cfg) { return extended_remainder(lift(u, cfg), cfg); }

Spectrum extended_rate(const LiftedState& ls, const ExtendedConfig& cfg) {
    const auto& p = cfg.coords.params;
    auto gamma = extended_symbol(ls.coef, ls.u.grid, p, true);
    return hyperbolic_part(ls.u, p) + dispersive_part(gamma, ls.u) + extended_remainder(ls, cfg);
}

}  // namespace jetstab
