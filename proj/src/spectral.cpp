#include "jetstab/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>

#include "jetstab/errors.hpp"

namespace jetstab {

namespace {

struct PlanPair {
    fftw_plan fwd;
    fftw_plan inv;
};

std::mutex plan_mutex;
std::map<int, PlanPair>& plan_cache() {
    static std::map<int, PlanPair> cache;
    return cache;
}

const PlanPair& plans_for(int n) {
    std::lock_guard<std::mutex> lock(plan_mutex);
    auto& cache = plan_cache();
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    std::vector<cplx> tmp(n);
    auto* p = reinterpret_cast<fftw_complex*>(tmp.data());
    unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    PlanPair pp{fftw_plan_dft_1d(n, p, p, FFTW_FORWARD, flags),
                fftw_plan_dft_1d(n, p, p, FFTW_BACKWARD, flags)};
    return cache.emplace(n, pp).first->second;
}

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

void check_same(const FourierGrid& a, const FourierGrid& b) {
    if (!(a == b)) {
        std::ostringstream os;
        os << "grid size mismatch: " << a.n_modes << " vs " << b.n_modes;
        throw ConfigError(os.str());
    }
}

double smooth_step_core(double s) { return s > 0.0 ? std::exp(-1.0 / s) : 0.0; }

}  // namespace

FourierGrid::FourierGrid(int n, double dealias) : n_modes(n), dealias_fraction(dealias) {
    if (n < 4 || !is_power_of_two(n)) throw ConfigError("n_modes must be a power of two >= 4");
    if (!(dealias > 0.0 && dealias <= 1.0)) throw ConfigError("dealias_fraction must lie in (0,1]");
}

int FourierGrid::index(int xi) const {
    if (xi <= -n_modes / 2 || xi > n_modes / 2) return -1;
    return xi >= 0 ? xi : xi + n_modes;
}

double FourierGrid::x(int j) const { return 2.0 * std::numbers::pi * j / n_modes; }

int FourierGrid::dealias_cutoff() const {
    return static_cast<int>(std::floor(dealias_fraction * (n_modes / 2) + 1e-12));
}

RealField::RealField(const FourierGrid& g, std::vector<double> vals) : grid(g), v(std::move(vals)) {
    if (static_cast<int>(v.size()) != g.size()) throw ConfigError("field size does not match grid");
}

RealField RealField::from_function(const FourierGrid& g, const std::function<double(double)>& f) {
    RealField r(g);
    for (int j = 0; j < g.size(); ++j) r.v[j] = f(g.x(j));
    return r;
}

cplx Spectrum::at(int xi) const {
    int k = grid.index(xi);
    return k < 0 ? cplx(0.0) : c[k];
}

void Spectrum::set(int xi, cplx value) {
    int k = grid.index(xi);
    if (k < 0) throw ConfigError("frequency outside the retained range");
    c[k] = value;
}

void fft_forward(std::vector<cplx>& data) {
    const auto& p = plans_for(static_cast<int>(data.size()));
    auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(p.fwd, ptr, ptr);
}

void fft_inverse(std::vector<cplx>& data) {
    const auto& p = plans_for(static_cast<int>(data.size()));
    auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(p.inv, ptr, ptr);
}

Spectrum to_spectrum(const FourierGrid& g, const std::vector<cplx>& values) {
    if (static_cast<int>(values.size()) != g.size()) throw ConfigError("sample count does not match grid");
    Spectrum s(g);
    s.c = values;
    fft_forward(s.c);
    const double inv = 1.0 / g.size();
    for (auto& z : s.c) z *= inv;
    return s;
}

Spectrum to_spectrum(const RealField& f) {
    std::vector<cplx> vals(f.v.begin(), f.v.end());
    return to_spectrum(f.grid, vals);
}

std::vector<cplx> synthesize(const Spectrum& s) {
    std::vector<cplx> vals = s.c;
    fft_inverse(vals);
    return vals;
}

RealField from_spectrum(const Spectrum& s) {
    auto vals = synthesize(s);
    RealField r(s.grid);
    for (int j = 0; j < s.size(); ++j) r.v[j] = vals[j].real();
    return r;
}

Spectrum apply_multiplier(const std::function<cplx(int)>& m, const Spectrum& s) {
    Spectrum out(s.grid);
    for (int k = 0; k < s.size(); ++k) {
        int xi = s.grid.freq(k);
        cplx mk = m(xi);
        if (!std::isfinite(mk.real()) || !std::isfinite(mk.imag())) {
            std::ostringstream os;
            os << "multiplier not finite at xi = " << xi;
            throw NumericError(os.str());
        }
        out.c[k] = mk * s.c[k];
    }
    return out;
}

Spectrum derivative(const Spectrum& s, int order) {
    Spectrum out(s.grid);
    const int nyq = s.grid.nyquist();
    for (int k = 0; k < s.size(); ++k) {
        int xi = s.grid.freq(k);
        if (xi == nyq) continue;
        out.c[k] = std::pow(cplx(0.0, xi), order) * s.c[k];
    }
    return out;
}

RealField derivative(const RealField& f, int order) { return from_spectrum(derivative(to_spectrum(f), order)); }

Spectrum dealias(const Spectrum& s) {
    Spectrum out = s;
    const int cut = s.grid.dealias_cutoff();
    for (int k = 0; k < s.size(); ++k) {
        int xi = s.grid.freq(k);
        if (std::abs(xi) > cut || xi == s.grid.nyquist()) out.c[k] = 0.0;
    }
    return out;
}

RealField dealias(const RealField& f) { return from_spectrum(dealias(to_spectrum(f))); }

Spectrum conj_field(const Spectrum& s) {
    Spectrum out(s.grid);
    const int n = s.size();
    for (int k = 0; k < n; ++k) out.c[k] = std::conj(s.c[(n - k) % n]);
    return out;
}

Spectrum real_part(const Spectrum& s) {
    Spectrum cj = conj_field(s);
    Spectrum out(s.grid);
    for (int k = 0; k < s.size(); ++k) out.c[k] = 0.5 * (s.c[k] + cj.c[k]);
    return out;
}

Spectrum imag_part(const Spectrum& s) {
    Spectrum cj = conj_field(s);
    Spectrum out(s.grid);
    for (int k = 0; k < s.size(); ++k) out.c[k] = (s.c[k] - cj.c[k]) / cplx(0.0, 2.0);
    return out;
}

Spectrum product(const Spectrum& a, const Spectrum& b) {
    check_same(a.grid, b.grid);
    const int n = a.size();
    const int m = 2 * n;
    std::vector<cplx> pa(m, 0.0), pb(m, 0.0);
    for (int k = 0; k < n; ++k) {
        int xi = a.grid.freq(k);
        int idx = xi >= 0 ? xi : xi + m;
        pa[idx] = a.c[k];
        pb[idx] = b.c[k];
    }
    fft_inverse(pa);
    fft_inverse(pb);
    for (int j = 0; j < m; ++j) pa[j] *= pb[j];
    fft_forward(pa);
    Spectrum out(a.grid);
    const double inv = 1.0 / m;
    for (int k = 0; k < n; ++k) {
        int xi = a.grid.freq(k);
        int idx = xi >= 0 ? xi : xi + m;
        out.c[k] = pa[idx] * inv;
    }
    return out;
}

double sobolev_norm(const Spectrum& u, double s) {
    double acc = 0.0;
    for (int k = 0; k < u.size(); ++k) {
        double xi = u.grid.freq(k);
        acc += std::pow(1.0 + xi * xi, s) * std::norm(u.c[k]);
    }
    return std::sqrt(acc);
}

double l2_norm(const Spectrum& u) { return sobolev_norm(u, 0.0); }

double l2_norm(const RealField& f) {
    double acc = 0.0;
    for (double x : f.v) acc += x * x;
    return std::sqrt(acc / f.size());
}

double max_abs(const Spectrum& u) {
    double m = 0.0;
    for (const auto& z : u.c) m = std::max(m, std::abs(z));
    return m;
}

Spectrum operator+(const Spectrum& a, const Spectrum& b) {
    check_same(a.grid, b.grid);
    Spectrum out(a.grid);
    for (int k = 0; k < a.size(); ++k) out.c[k] = a.c[k] + b.c[k];
    return out;
}

Spectrum operator-(const Spectrum& a, const Spectrum& b) {
    check_same(a.grid, b.grid);
    Spectrum out(a.grid);
    for (int k = 0; k < a.size(); ++k) out.c[k] = a.c[k] - b.c[k];
    return out;
}

Spectrum operator*(cplx a, const Spectrum& b) {
    Spectrum out(b.grid);
    for (int k = 0; k < b.size(); ++k) out.c[k] = a * b.c[k];
    return out;
}

RealField operator+(const RealField& a, const RealField& b) {
    check_same(a.grid, b.grid);
    RealField out(a.grid);
    for (int j = 0; j < a.size(); ++j) out.v[j] = a.v[j] + b.v[j];
    return out;
}

RealField operator-(const RealField& a, const RealField& b) {
    check_same(a.grid, b.grid);
    RealField out(a.grid);
    for (int j = 0; j < a.size(); ++j) out.v[j] = a.v[j] - b.v[j];
    return out;
}

RealField operator*(double a, const RealField& b) {
    RealField out(b.grid);
    for (int j = 0; j < b.size(); ++j) out.v[j] = a * b.v[j];
    return out;
}

RealField operator*(const RealField& a, const RealField& b) {
    check_same(a.grid, b.grid);
    RealField out(a.grid);
    for (int j = 0; j < a.size(); ++j) out.v[j] = a.v[j] * b.v[j];
    return out;
}

double lp_chi(double t) {
    double a = std::abs(t);
    if (a <= 0.5) return 1.0;
    if (a >= 1.0) return 0.0;
    double s = 2.0 * (1.0 - a);
    double f0 = smooth_step_core(s);
    double f1 = smooth_step_core(1.0 - s);
    return f0 / (f0 + f1);
}

double lp_phi(double t) { return lp_chi(0.5 * t) - lp_chi(t); }

double lp_block_multiplier(int j, double xi) {
    if (j < 0) return 0.0;
    if (j == 0) return lp_chi(0.5 * xi);
    return lp_phi(std::ldexp(xi, -j));
}

double lp_partial_multiplier(int j, double xi) {
    if (j < 0) return 0.0;
    return lp_chi(std::ldexp(xi, -(j + 1)));
}

int lp_j_max(const FourierGrid& g) {
    int j = 0;
    while ((1 << (j + 1)) < g.n_modes) ++j;
    return j;
}

Spectrum lp_block(const Spectrum& u, int j) {
    return apply_multiplier([j](int xi) { return cplx(lp_block_multiplier(j, xi)); }, u);
}

Spectrum partial_sum(const Spectrum& u, int j) {
    return apply_multiplier([j](int xi) { return cplx(lp_partial_multiplier(j, xi)); }, u);
}

LPDecomposition lp_decompose(const Spectrum& u) {
    LPDecomposition d;
    d.j_max = lp_j_max(u.grid);
    for (int j = 0; j <= d.j_max; ++j) d.blocks.push_back(lp_block(u, j));
    return d;
}

}  // namespace jetstab
