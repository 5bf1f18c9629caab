#include "jetstab/linear.hpp"

#include <cmath>
#include <sstream>

#include "jetstab/bessel.hpp"
#include "jetstab/errors.hpp"

namespace jetstab {

DispersionParams::DispersionParams(double r) : rho(r) {
    if (!(r > 0.0 && r < 1.0)) throw ConfigError("rho must lie in (0,1)");
    double inv = 1.0 / r;
    if (std::abs(inv - std::round(inv)) < 1e-9) {
        std::ostringstream os;
        os << "1/rho = " << inv << " is an integer; excluded";
        throw ConfigError(os.str());
    }
}

double g0_multiplier(double xi, const DispersionParams& p) {
    double a = std::abs(xi);
    return bessel_ratio(p.rho * a) * a;
}

double g0_multiplier_derivative(double xi, const DispersionParams& p) {
    if (xi == 0.0) return 0.0;
    double k = p.rho * std::abs(xi);
    double r = bessel_ratio(k);
    return (xi > 0 ? 1.0 : -1.0) * k * (1.0 - r * r);
}

double hprime0(double xi, const DispersionParams& p) { return xi * xi - 1.0 / (p.rho * p.rho); }

double lambda_g(double xi, const DispersionParams& p) {
    double k = p.rho * std::abs(xi);
    if (std::abs(xi) < 1.0 || k >= 1.0) return 0.0;
    return std::sqrt(bessel_ratio(k) * k * (1.0 - k * k) / (p.rho * p.rho * p.rho));
}

double lambda_d(double xi, const DispersionParams& p) {
    double k = p.rho * std::abs(xi);
    if (k <= 1.0) return 0.0;
    return std::sqrt(bessel_ratio(k) * k * (k * k - 1.0) / (p.rho * p.rho * p.rho));
}

double lambda_d_derivative(double xi, const DispersionParams& p) {
    double k = p.rho * std::abs(xi);
    if (k <= 1.0) return 0.0;
    double r = bessel_ratio(k);
    double f = r * k * (k * k - 1.0);
    double df = k * (1.0 - r * r) * (k * k - 1.0) + 2.0 * k * k * r;
    double rho3 = p.rho * p.rho * p.rho;
    double val = p.rho * df / (2.0 * rho3 * std::sqrt(f / rho3));
    return xi > 0 ? val : -val;
}

double rayleigh_growth(double k) { return bessel_ratio(k) * k * (1.0 - k * k); }

double most_unstable_wavenumber(double tol) {
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = 0.0, b = 1.0;
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = rayleigh_growth(c), fd = rayleigh_growth(d);
    while (b - a > tol) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = rayleigh_growth(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = rayleigh_growth(d);
        }
    }
    return 0.5 * (a + b);
}

double growth_rate_min(const DispersionParams& p) {
    double m = 0.0;
    bool first = true;
    for (int xi = 1; p.rho * xi < 1.0; ++xi) {
        double v = lambda_g(xi, p);
        if (first || v < m) m = v;
        first = false;
    }
    return m;
}

double growth_rate_max(const DispersionParams& p) {
    double m = 0.0;
    for (int xi = 1; p.rho * xi < 1.0; ++xi) m = std::max(m, lambda_g(xi, p));
    return m;
}

bool SpectralSplit::is_growing(int xi) const {
    int a = std::abs(xi);
    return a >= 1 && params.rho * a < 1.0;
}

std::vector<int> SpectralSplit::growing() const {
    std::vector<int> out;
    for (int k = 0; k < grid.size(); ++k)
        if (is_growing(grid.freq(k))) out.push_back(grid.freq(k));
    return out;
}

std::vector<int> SpectralSplit::dispersive() const {
    std::vector<int> out;
    for (int k = 0; k < grid.size(); ++k)
        if (!is_growing(grid.freq(k))) out.push_back(grid.freq(k));
    return out;
}

namespace {

bool growing(int xi, const DispersionParams& p) {
    int a = std::abs(xi);
    return a >= 1 && p.rho * a < 1.0;
}

}  // namespace

Spectrum proj_g(const Spectrum& z, const DispersionParams& p) {
    return apply_multiplier([&](int xi) { return cplx(growing(xi, p) ? 1.0 : 0.0); }, z);
}

Spectrum proj_d(const Spectrum& z, const DispersionParams& p) {
    return apply_multiplier([&](int xi) { return cplx(growing(xi, p) ? 0.0 : 1.0); }, z);
}

Spectrum proj_u(const Spectrum& z, const DispersionParams& p) { return real_part(proj_g(z, p)); }

Spectrum proj_s(const Spectrum& z, const DispersionParams& p) { return cplx(0.0, 1.0) * imag_part(proj_g(z, p)); }

Spectrum to_complex(const JetState& state) {
    const auto& p = state.params;
    Spectrum eh = to_spectrum(state.eta);
    Spectrum ph = to_spectrum(state.psi);
    Spectrum z(state.grid());
    const cplx I(0.0, 1.0);
    for (int k = 0; k < z.size(); ++k) {
        int xi = z.grid.freq(k);
        if (xi == 0) {
            z.c[k] = I * eh.c[k];
            continue;
        }
        double hp = hprime0(xi, p);
        if (std::abs(p.rho * xi) == 1.0 || hp == 0.0) throw ConfigError("frequency with rho*xi = 1 encountered");
        double sg = std::sqrt(g0_multiplier(xi, p));
        if (growing(xi, p)) {
            double a = std::sqrt(-hp);
            z.c[k] = cplx(1.0, 1.0) * a * eh.c[k] + cplx(1.0, -1.0) * sg * ph.c[k];
        } else {
            z.c[k] = I * std::sqrt(hp) * eh.c[k] + sg * ph.c[k];
        }
    }
    return z;
}

JetState from_complex(const Spectrum& z, const DispersionParams& p) {
    Spectrum re = real_part(z);
    Spectrum im = imag_part(z);
    Spectrum eh(z.grid), ph(z.grid);
    for (int k = 0; k < z.size(); ++k) {
        int xi = z.grid.freq(k);
        if (xi == 0) {
            eh.c[k] = im.c[k];
            continue;
        }
        double hp = hprime0(xi, p);
        double sg = std::sqrt(g0_multiplier(xi, p));
        if (growing(xi, p)) {
            double a = std::sqrt(-hp);
            eh.c[k] = 0.5 * (re.c[k] + im.c[k]) / a;
            ph.c[k] = 0.5 * (re.c[k] - im.c[k]) / sg;
        } else {
            eh.c[k] = im.c[k] / std::sqrt(hp);
            ph.c[k] = re.c[k] / sg;
        }
    }
    return JetState(from_spectrum(eh), from_spectrum(ph), p);
}

Spectrum linear_flow(const Spectrum& z0, double t, const DispersionParams& p) {
    Spectrum u = proj_u(z0, p);
    Spectrum s = proj_s(z0, p);
    Spectrum out(z0.grid);
    for (int k = 0; k < z0.size(); ++k) {
        int xi = z0.grid.freq(k);
        if (growing(xi, p)) {
            double lg = lambda_g(xi, p);
            out.c[k] = std::exp(t * lg) * u.c[k] + std::exp(-t * lg) * s.c[k];
        } else {
            out.c[k] = std::exp(cplx(0.0, t * lambda_d(xi, p))) * z0.c[k];
        }
    }
    return out;
}

}  // namespace jetstab
