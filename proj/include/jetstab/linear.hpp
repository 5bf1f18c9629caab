#pragma once

#include <vector>

#include "jetstab/spectral.hpp"

namespace jetstab {

struct DispersionParams {
    double rho = 0.51;

    DispersionParams() = default;
    explicit DispersionParams(double r);
};

// Interface deformation eta and velocity-potential trace psi.
struct JetState {
    RealField eta;
    RealField psi;
    DispersionParams params;

    JetState() = default;
    JetState(const FourierGrid& g, const DispersionParams& p) : eta(g), psi(g), params(p) {}
    JetState(RealField e, RealField s, const DispersionParams& p)
        : eta(std::move(e)), psi(std::move(s)), params(p) {}
    const FourierGrid& grid() const { return eta.grid; }
};

// G[0] multiplier ratio(rho|xi|)|xi| and its xi-derivative.
double g0_multiplier(double xi, const DispersionParams& p);
double g0_multiplier_derivative(double xi, const DispersionParams& p);
// Linearized curvature multiplier H'[0] = xi^2 - 1/rho^2.
double hprime0(double xi, const DispersionParams& p);

double lambda_g(double xi, const DispersionParams& p);
double lambda_d(double xi, const DispersionParams& p);
double lambda_d_derivative(double xi, const DispersionParams& p);

// ratio(k) k (1 - k^2) and its argmax over (0,1).
double rayleigh_growth(double k);
double most_unstable_wavenumber(double tol = 1e-9);

// Minimal / maximal growth rate over the growing band.
double growth_rate_min(const DispersionParams& p);
double growth_rate_max(const DispersionParams& p);

struct SpectralSplit {
    FourierGrid grid;
    DispersionParams params;

    SpectralSplit(const FourierGrid& g, const DispersionParams& p) : grid(g), params(p) {}
    bool is_growing(int xi) const;
    bool is_dispersive(int xi) const { return !is_growing(xi); }
    std::vector<int> growing() const;
    std::vector<int> dispersive() const;
};

Spectrum proj_g(const Spectrum& z, const DispersionParams& p);
Spectrum proj_d(const Spectrum& z, const DispersionParams& p);
Spectrum proj_u(const Spectrum& z, const DispersionParams& p);  // Re Pi_g z
Spectrum proj_s(const Spectrum& z, const DispersionParams& p);  // i Im Pi_g z

Spectrum to_complex(const JetState& state);
JetState from_complex(const Spectrum& z, const DispersionParams& p);

// exp(t Lambda_g) Re Pi_g z + i exp(-t Lambda_g) Im Pi_g z + exp(i t Lambda_d) Pi_d z
Spectrum linear_flow(const Spectrum& z0, double t, const DispersionParams& p);

}  // namespace jetstab
