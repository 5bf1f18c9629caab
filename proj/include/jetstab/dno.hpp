#pragma once

#include <vector>

#include "jetstab/linear.hpp"
#include "jetstab/spectral.hpp"

namespace jetstab {

enum class DnoSolver { direct, iterative };

struct DnoOptions {
    int n_y = 64;
    DnoSolver solver = DnoSolver::iterative;
    double tol = 1e-12;      // GMRES residual relative to the flat initial guess
    int max_iter = 400;
    int restart = 40;
    bool parallel = true;    // OpenMP over radial levels
};

// Laplace problem in the flattened cylinder r = y (rho + eta(x)), y in (0,1].
struct FlattenedEllipticProblem {
    RealField eta;
    RealField psi;
    DispersionParams params;
    DnoOptions options;
    double min_radius = -1.0;  // < 0: rho/4

    FlattenedEllipticProblem(RealField e, RealField s, const DispersionParams& p, const DnoOptions& o = {})
        : eta(std::move(e)), psi(std::move(s)), params(p), options(o) {}
};

struct DNOResult {
    RealField g;
    std::vector<RealField> phi;  // levels y_1 .. y_{n_y} (last is the Dirichlet data)
    RealField b;
    RealField v;
    double residual = 0.0;       // discrete PDE residual, relative to the forcing
    int iterations = 0;
};

// Cell-centred radial nodes y_j = (j - 1/2) h, h = 1/(n_y - 1/2); y_{n_y} = 1.
double radial_step(int n_y);

RealField dno_flat(const RealField& psi, const DispersionParams& p);
Spectrum dno_flat(const Spectrum& psi, const DispersionParams& p);
// Symbol of the radial discretization at eta = 0.
double dno_flat_discrete_multiplier(int xi, const DispersionParams& p, int n_y);
Spectrum dno_flat_discrete(const Spectrum& psi, const DispersionParams& p, int n_y);

DNOResult solve_dno(const FlattenedEllipticProblem& problem);
// G[eta]psi with the linear part replaced by the exact multiplier:
// G0 psi + (G_h[eta] psi - G_h[0] psi).
RealField dno_corrected(const RealField& eta, const RealField& psi, const DispersionParams& p, const DnoOptions& o);

// B, V from G[eta]psi.
void boundary_velocities(const RealField& eta, const RealField& psi, const RealField& g, RealField& b, RealField& v);

RealField quadratic_part(const RealField& eta, const RealField& psi, const DispersionParams& p);
RealField shape_derivative(const RealField& eta, const RealField& psi, const RealField& delta_eta,
                           const DispersionParams& p, const DnoOptions& o);
double boundary_flux(const DNOResult& result, const RealField& eta, const DispersionParams& p);

// Discrete operator in matrix-free form; exposed for benchmarks.
struct RadialOperator {
    RadialOperator(const RealField& eta, const DispersionParams& p, int n_y);
    int levels() const { return n_y - 1; }
    // out = A x on interior levels, with Dirichlet data psi at y = 1 (psi may be null for 0).
    void apply(const std::vector<double>& x, const std::vector<double>* psi, std::vector<double>& out,
               bool parallel) const;
    void precondition(const std::vector<double>& x, std::vector<double>& out, bool parallel) const;

    FourierGrid grid;
    int n_y;
    double h;
    std::vector<double> inv_r2, eta_x;  // per x
    std::vector<double> a2, g2, beta;   // per (level, x), scaled by y
    double inv_r2_mean;
};

}  // namespace jetstab
