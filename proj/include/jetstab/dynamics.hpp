#pragma once

#include <string>
#include <vector>

#include "jetstab/dno.hpp"
#include "jetstab/linear.hpp"

namespace jetstab {

struct IntegratorConfig {
    double dt = 0.05;  // negative for backward runs
    double t_end = 10.0;
    int snapshot_stride = 1;
    double hs_index = 2.0;
    double min_radius = -1.0;  // < 0: rho/4
    DnoOptions dno;
};

struct Diagnostics {
    double delta_eta = 0.0;
    double hs_norm = 0.0;
    double flux = 0.0;
};

struct TrajectorySample {
    double t = 0.0;
    JetState state;
    Diagnostics diag;
};

enum class RunStatus { ok, pinch_off, diverged };
std::string to_string(RunStatus s);

struct Trajectory {
    std::vector<TrajectorySample> samples;
    RunStatus status = RunStatus::ok;
    std::string message;
};

RealField mean_curvature(const RealField& eta, const DispersionParams& p);

struct StateRate {
    RealField deta;
    RealField dpsi;
};

// Full right-hand side; the DNO linear part uses the exact multiplier.
StateRate rhs(const JetState& s, const DnoOptions& o);
// rhs minus the linearization at the flat cylinder.
StateRate nonlinear_part(const JetState& s, const DnoOptions& o);

// exp(t L) for the linearized system, per mode, acting on (eta_hat, psi_hat).
void linear_exponential(const Spectrum& eta, const Spectrum& psi, double t, const DispersionParams& p, Spectrum& eta_out,
                        Spectrum& psi_out);

JetState step(const JetState& s, double dt, const DnoOptions& o);
Trajectory simulate(const JetState& s0, const IntegratorConfig& cfg);
Diagnostics diagnose(const JetState& s, const IntegratorConfig& cfg);
double delta_eta(const RealField& eta);

// Unstable-eigenvector seed with eta amplitude `amplitude` at mode xi; dispersive
// modes get eta = amplitude cos(xi x), psi = 0.
JetState growth_seed(const FourierGrid& g, const DispersionParams& p, int xi, double amplitude);

struct GrowthScanConfig {
    int n_modes = 128;
    double amplitude = 1e-6;
    double window_low_factor = 10.0;
    double window_high = 1e-2;
    double dt = 0.05;
    double t_end_dispersive = 20.0;
    DnoOptions dno = {96};
};

struct GrowthRow {
    int xi = 0;
    double k = 0.0;
    double omega_measured = 0.0;
    double omega_rayleigh = 0.0;
    int fit_points = 0;
    bool flagged = false;  // unstable mode with empty fit window
    RunStatus status = RunStatus::ok;
};

GrowthRow growth_fit(const DispersionParams& p, int xi, const GrowthScanConfig& cfg, double direction = 1.0);
std::vector<GrowthRow> growth_scan(const DispersionParams& p, const std::vector<int>& modes, const GrowthScanConfig& cfg,
                                   int threads = 1);

}  // namespace jetstab
