#pragma once

#include <functional>
#include <vector>

#include "jetstab/dynamics.hpp"
#include "jetstab/paradiff.hpp"

namespace jetstab {

struct BackgroundSample {
    double t = 0.0;
    Spectrum u;
    ExtendedCoefficients coef;
};

// Time-ordered samples of the background u; symbol coefficients are linear in t between samples.
struct BackgroundTrajectory {
    FourierGrid grid;
    ExtendedConfig cfg;
    std::vector<BackgroundSample> samples;

    BackgroundTrajectory() = default;
    BackgroundTrajectory(const FourierGrid& g, const ExtendedConfig& c) : grid(g), cfg(c) {}

    void push(BackgroundSample s);
    double t_min() const;
    double t_max() const;
    ExtendedCoefficients coefficients(double t) const;
    bool contains(double t) const;
};

// Background u = 0 on [t0, t1].
BackgroundTrajectory flat_background(const FourierGrid& g, const ExtendedConfig& cfg, double t0, double t1);
BackgroundSample background_sample(double t, const JetState& s, const ExtendedConfig& cfg);
BackgroundSample background_sample(double t, const Spectrum& u, const ExtendedConfig& cfg,
                                   const JetState* guess = nullptr);

using Forcing = std::function<Spectrum(double)>;
// Linear interpolation in t of sampled values; times increasing.
Forcing sampled_forcing(std::vector<double> times, std::vector<Spectrum> values);

struct PropagatorOptions {
    double dt_lin = 0.0125;
    bool log_norms = false;
};

struct PropagatorRun {
    double t0 = 0.0, t1 = 0.0;
    double dt_lin = 0.0;  // signed step actually used
    int steps = 0;
    std::vector<double> norm_log;  // L2 norm after each step
    Spectrum v;
};

// v(t1) for v_t = i Pi_d T_{gamma_Ext(t)} v + Pi_d f(t), v(t0) = Pi_d h. Either time order.
PropagatorRun propagate(const BackgroundTrajectory& bg, double t0, double t1, const Spectrum& h,
                        const PropagatorOptions& opt = {}, const Forcing& f = {});
// Same flow, values at every entry of a monotone list of times (times[0] is the start).
std::vector<Spectrum> propagate_path(const BackgroundTrajectory& bg, const std::vector<double>& times,
                                     const Spectrum& h, const PropagatorOptions& opt = {}, const Forcing& f = {});

// Dense T_{gamma_Ext} with exact-mean quantization.
Eigen::MatrixXcd extended_matrix(const ExtendedCoefficients& c, const FourierGrid& g, const DispersionParams& p);
// |(T - T^*) v| / |v| from the conjugate transpose of the matrix.
double selfadjoint_defect(const ExtendedCoefficients& c, const Spectrum& v, const DispersionParams& p);
double selfadjoint_defect(const Spectrum& u, const Spectrum& v, const ExtendedConfig& cfg);
// Same defect with the adjoint taken from the symbolic expansion to order r.
double selfadjoint_defect_symbolic(const ExtendedCoefficients& c, const Spectrum& v, const DispersionParams& p,
                                   double r = 2.0);

// Extended-system trajectory in u: u(t) and R_Ext(u(t)).
struct ExtendedSample {
    double t = 0.0;
    Spectrum u;
    Spectrum r;
};

// Maps a physical trajectory (inside the cutoff ball) to u and R_Ext; optionally fills the background.
std::vector<ExtendedSample> extended_samples(const Trajectory& tr, const ExtendedConfig& cfg,
                                             BackgroundTrajectory* bg = nullptr);

// sup_t |u(t) - Duhamel right side|_{H^s}; trapezoid integrals on the sample grid.
double duhamel_residual(const std::vector<ExtendedSample>& traj, const BackgroundTrajectory& bg,
                        const PropagatorOptions& opt = {}, double s_index = 5.5);

}  // namespace jetstab
