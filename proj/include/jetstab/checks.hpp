#pragma once

#include <vector>

#include "jetstab/manifold.hpp"

namespace jetstab {

// least-squares slope of log y against log x
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

struct DnoFlatCheck {
    std::vector<int> n_y;
    std::vector<double> errors;     // L2 error against the Bessel multiplier per radial grid
    double order_coarse = 0.0;      // from the first two grids
    double order_fine = 0.0;        // from the second and third
    double richardson_error = 0.0;  // relative L2, last two grids
    double max_residual = 0.0;
};
// Random Dirichlet data on |xi| <= k_max at eta = 0.
DnoFlatCheck dno_flat_check(const DispersionParams& p, int n_modes = 128, int k_max = 32,
                            std::vector<int> n_y = {256, 512, 1024, 2048});

struct ExpansionCheck {
    std::vector<double> eps, cubic_residuals;
    double cubic_slope = 0.0;        // |G[e eta](e psi) - e G0 psi - e^2 G2| against e
    std::vector<double> steps, shape_residuals;
    double shape_slope = 0.0;        // central difference against the shape derivative
};
ExpansionCheck expansion_check(const DispersionParams& p);

struct ParadiffCheck {
    double product_identity_error = 0.0;  // |a u - T_a u - T_u a - R(a,u)| / |a u|
    double constant_symbol_error = 0.0;   // |T_c u - c(u - S_2 u)| / |u|
    int lattice = 0;
    long cutoff_zero_violations = 0;      // chi != 0 where 2|zeta| >= |xi|
    long cutoff_one_violations = 0;       // chi != 1 where 8|zeta| <= |xi|
    long cutoff_one_violations_16 = 0;    // chi != 1 where 16|zeta| <= |xi|
    double composition_slope = 0.0;       // r = 2, a = cos x |xi|^{3/2}, b = sin x |xi|^{1/2}
    double composition_predicted = 0.0;
    double composition_slope_r1 = 0.0;
    double composition_predicted_r1 = 0.0;
};
ParadiffCheck paradiff_check(int lattice = 512);

struct ParalinearizationCheck {
    double dno_slope = 0.0;   // G - T_lambda w + T_V d_x eta + T_{b/(rho+eta)} eta
    double h_slope = 0.0;     // H(eta) - T_h eta + rho^-2 eta - 1/rho
    double rext_slope = 0.0;  // R_Ext in L2 against |u|
};
ParalinearizationCheck paralinearization_check(const DispersionParams& p);

struct PropagatorCheck {
    double unitarity_error = 0.0;
    double transition_error = 0.0;
    double drift_slope = 0.0;
    double defect_slope = 0.0;
    std::vector<double> duhamel_dt, duhamel_residuals;
    double duhamel_order = 0.0;
};
PropagatorCheck propagator_check(const DispersionParams& p);

struct ManifoldCheck {
    std::vector<double> norms;
    std::vector<int> iterations;
    std::vector<double> residuals, decay_rates, tangency;
    double mu = 0.0, lambda = 0.0;
    double tangency_slope = 0.0;
    double replay_deviation = 0.0;
    bool monotone = true;
};
// Stable solutions on mode 1 at |f| = norms (H^{s0}), replay of the largest over T/4.
ManifoldCheck manifold_check(const ManifoldConfig& cfg, int n_modes = 32,
                             const std::vector<double>& norms = {1e-3, 5e-4, 2.5e-4});

struct CenterCheck {
    std::vector<double> norms, g_norms, cone_ratios;
    bool all_converged = true;
    double slope = 0.0;
    double lifespan_c = 0.01;
    double certified = 0.0, certified_half = 0.0;
    bool lifespan_exited = false;
    bool on_cone_escaped = true;
    bool off_cone_escaped = false;
    double off_cone_exit_time = 0.0;
};
// Datum on modes 2 and 3 (difference frequency in the growing band).
Spectrum center_probe_datum(const FourierGrid& g, double norm, double s0);
CenterCheck center_check(const CenterConfig& cfg, int n_modes = 32, const std::vector<double>& norms = {1e-3, 5e-4, 2.5e-4});

}  // namespace jetstab
