#pragma once

#include <string>
#include <vector>

#include "jetstab/propagator.hpp"

namespace jetstab {

struct ManifoldConfig {
    ExtendedConfig ext;
    double horizon = 0.0;    // 0: smallest multiple of quad_dt with exp(-mu T) <= tail_tol
    double tail_tol = 1e-8;
    double quad_dt = 0.1;
    double weight_a = -1.0;  // < 0: mu / 2
    double damping = 0.5;
    double tol = 1e-8;       // sup_t |L(u) - u|_{H^s0}
    int max_iter = 60;
    int growth_limit = 5;    // consecutive residual increases before giving up
    double dt_lin = 0.0;     // 0: quad_dt / 4
};

// Checks the configuration against the linear rates; fills defaults.
ManifoldConfig resolve(const ManifoldConfig& cfg);

// sigma = +1: stable solution on [0, T] with f in E_s; sigma = -1: unstable solution on [-T, 0] with f in E_u.
struct HyperbolicSolution {
    int sigma = 1;
    Spectrum f;
    std::vector<double> times;  // sigma * k * quad_dt
    std::vector<Spectrum> u;
    std::vector<Spectrum> r;    // R_Ext at the samples of the last evaluated iterate
    Spectrum manifold_point;    // u(0)
    double residual = 0.0;
    std::vector<double> history;
    int iterations = 0;
    double fitted_decay = 0.0;  // rate of |u| in |t|
    double tail_bound = 0.0;    // dropped integral beyond the horizon
    double horizon = 0.0;
};

// Per-sample lifts reused as initial guesses between iterations.
struct LiftCache {
    std::vector<JetState> states;
    std::vector<bool> valid;
};

// One application of the Lyapunov-Perron map on the sample grid.
std::vector<Spectrum> lp_map(int sigma, const std::vector<double>& times, const std::vector<Spectrum>& u,
                             const Spectrum& f, const ManifoldConfig& cfg, LiftCache* cache = nullptr,
                             std::vector<Spectrum>* r_out = nullptr);

std::vector<double> sample_times(int sigma, const ManifoldConfig& resolved);

HyperbolicSolution solve_hyperbolic(int sigma, const Spectrum& f, const ManifoldConfig& cfg);
HyperbolicSolution solve_stable(const Spectrum& f, const ManifoldConfig& cfg);
HyperbolicSolution solve_unstable(const Spectrum& f, const ManifoldConfig& cfg);

// Time-reversal symmetry (eta, psi) -> (eta, -psi) in the diagonal unknown:
// i conj(u) on the growing band, -conj(u) elsewhere. An involution.
Spectrum time_reflect(const Spectrum& u, const DispersionParams& p);

// |u(0) - f|_{H^s0}
double tangency_defect(const HyperbolicSolution& s, const ManifoldConfig& cfg);

struct DecayReport {
    double poly_weighted_sup = 0.0;  // sup <t>^3 |u|
    double exp_weighted_sup = 0.0;   // sup e^{a|t|} |u|
    double replay_window = 0.0;
    double replay_deviation = 0.0;   // sup over the window of |u_pde - u|_{H^s0}
};

// Replays the physical flow from u(0) over |t| <= window; the unstable directions amplify errors like e^{Lambda t}.
DecayReport verify_decay_equivalence(const HyperbolicSolution& s, const ManifoldConfig& cfg, double window,
                                     double sim_dt);

// ---- center set

struct CenterConfig {
    ExtendedConfig ext;
    double horizon = 10.0;
    double sim_dt = 0.05;
    int sample_stride = 2;
    double damping = 0.5;
    double tol = 1e-6;            // |g_new - g| <= tol |g_new| in H^s0
    int max_iter = 40;
    int growth_limit = 5;
    double escape_radius = 0.0;   // 0: 2 eps0
    double cone_bound = 1e4;      // |g| <= cone_bound |f|^2
};

struct CenterSeed {
    Spectrum f, g;
    double cone_ratio = 0.0;
    double residual = 0.0;
    std::vector<double> history;
    int iterations = 0;
    bool converged = false;
    bool escaped = false;
    bool in_cone = false;
    std::string message;
};

// Samples of a physical run from u0 mapped to u; stops at escape.
struct CenterRun {
    std::vector<double> times;
    std::vector<Spectrum> u;
    std::vector<Spectrum> r;
    bool escaped = false;
    double exit_time = 0.0;
    std::string message;
};

CenterRun run_extended(const Spectrum& u0, double t_end, const CenterConfig& cfg, bool want_remainder = true,
                       const JetState* guess = nullptr);
// Right side of the initial-value equation for the hyperbolic components.
Spectrum center_map(const Spectrum& g, const Spectrum& f, const CenterConfig& cfg, bool* escaped = nullptr);
CenterSeed solve_center(const Spectrum& f, const CenterConfig& cfg, const Spectrum* g_guess = nullptr);

struct LifespanReport {
    double eps = 0.0;           // |f|_{H^s0}
    double bound = 0.0;         // A eps
    double t_max = 0.0;
    double certified = 0.0;     // first time |u| > A eps, or t_max
    bool exited = false;
    int reprojections = 0;
    double max_jump = 0.0;      // largest hyperbolic correction at a re-projection
    std::vector<double> times;
    std::vector<double> norms;
};

// Follows the center-set trajectory from g(f) + f, re-solving the hyperbolic part every `reproject_every`.
LifespanReport lifespan_probe(const Spectrum& f, const CenterConfig& cfg, double amp_a, double t_max,
                              double reproject_every);

}  // namespace jetstab
