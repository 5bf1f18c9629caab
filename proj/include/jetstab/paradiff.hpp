#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "jetstab/dno.hpp"
#include "jetstab/linear.hpp"
#include "jetstab/spectral.hpp"

namespace jetstab {

using cvec = std::vector<cplx>;

// chi(zeta, xi') = sum_{j>=3} chi_tilde(2^{2-j} zeta) phi(2^{-j} xi').
double quantization_cutoff(double zeta, double xi);

enum class Quantization {
    raw,         // cutoff applied to every coefficient frequency
    exact_mean,  // x-mean of the symbol applied as a multiplier on xi != 0
};

// coef[k'][k]: k-th x-Fourier coefficient of a(., xi') with xi' = grid.freq(k').
struct GriddedSymbol {
    FourierGrid grid;
    std::vector<cvec> coef;

    GriddedSymbol() = default;
    explicit GriddedSymbol(const FourierGrid& g) : grid(g), coef(g.size(), cvec(g.size(), cplx(0.0))) {}
    // values(xi, out) fills a(x_j, xi) for every grid point.
    static GriddedSymbol from_values(const FourierGrid& g, const std::function<void(int, cvec&)>& values);
    // x-independent symbol m(xi).
    static GriddedSymbol multiplier(const FourierGrid& g, const std::function<cplx(int)>& m);
};

// Direct double sum over retained frequencies. Nyquist input and output are dropped.
Spectrum paradiff_apply(const GriddedSymbol& a, const Spectrum& u, Quantization q = Quantization::raw,
                        bool parallel = true);
Spectrum paradiff_apply_serial(const GriddedSymbol& a, const Spectrum& u, Quantization q = Quantization::raw);
// Dense matrix in FFT index order: (T_a u).c = M u.c
Eigen::MatrixXcd quantization_matrix(const GriddedSymbol& a, Quantization q = Quantization::raw);

// Blockwise sum_j S_{j-3}a Delta_j u and the balanced part sum_{|j-k|<3} Delta_j a Delta_k u.
Spectrum paraproduct(const Spectrum& a, const Spectrum& u);
Spectrum paraproduct(const RealField& a, const Spectrum& u);
Spectrum remainder_pm(const Spectrum& a, const Spectrum& u);

// ---- symbols given as sums of (even(x) + odd(x) i sgn xi) M(|xi|)

enum class Special { lambda1, lambda_d };

struct SpecialFactor {
    Special kind = Special::lambda1;
    int derivative = 0;  // radial derivative order, at most 2
};

struct SymbolTerm {
    double power = 0.0;  // |xi|^power
    std::vector<SpecialFactor> specials;
    cvec even, odd;  // coefficient fields on the x grid

    double order() const;
    // M(|xi|) with |xi| < 1/2 continued by the value at 1/2.
    double multiplier(double abs_xi, const DispersionParams& p) const;
};

struct PluriSymbol {
    FourierGrid grid;
    DispersionParams params;
    double top_order = 0.0;
    std::vector<SymbolTerm> terms;

    PluriSymbol() = default;
    PluriSymbol(const FourierGrid& g, const DispersionParams& p, double m) : grid(g), params(p), top_order(m) {}

    void add(SymbolTerm t) { terms.push_back(std::move(t)); }
    cvec values(int xi) const;  // a(x_j, xi)
    GriddedSymbol sample() const;
    PluriSymbol derivative_xi() const;
    PluriSymbol derivative_x(int order = 1) const;
    PluriSymbol conjugate() const;
};

// Term with constant-in-x coefficients.
SymbolTerm constant_term(const FourierGrid& g, cplx even, cplx odd, double power,
                         std::vector<SpecialFactor> specials = {});
SymbolTerm field_term(const RealField& even, const RealField& odd, double power,
                      std::vector<SpecialFactor> specials = {});

// Radial special multipliers and their derivatives in |xi|.
double special_value(Special s, int derivative, double k, const DispersionParams& p);

PluriSymbol compose_symbols(const PluriSymbol& a, const PluriSymbol& b, double r);
PluriSymbol adjoint_symbol(const PluriSymbol& a, double r);

// lambda = lambda1 + lambda0 with lambda0 = eta/(2 rho R) - (eta_x/(2R)) i sgn(xi), R = rho + eta.
PluriSymbol symbol_lambda(const RealField& eta, const DispersionParams& p, int order_count = 2);
PluriSymbol symbol_h(const RealField& eta, const DispersionParams& p);

// ---- good unknown w = psi - T_B eta

struct FixedPointOptions {
    double tol = 1e-13;  // relative to the data norm
    int max_iter = 80;
    double damping = 1.0;
    int growth_limit = 3;  // consecutive residual increases before giving up
};

struct GoodUnknown {
    RealField eta, w, b, v, g;
};

GoodUnknown good_unknown(const JetState& s, const DnoOptions& o);
JetState good_unknown_inverse(const RealField& eta, const RealField& w, const DispersionParams& p, const DnoOptions& o,
                              const FixedPointOptions& fp = {}, const RealField* psi_guess = nullptr);

// ---- two-term symbols on the integer lattice: principal P, its xi-derivative dP, subprincipal S

struct TwoTermSymbol {
    FourierGrid grid;
    std::vector<cvec> principal, dprincipal, sub;  // [frequency index][x index]

    TwoTermSymbol() = default;
    explicit TwoTermSymbol(const FourierGrid& g);
    GriddedSymbol sample() const;  // P + S
};

TwoTermSymbol sharp(const TwoTermSymbol& a, const TwoTermSymbol& b);
TwoTermSymbol star(const TwoTermSymbol& a);
TwoTermSymbol operator-(const TwoTermSymbol& a, const TwoTermSymbol& b);
// max |P| and max |S| over |xi| >= n_cut
struct TwoTermNorm {
    double principal = 0.0;
    double sub = 0.0;
};
TwoTermNorm two_term_norm(const TwoTermSymbol& a, int n_cut);

struct DiagSymbols {
    TwoTermSymbol p, q, gamma, lambda, lambda_inv, h_shift;  // h_shift = h - rho^-2
};

DiagSymbols diag_symbols(const RealField& eta, const DispersionParams& p, int n_cut);
// Two-term lambda with a given subprincipal part, used to compare variants.
TwoTermSymbol lambda_two_term(const RealField& eta, const DispersionParams& p, const std::vector<cvec>& sub);
void check_cut(const FourierGrid& g, const DispersionParams& p, int n_cut);

// ---- complex diagonal unknown

Spectrum complex_diag(const RealField& eta, const RealField& w, const DispersionParams& p, int n_cut);
void complex_diag_inverse(const Spectrum& u, const DispersionParams& p, int n_cut, RealField& eta, RealField& w,
                          const FixedPointOptions& fp = {});
// complex_diag at eta = 0, mode by mode.
Spectrum complex_diag_flat(const Spectrum& eta, const Spectrum& w, const DispersionParams& p, int n_cut);
void complex_diag_flat_inverse(const Spectrum& u, const DispersionParams& p, int n_cut, Spectrum& eta, Spectrum& w);

struct DiagonalCoordinates {
    DispersionParams params;
    int n_cut = 8;
    DnoOptions dno;
    FixedPointOptions fixed_point;
};

Spectrum to_diagonal(const JetState& s, const DiagonalCoordinates& c);
JetState from_diagonal(const Spectrum& u, const DiagonalCoordinates& c, const JetState* guess = nullptr);
// d/dt of the diagonal unknown along the water-jet flow.
Spectrum diagonal_rate(const JetState& s, const DiagonalCoordinates& c);

// ---- extended symbol and remainder

// Smooth even bump: 1 on |x| <= 2, 0 on |x| >= 4.
double kappa(double x);

struct ExtendedConfig {
    DiagonalCoordinates coords;
    double eps0 = 0.05;
    double s0 = 5.5;
};

struct ExtendedCoefficients {
    double kappa_s0 = 1.0;  // kappa(|u|_{H^{s0}} / eps0)
    double kappa_4 = 1.0;   // kappa(|u|_{H^4} / eps0)
    RealField b;            // (1 + eta_x^2)^{-3/4} - 1
    RealField v;            // tangential velocity V
};

// State recovered from u together with the symbol coefficients.
struct LiftedState {
    Spectrum u;
    JetState state;
    ExtendedCoefficients coef;
    bool lifted = false;  // false when the cutoff vanishes and no state was needed
};

LiftedState lift(const Spectrum& u, const ExtendedConfig& cfg, const JetState* guess = nullptr);
ExtendedCoefficients extended_coefficients(const Spectrum& u, const JetState& s, const ExtendedConfig& cfg);
ExtendedCoefficients interpolate(const ExtendedCoefficients& a, const ExtendedCoefficients& b, double theta);

// gamma_Ext; with_cutoff = false drops both kappa factors (the symbol of the uncut system).
PluriSymbol extended_symbol(const ExtendedCoefficients& c, const FourierGrid& g, const DispersionParams& p,
                            bool with_cutoff = true);
PluriSymbol extended_symbol(const Spectrum& u, const ExtendedConfig& cfg);

// Lambda_g applied to conj(u) on the growing band.
Spectrum hyperbolic_part(const Spectrum& u, const DispersionParams& p);
// i Pi_d T_gamma u with exact-mean quantization.
Spectrum dispersive_part(const PluriSymbol& gamma, const Spectrum& u);

// kappa * (u_t - Lambda_g conj(u) - i Pi_d T_gamma u), gamma without cutoffs.
Spectrum extended_remainder(const LiftedState& ls, const ExtendedConfig& cfg);
Spectrum extended_remainder(const Spectrum& u, const ExtendedConfig& cfg);
// Right side of the extended system.
Spectrum extended_rate(const LiftedState& ls, const ExtendedConfig& cfg);

}  // namespace jetstab
