#pragma once

#include <complex>
#include <functional>
#include <vector>

namespace jetstab {

using cplx = std::complex<double>;

// Collocation grid on [0, 2pi). Retained frequencies are -n/2+1 .. n/2.
// Coefficients are stored in FFT order: index k holds xi = k for k <= n/2,
// xi = k - n above. The Nyquist mode xi = n/2 is kept by the transform pair
// but zeroed by derivatives and dealiasing.
struct FourierGrid {
    int n_modes = 64;
    double dealias_fraction = 2.0 / 3.0;

    FourierGrid() = default;
    explicit FourierGrid(int n, double dealias = 2.0 / 3.0);

    int size() const { return n_modes; }
    int nyquist() const { return n_modes / 2; }
    int freq(int idx) const { return idx <= n_modes / 2 ? idx : idx - n_modes; }
    // -1 when xi is not a retained frequency.
    int index(int xi) const;
    double x(int j) const;
    int dealias_cutoff() const;

    bool operator==(const FourierGrid& o) const { return n_modes == o.n_modes; }
};

struct RealField {
    FourierGrid grid;
    std::vector<double> v;

    RealField() = default;
    explicit RealField(const FourierGrid& g) : grid(g), v(g.size(), 0.0) {}
    RealField(const FourierGrid& g, std::vector<double> vals);

    static RealField from_function(const FourierGrid& g, const std::function<double(double)>& f);
    double& operator[](int j) { return v[j]; }
    double operator[](int j) const { return v[j]; }
    int size() const { return grid.size(); }
};

struct Spectrum {
    FourierGrid grid;
    std::vector<cplx> c;

    Spectrum() = default;
    explicit Spectrum(const FourierGrid& g) : grid(g), c(g.size(), cplx(0.0)) {}

    cplx at(int xi) const;
    void set(int xi, cplx value);
    int size() const { return grid.size(); }
};

// Normalized DFT pair: coeff(xi) = (1/n) sum_j f(x_j) e^{-i xi x_j}.
Spectrum to_spectrum(const RealField& f);
RealField from_spectrum(const Spectrum& s);  // real part of the synthesis
Spectrum to_spectrum(const FourierGrid& g, const std::vector<cplx>& values);
std::vector<cplx> synthesize(const Spectrum& s);

// In-place complex transforms of length n (forward unnormalized, inverse unnormalized).
void fft_forward(std::vector<cplx>& data);
void fft_inverse(std::vector<cplx>& data);

Spectrum apply_multiplier(const std::function<cplx(int)>& m, const Spectrum& s);
Spectrum derivative(const Spectrum& s, int order = 1);
RealField derivative(const RealField& f, int order = 1);
Spectrum dealias(const Spectrum& s);
RealField dealias(const RealField& f);
// Complex-conjugate of the physical field, expressed on the coefficients.
Spectrum conj_field(const Spectrum& s);
Spectrum real_part(const Spectrum& s);
Spectrum imag_part(const Spectrum& s);  // returned as the spectrum of the real field Im u

// Aliasing-free product of two spectra, truncated to the retained range.
Spectrum product(const Spectrum& a, const Spectrum& b);

double sobolev_norm(const Spectrum& u, double s);
double l2_norm(const Spectrum& u);
double l2_norm(const RealField& f);
double max_abs(const Spectrum& u);

Spectrum operator+(const Spectrum& a, const Spectrum& b);
Spectrum operator-(const Spectrum& a, const Spectrum& b);
Spectrum operator*(cplx a, const Spectrum& b);
RealField operator+(const RealField& a, const RealField& b);
RealField operator-(const RealField& a, const RealField& b);
RealField operator*(double a, const RealField& b);
RealField operator*(const RealField& a, const RealField& b);

// Littlewood-Paley bump: chi_tilde = 1 on |t| <= 1/2, 0 on |t| >= 1,
// phi(t) = chi_tilde(t/2) - chi_tilde(t) supported in 1/2 < |t| < 2.
double lp_chi(double t);
double lp_phi(double t);
double lp_block_multiplier(int j, double xi);
double lp_partial_multiplier(int j, double xi);
int lp_j_max(const FourierGrid& g);

struct LPDecomposition {
    int j_max = 0;
    std::vector<Spectrum> blocks;
};

Spectrum lp_block(const Spectrum& u, int j);
Spectrum partial_sum(const Spectrum& u, int j);
LPDecomposition lp_decompose(const Spectrum& u);

}  // namespace jetstab
