#pragma once

namespace jetstab {

// Modified Bessel functions I0, I1 of nonnegative real argument.
// Power series below series_cutoff, scaled large-argument expansion above.
struct BesselEval {
    double series_cutoff = 15.0;
    int asymptotic_order = 40;

    static constexpr double unscaled_limit = 700.0;

    double i0(double r) const;
    double i1(double r) const;
    // e^{-r} I0(r), e^{-r} I1(r): valid for every r >= 0.
    double i0e(double r) const;
    double i1e(double r) const;
    double ratio(double r) const;
    // d/dr (I1/I0) = 1 - ratio/r - ratio^2.
    double ratio_derivative(double r) const;

    double i0e_series(double r) const;
    double i1e_series(double r) const;
    double i0e_asymptotic(double r) const;
    double i1e_asymptotic(double r) const;
};

double bessel_i0(double r);
double bessel_i1(double r);
double bessel_ratio(double r);
double bessel_ratio_derivative(double r);

}  // namespace jetstab
