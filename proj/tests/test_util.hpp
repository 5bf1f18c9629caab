#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "jetstab/spectral.hpp"

namespace testutil {

using namespace jetstab;

inline RealField smooth_random(const FourierGrid& g, unsigned seed, double amp, int kmax) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    Spectrum s(g);
    for (int xi = 1; xi <= kmax; ++xi) {
        cplx c(nd(rng), nd(rng));
        c *= amp / (xi * xi);
        s.set(xi, c);
        s.set(-xi, std::conj(c));
    }
    return from_spectrum(s);
}

inline Spectrum random_spectrum(const FourierGrid& g, unsigned seed, int kmax) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    Spectrum s(g);
    for (int xi = -kmax; xi <= kmax; ++xi) s.set(xi, cplx(nd(rng), nd(rng)));
    return s;
}

// least-squares slope of log y against log x
inline double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double mx = 0, my = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= x.size();
    my /= y.size();
    double sxy = 0, sxx = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
        sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
    }
    return sxy / sxx;
}

inline Spectrum single_mode(const FourierGrid& g, int xi, cplx c = 1.0) {
    Spectrum s(g);
    s.set(xi, c);
    return s;
}

}  // namespace testutil
