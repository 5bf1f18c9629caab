#include "jetstab/bessel.hpp"

#include <cmath>
#include <numbers>

#include "jetstab/errors.hpp"

namespace jetstab {

namespace {

void check_arg(double r) {
    if (!(r >= 0.0) || std::isinf(r)) throw ConfigError("Bessel argument must be finite and nonnegative");
}

// sum_k (r^2/4)^k / (k! (k+nu)!) for nu = 0, 1
double series_sum(double r, int nu) {
    const double q = 0.25 * r * r;
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 500; ++k) {
        term *= q / (static_cast<double>(k) * (k + nu));
        sum += term;
        if (term < 1e-17 * sum) break;
    }
    return sum;
}

// sqrt(2 pi r) e^{-r} I_nu(r) ~ sum_k (-1)^k a_k(nu) / r^k, stopped at the smallest term.
double asymptotic_sum(double r, int nu, int max_order) {
    const double mu = 4.0 * nu * nu;
    double term = 1.0;
    double sum = 1.0;
    double prev = 1.0;
    for (int k = 1; k <= max_order; ++k) {
        double odd = 2.0 * k - 1.0;
        double next = -term * (mu - odd * odd) / (8.0 * k * r);
        if (std::abs(next) > std::abs(prev)) break;
        term = next;
        sum += term;
        prev = std::abs(term);
        if (prev < 1e-17 * std::abs(sum)) break;
    }
    return sum;
}

}  // namespace

double BesselEval::i0e_series(double r) const { return std::exp(-r) * series_sum(r, 0); }

double BesselEval::i1e_series(double r) const { return std::exp(-r) * 0.5 * r * series_sum(r, 1); }

double BesselEval::i0e_asymptotic(double r) const {
    return asymptotic_sum(r, 0, asymptotic_order) / std::sqrt(2.0 * std::numbers::pi * r);
}

double BesselEval::i1e_asymptotic(double r) const {
    return asymptotic_sum(r, 1, asymptotic_order) / std::sqrt(2.0 * std::numbers::pi * r);
}

double BesselEval::i0e(double r) const {
    check_arg(r);
    return r < series_cutoff ? i0e_series(r) : i0e_asymptotic(r);
}

double BesselEval::i1e(double r) const {
    check_arg(r);
    return r < series_cutoff ? i1e_series(r) : i1e_asymptotic(r);
}

double BesselEval::i0(double r) const {
    check_arg(r);
    if (r > unscaled_limit) throw NumericError("unscaled I0 overflows above r = 700; use the scaled form");
    return r < series_cutoff ? series_sum(r, 0) : std::exp(r) * i0e_asymptotic(r);
}

double BesselEval::i1(double r) const {
    check_arg(r);
    if (r > unscaled_limit) throw NumericError("unscaled I1 overflows above r = 700; use the scaled form");
    return r < series_cutoff ? 0.5 * r * series_sum(r, 1) : std::exp(r) * i1e_asymptotic(r);
}

double BesselEval::ratio(double r) const {
    check_arg(r);
    if (r < series_cutoff) return 0.5 * r * series_sum(r, 1) / series_sum(r, 0);
    return asymptotic_sum(r, 1, asymptotic_order) / asymptotic_sum(r, 0, asymptotic_order);
}

double BesselEval::ratio_derivative(double r) const {
    check_arg(r);
    if (r < 1e-4) return 0.5 - 3.0 * r * r / 16.0;
    double q = ratio(r);
    return 1.0 - q / r - q * q;
}

namespace {
const BesselEval default_eval{};
}

double bessel_i0(double r) { return default_eval.i0(r); }
double bessel_i1(double r) { return default_eval.i1(r); }
double bessel_ratio(double r) { return default_eval.ratio(r); }
double bessel_ratio_derivative(double r) { return default_eval.ratio_derivative(r); }

}  // namespace jetstab
