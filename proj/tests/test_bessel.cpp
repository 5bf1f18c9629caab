#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>

#include "doctest.h"
#include "jetstab/bessel.hpp"
#include "jetstab/errors.hpp"

using namespace jetstab;
using big = boost::multiprecision::cpp_bin_float_50;

namespace {

// Power series in 50-digit arithmetic; all terms positive so no cancellation.
big oracle_series(double r, int nu) {
    big q = big(r) * big(r) / 4;
    big term = nu == 0 ? big(1) : big(r) / 2;
    big sum = term;
    for (int k = 1; k < 5000; ++k) {
        term *= q / (big(k) * big(k + nu));
        sum += term;
        if (term < sum * big("1e-45")) break;
    }
    return sum;
}

double rel(double a, const big& b) { return static_cast<double>(abs((big(a) - b) / b)); }

}  // namespace

TEST_CASE("leading values") {
    CHECK(bessel_i0(0.0) == 1.0);
    CHECK(bessel_i1(0.0) == 0.0);
    CHECK(bessel_ratio(0.0) == 0.0);
}

TEST_CASE("ratio(0.5) against oracle") {
    big o = oracle_series(0.5, 1) / oracle_series(0.5, 0);
    CHECK(std::abs(static_cast<double>(o) - 0.242499) < 1e-6);
    CHECK(rel(bessel_ratio(0.5), o) < 1e-14);
}

TEST_CASE("ratio(50) close to one") {
    double r = bessel_ratio(50.0);
    CHECK(r > 0.98);
    CHECK(r < 1.0);
    big o = oracle_series(50.0, 1) / oracle_series(50.0, 0);
    CHECK(rel(r, o) < 1e-13);
}

TEST_CASE("relative error against 50-digit series on [0, 700]") {
    double worst0 = 0.0, worst1 = 0.0, worstr = 0.0;
    for (double r = 0.01; r <= 700.0; r *= 1.07) {
        big o0 = oracle_series(r, 0), o1 = oracle_series(r, 1);
        worst0 = std::max(worst0, rel(bessel_i0(r), o0));
        worst1 = std::max(worst1, rel(bessel_i1(r), o1));
        worstr = std::max(worstr, rel(bessel_ratio(r), o1 / o0));
    }
    for (double r : {14.9, 15.0, 15.1, 699.9, 700.0}) {
        big o0 = oracle_series(r, 0), o1 = oracle_series(r, 1);
        worst0 = std::max(worst0, rel(bessel_i0(r), o0));
        worst1 = std::max(worst1, rel(bessel_i1(r), o1));
    }
    CHECK(worst0 < 1e-12);
    CHECK(worst1 < 1e-12);
    CHECK(worstr < 1e-12);
}

TEST_CASE("unscaled values rejected past the overflow-safe range") {
    CHECK_THROWS_AS(bessel_i0(800.0), NumericError);
    CHECK_THROWS_AS(bessel_i1(701.0), NumericError);
    CHECK_THROWS_AS(bessel_i0(-1.0), ConfigError);
    double r = bessel_ratio(1e6);
    CHECK(r < 1.0);
    CHECK(r > 0.999999);
    BesselEval b;
    CHECK(std::isfinite(b.i0e(5000.0)));
}

TEST_CASE("invariants") {
    double prev = -1.0;
    for (double r = 0.0; r <= 100.0; r += 0.01) {
        double v = bessel_ratio(r);
        CHECK(v >= 0.0);
        CHECK(v < 1.0);
        CHECK(v > prev);
        prev = v;
        CHECK(bessel_i0(r) >= 1.0);
        CHECK(bessel_i1(r) >= 0.0);
    }
}

TEST_CASE("I1 is the derivative of I0") {
    for (double r : {0.3, 1.0, 4.0, 14.0, 16.0, 40.0, 200.0}) {
        double h = 1e-5 * std::max(1.0, r);
        double fd = (bessel_i0(r + h) - bessel_i0(r - h)) / (2 * h);
        CHECK(std::abs(fd - bessel_i1(r)) <= 1e-6 * bessel_i1(r));
    }
}

TEST_CASE("ratio derivative") {
    for (double r : {1e-6, 0.1, 1.0, 10.0, 100.0}) {
        double h = 1e-5 * std::max(1.0, r);
        double fd = (bessel_ratio(r + h) - bessel_ratio(std::max(0.0, r - h))) / (r + h - std::max(0.0, r - h));
        CHECK(std::abs(fd - bessel_ratio_derivative(r)) <= 1e-6 * std::abs(bessel_ratio_derivative(r)) + 1e-9);
    }
}

TEST_CASE("branch switchover continuity") {
    BesselEval b;
    for (double r = 13.0; r <= 17.0; r += 0.25) {
        CHECK(std::abs(b.i0e_series(r) - b.i0e_asymptotic(r)) <= 1e-10 * b.i0e_series(r));
        CHECK(std::abs(b.i1e_series(r) - b.i1e_asymptotic(r)) <= 1e-10 * b.i1e_series(r));
    }
}
