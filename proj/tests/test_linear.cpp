#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <random>

#include "doctest.h"
#include "jetstab/errors.hpp"
#include "jetstab/linear.hpp"

using namespace jetstab;
using big = boost::multiprecision::cpp_bin_float_50;

namespace {

big oracle_ratio(double r) {
    big q = big(r) * big(r) / 4;
    big t0 = 1, s0 = 1, t1 = big(r) / 2, s1 = t1;
    for (int k = 1; k < 400; ++k) {
        t0 *= q / (big(k) * k);
        t1 *= q / (big(k) * (k + 1));
        s0 += t0;
        s1 += t1;
    }
    return s1 / s0;
}

Spectrum random_spectrum(const FourierGrid& g, unsigned seed, double scale = 1.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    Spectrum s(g);
    for (auto& c : s.c) c = scale * cplx(nd(rng), nd(rng));
    return s;
}

RealField random_field(const FourierGrid& g, unsigned seed, double scale) {
    auto s = random_spectrum(g, seed, scale);
    for (int k = 0; k < g.size(); ++k)
        if (std::abs(g.freq(k)) > g.size() / 4) s.c[k] = 0.0;
    return from_spectrum(s);
}

}  // namespace

TEST_CASE("parameter guard") {
    CHECK_THROWS_AS(DispersionParams(0.5), ConfigError);
    CHECK_THROWS_AS(DispersionParams(1.2), ConfigError);
    CHECK_THROWS_AS(DispersionParams(0.0), ConfigError);
    CHECK_NOTHROW(DispersionParams(0.51));
}

TEST_CASE("lambda_g closed form against oracle") {
    // rho = 0.5 is excluded by the constructor; the closed form is checked through rho = 0.51
    // and through the raw formula at rho = 0.5.
    double r05 = static_cast<double>(oracle_ratio(0.5));
    double expect = std::sqrt(8.0 * r05 * 0.5 * 0.75);
    CHECK(std::abs(expect - 0.852935) < 1e-6);
    DispersionParams p(0.51);
    double k = 0.51;
    double o = std::sqrt(static_cast<double>(oracle_ratio(k)) * k * (1 - k * k) / (k * k * k));
    CHECK(std::abs(lambda_g(1, p) - o) < 1e-13 * o);
    CHECK(lambda_g(0, p) == 0.0);
    CHECK(lambda_d(0, p) == 0.0);
    CHECK(lambda_g(2, p) == 0.0);
    CHECK(lambda_d(2, p) > 0.0);
}

TEST_CASE("disjoint supports") {
    for (double rho : {0.34, 0.51, 0.83}) {
        DispersionParams p(rho);
        for (int xi = -200; xi <= 200; ++xi) CHECK(lambda_g(xi, p) * lambda_d(xi, p) == 0.0);
    }
}

TEST_CASE("most unstable wavenumber") {
    double ks = most_unstable_wavenumber();
    CHECK(std::abs(ks - 0.678) <= 0.02);
    CHECK(rayleigh_growth(ks) > rayleigh_growth(0.5));
    CHECK(rayleigh_growth(ks) > rayleigh_growth(0.9));
    double best = 0.0, arg = 0.0;
    const int n = 1000000;
    for (int i = 1; i < n; ++i) {
        double k = static_cast<double>(i) / n;
        double f = rayleigh_growth(k);
        if (f > best) {
            best = f;
            arg = k;
        }
    }
    CHECK(std::abs(arg - ks) <= 1e-5);
}

TEST_CASE("split sizes") {
    FourierGrid g(64);
    for (double rho : {0.34, 0.51, 0.83}) {
        DispersionParams p(rho);
        SpectralSplit sp(g, p);
        CHECK(sp.growing().size() == 2 * static_cast<size_t>(std::floor(1.0 / rho)));
        CHECK(sp.growing().size() + sp.dispersive().size() == 64u);
    }
}

TEST_CASE("projections") {
    FourierGrid g(64);
    DispersionParams p(0.34);
    auto z = random_spectrum(g, 3);
    z.set(0, cplx(0.0, 0.7));  // zero real mean
    auto s = proj_s(z, p), u = proj_u(z, p), d = proj_d(z, p);
    CHECK(l2_norm(s + u + d - z) < 1e-14);
    CHECK(l2_norm(proj_s(u, p)) < 1e-15);
    CHECK(l2_norm(proj_u(s, p)) < 1e-15);
    CHECK(l2_norm(proj_s(s, p) - s) < 1e-15);
    CHECK(l2_norm(proj_u(u, p) - u) < 1e-15);
    CHECK(l2_norm(proj_d(d, p) - d) < 1e-15);
    CHECK(l2_norm(proj_d(s + u, p)) < 1e-15);
}

TEST_CASE("complex coordinate") {
    FourierGrid g(64);
    DispersionParams p(0.51);
    JetState zero(g, p);
    CHECK(l2_norm(to_complex(zero)) == 0.0);

    JetState st(random_field(g, 1, 1e-3), random_field(g, 2, 1e-3), p);
    auto ph = to_spectrum(st.psi);
    ph.set(0, 0.0);
    st.psi = from_spectrum(ph);
    auto back = from_complex(to_complex(st), p);
    CHECK(l2_norm(back.eta - st.eta) <= 1e-12 * l2_norm(st.eta));
    CHECK(l2_norm(back.psi - st.psi) <= 1e-12 * l2_norm(st.psi));

    // eta = eps cos x, psi = 0 lies in a growing mode with Re and Im equal
    JetState c(RealField::from_function(g, [](double x) { return 1e-3 * std::cos(x); }), RealField(g), p);
    auto z = to_complex(c);
    double a = std::sqrt(1.0 / (0.51 * 0.51) - 1.0);
    CHECK(std::abs(z.at(1) - cplx(1.0, 1.0) * 0.5e-3 * a) < 1e-16);
}

TEST_CASE("linear flow") {
    FourierGrid g(64);
    DispersionParams p(0.51);
    auto z = random_spectrum(g, 9);
    auto zd = proj_d(z, p);
    for (double t : {0.5, 10.0, 50.0}) CHECK(std::abs(l2_norm(linear_flow(zd, t, p)) - l2_norm(zd)) < 1e-13 * l2_norm(zd));

    Spectrum eu(g);
    eu.set(1, 1.0);
    eu.set(-1, 1.0);
    double lg = lambda_g(1, p);
    CHECK(std::abs(l2_norm(linear_flow(eu, 2.0, p)) / l2_norm(eu) - std::exp(2.0 * lg)) < 1e-13);

    Spectrum es(g);
    es.set(1, cplx(0.0, 1.0));
    es.set(-1, cplx(0.0, 1.0));
    double o = static_cast<double>(oracle_ratio(0.51));
    double lo = std::sqrt(o * 0.51 * (1 - 0.51 * 0.51) / std::pow(0.51, 3));
    CHECK(std::abs(l2_norm(linear_flow(es, 1.0, p)) / l2_norm(es) - std::exp(-lo)) < 1e-13);

    auto a = linear_flow(linear_flow(z, 0.7, p), 1.3, p);
    auto b = linear_flow(z, 2.0, p);
    CHECK(l2_norm(a - b) <= 1e-12 * l2_norm(b));

    for (auto proj : {proj_u, proj_s, proj_d}) {
        auto l = linear_flow(proj(z, p), 1.1, p);
        CHECK(l2_norm(proj(l, p) - l) <= 1e-13 * l2_norm(l));
    }
}
