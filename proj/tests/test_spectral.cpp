#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "jetstab/errors.hpp"
#include "jetstab/spectral.hpp"

using namespace jetstab;

namespace {

RealField random_field(const FourierGrid& g, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    RealField f(g);
    for (auto& v : f.v) v = nd(rng);
    return f;
}

Spectrum random_spectrum(const FourierGrid& g, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    Spectrum s(g);
    for (auto& c : s.c) c = cplx(nd(rng), nd(rng));
    return s;
}

}  // namespace

TEST_CASE("grid validation") {
    CHECK_THROWS_AS(FourierGrid(48), ConfigError);
    CHECK_THROWS_AS(FourierGrid(2), ConfigError);
    FourierGrid g(64);
    CHECK(g.index(32) == 32);
    CHECK(g.index(-31) == 33);
    CHECK(g.index(-32) == -1);
    CHECK(g.dealias_cutoff() == 21);
}

TEST_CASE("cosine has coefficients 1/2 at +-1") {
    FourierGrid g(64);
    auto s = to_spectrum(RealField::from_function(g, [](double x) { return std::cos(x); }));
    for (int k = 0; k < g.size(); ++k) {
        int xi = g.freq(k);
        double expect = std::abs(xi) == 1 ? 0.5 : 0.0;
        CHECK(std::abs(s.c[k] - expect) < 1e-15);
    }
}

TEST_CASE("constant field") {
    FourierGrid g(32);
    auto s = to_spectrum(RealField::from_function(g, [](double) { return 1.0; }));
    CHECK(std::abs(s.at(0) - 1.0) < 1e-15);
    for (int k = 1; k < g.size(); ++k) CHECK(std::abs(s.c[k]) < 1e-15);
}

TEST_CASE("Parseval and round trip on several grids") {
    for (int n : {8, 64, 256, 1024}) {
        FourierGrid g(n);
        auto f = random_field(g, 7u + n);
        auto s = to_spectrum(f);
        double sum = 0.0;
        for (auto& c : s.c) sum += std::norm(c);
        double l2 = l2_norm(f);
        CHECK(std::abs(sum - l2 * l2) <= 1e-12 * l2 * l2);
        auto back = from_spectrum(s);
        double err = 0.0, ref = 0.0;
        for (int j = 0; j < n; ++j) {
            err = std::max(err, std::abs(back.v[j] - f.v[j]));
            ref = std::max(ref, std::abs(f.v[j]));
        }
        CHECK(err <= 1e-12 * ref);
    }
}

TEST_CASE("spectrum of real field is Hermitian") {
    FourierGrid g(64);
    auto s = to_spectrum(random_field(g, 3));
    for (int xi = 1; xi < 32; ++xi) CHECK(std::abs(s.at(-xi) - std::conj(s.at(xi))) < 1e-14);
}

TEST_CASE("size mismatch is a configuration error") {
    CHECK_THROWS_AS(to_spectrum(FourierGrid(16), std::vector<cplx>(8)), ConfigError);
    CHECK_THROWS_AS(Spectrum(FourierGrid(16)) + Spectrum(FourierGrid(32)), ConfigError);
}

TEST_CASE("multipliers") {
    FourierGrid g(64);
    auto c = to_spectrum(RealField::from_function(g, [](double x) { return std::cos(x); }));
    auto d = from_spectrum(apply_multiplier([](int xi) { return cplx(0.0, xi); }, c));
    for (int j = 0; j < g.size(); ++j) CHECK(std::abs(d.v[j] + std::sin(g.x(j))) < 1e-14);

    auto r = random_spectrum(g, 11);
    auto id = apply_multiplier([](int) { return cplx(1.0); }, r);
    CHECK(l2_norm(id - r) == 0.0);

    Spectrum e(g);
    e.set(2, 1.0);
    auto m = apply_multiplier([](int xi) { return cplx(std::pow(std::abs(xi), 1.5)); }, e);
    CHECK(std::abs(m.at(2) - std::pow(2.0, 1.5)) < 1e-14);

    CHECK_THROWS_AS(apply_multiplier([](int xi) { return cplx(1.0 / xi); }, e), NumericError);
}

TEST_CASE("real even multiplier keeps fields real") {
    FourierGrid g(64);
    auto s = to_spectrum(random_field(g, 5));
    auto m = apply_multiplier([](int xi) { return cplx(std::exp(-0.1 * std::abs(xi)) + xi * xi); }, s);
    for (int xi = 1; xi < 32; ++xi) CHECK(std::abs(m.at(-xi) - std::conj(m.at(xi))) < 1e-12);
    auto vals = synthesize(m);
    for (auto& v : vals) CHECK(std::abs(v.imag()) < 1e-10);
}

TEST_CASE("bump function closed form") {
    CHECK(lp_chi(0.5) == 1.0);
    CHECK(lp_chi(1.0) == 0.0);
    CHECK(lp_phi(1.0) == 1.0);
    CHECK(lp_phi(0.5) == 0.0);
    CHECK(lp_phi(2.0) == 0.0);
    // midpoint of the transition: s = 1/2 gives exactly 1/2
    CHECK(std::abs(lp_chi(0.75) - 0.5) < 1e-15);
    // independent evaluation of the smoothstep at t = 0.6 (s = 0.8)
    double oracle = std::exp(-1.0 / 0.8) / (std::exp(-1.0 / 0.8) + std::exp(-1.0 / 0.2));
    CHECK(std::abs(lp_chi(0.6) - oracle) < 1e-15);
    for (double t = 0.0; t < 3.0; t += 0.01) {
        CHECK(lp_phi(t) >= 0.0);
        CHECK(lp_phi(t) <= 1.0);
    }
}

TEST_CASE("LP block of e^{4ix}") {
    FourierGrid g(64);
    Spectrum u(g);
    u.set(4, 1.0);
    auto d2 = lp_block(u, 2);
    CHECK(std::abs(d2.at(4) - 1.0) < 1e-15);
    CHECK(l2_norm(lp_block(u, 1)) < 1e-15);
    CHECK(l2_norm(lp_block(u, 3)) < 1e-15);
}

TEST_CASE("S_{-1} = 0 and S_j is the sum of blocks") {
    FourierGrid g(128);
    auto u = random_spectrum(g, 17);
    CHECK(l2_norm(partial_sum(u, -1)) == 0.0);
    Spectrum acc(g);
    for (int j = 0; j <= 4; ++j) acc = acc + lp_block(u, j);
    CHECK(l2_norm(acc - partial_sum(u, 4)) < 1e-14 * l2_norm(u));
}

TEST_CASE("LP reconstruction exact on retained frequencies") {
    for (int n : {16, 64, 512}) {
        FourierGrid g(n);
        auto u = random_spectrum(g, n);
        auto d = lp_decompose(u);
        Spectrum acc(g);
        for (auto& b : d.blocks) acc = acc + b;
        CHECK(l2_norm(acc - u) <= 1e-14 * l2_norm(u));
        CHECK(l2_norm(lp_block(u, d.j_max + 1)) == 0.0);
    }
}

TEST_CASE("LP block support") {
    FourierGrid g(256);
    auto u = random_spectrum(g, 99);
    for (int j = 1; j <= lp_j_max(g); ++j) {
        auto b = lp_block(u, j);
        for (int k = 0; k < g.size(); ++k) {
            int a = std::abs(g.freq(k));
            if (a <= (1 << (j - 1)) || a >= (1 << (j + 1))) CHECK(b.c[k] == cplx(0.0));
        }
    }
}

TEST_CASE("Sobolev norms") {
    FourierGrid g(32);
    Spectrum e1(g);
    e1.set(1, 1.0);
    CHECK(std::abs(sobolev_norm(e1, 1.0) - std::sqrt(2.0)) < 1e-15);
    CHECK(sobolev_norm(Spectrum(g), 3.0) == 0.0);
    Spectrum e3(g);
    e3.set(3, 1.0);
    CHECK(std::abs(sobolev_norm(e3, 2.0) - 10.0) < 1e-13);
}

TEST_CASE("dealiasing zeroes the upper third and Nyquist") {
    FourierGrid g(64);
    auto u = dealias(random_spectrum(g, 4));
    for (int k = 0; k < g.size(); ++k) {
        int a = std::abs(g.freq(k));
        if (a > 21) CHECK(u.c[k] == cplx(0.0));
    }
    CHECK(u.at(32) == cplx(0.0));
}

TEST_CASE("padded product is exact for band-limited data") {
    FourierGrid g(32);
    Spectrum a(g), b(g);
    a.set(10, 1.0);
    b.set(12, 2.0);
    b.set(-5, 1.0);
    auto p = product(a, b);
    CHECK(std::abs(p.at(5) - 1.0) < 1e-14);
    CHECK(l2_norm(p) - 1.0 < 1e-14);  // xi = 22 lies outside the grid and is dropped
    auto x = random_spectrum(g, 1), y = random_spectrum(g, 2);
    // direct convolution oracle
    Spectrum conv(g);
    for (int k = 0; k < g.size(); ++k)
        for (int l = 0; l < g.size(); ++l) {
            int xi = g.freq(k) + g.freq(l);
            if (g.index(xi) >= 0) conv.c[g.index(xi)] += x.c[k] * y.c[l];
        }
    CHECK(l2_norm(product(x, y) - conv) < 1e-12 * l2_norm(conv));
}
