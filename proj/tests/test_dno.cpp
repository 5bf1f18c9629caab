#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <random>

#include "doctest.h"
#include "jetstab/dno.hpp"
#include "jetstab/errors.hpp"

using namespace jetstab;
using big = boost::multiprecision::cpp_bin_float_50;

namespace {

double oracle_ratio(double r) {
    big q = big(r) * big(r) / 4;
    big t0 = 1, s0 = 1, t1 = big(r) / 2, s1 = t1;
    for (int k = 1; k < 400; ++k) {
        t0 *= q / (big(k) * k);
        t1 *= q / (big(k) * (k + 1));
        s0 += t0;
        s1 += t1;
    }
    return static_cast<double>(s1 / s0);
}

DispersionParams raw_params(double rho) {
    DispersionParams p;
    p.rho = rho;  // multiplier evaluation only; bypasses the 1/rho guard
    return p;
}

RealField smooth_random(const FourierGrid& g, unsigned seed, double amp, int kmax) {
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

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
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

DnoOptions direct(int n_y) {
    DnoOptions o;
    o.n_y = n_y;
    o.solver = DnoSolver::direct;
    return o;
}

}  // namespace

TEST_CASE("flat multiplier values") {
    auto p = raw_params(0.5);
    FourierGrid g(128);
    auto c = RealField::from_function(g, [](double x) { return std::cos(x); });
    auto gc = dno_flat(c, p);
    double r = oracle_ratio(0.5);
    for (int j = 0; j < g.size(); ++j) CHECK(std::abs(gc.v[j] - r * c.v[j]) < 1e-13);

    auto one = RealField::from_function(g, [](double) { return 1.0; });
    CHECK(l2_norm(dno_flat(one, p)) == 0.0);

    // |xi| ratio(rho |xi|) at xi = 32: oracle gives 32 ratio(16) = 30.98..., below 31
    auto h = RealField::from_function(g, [](double x) { return std::cos(32 * x); });
    double amp = to_spectrum(dno_flat(h, p)).at(32).real() * 2.0;
    double expect = 32.0 * oracle_ratio(16.0);
    CHECK(std::abs(amp - expect) < 1e-12 * expect);
    CHECK(amp > 30.0);
    CHECK(amp < 32.0);
}

TEST_CASE("zero Dirichlet data") {
    FourierGrid g(32);
    DispersionParams p(0.51);
    auto eta = smooth_random(g, 1, 0.05, 6);
    auto r = solve_dno(FlattenedEllipticProblem(eta, RealField(g), p));
    CHECK(l2_norm(r.g) == 0.0);
    CHECK(l2_norm(r.b) == 0.0);
    CHECK(l2_norm(r.v) == 0.0);
}

TEST_CASE("flat solve converges at second order; Richardson matches the multiplier") {
    FourierGrid g(128);
    DispersionParams p(0.51);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> nd;
    Spectrum s(g);
    for (int xi = 1; xi <= 32; ++xi) {
        cplx c(nd(rng), nd(rng));
        s.set(xi, c);
        s.set(-xi, std::conj(c));
    }
    auto psi = from_spectrum(s);
    RealField eta(g);
    auto exact = dno_flat(s, p);
    std::vector<Spectrum> gs;
    std::vector<double> hs;
    for (int ny : {256, 512, 1024, 2048}) {
        DnoOptions o;
        o.n_y = ny;
        auto r = solve_dno(FlattenedEllipticProblem(eta, psi, p, o));
        CHECK(r.residual < 1e-10);
        gs.push_back(to_spectrum(r.g));
        hs.push_back(radial_step(ny));
    }
    double e0 = l2_norm(gs[0] - exact), e1 = l2_norm(gs[1] - exact), e2 = l2_norm(gs[2] - exact);
    double order1 = std::log(e0 / e1) / std::log(hs[0] / hs[1]);
    double order2 = std::log(e1 / e2) / std::log(hs[1] / hs[2]);
    CHECK(std::abs(order1 - 2.0) < 0.2);
    CHECK(std::abs(order2 - 2.0) < 0.2);
    double a = hs[2] * hs[2], b = hs[3] * hs[3];
    auto rich = cplx(1.0 / (a - b)) * (cplx(a) * gs[3] - cplx(b) * gs[2]);
    CHECK(l2_norm(rich - exact) <= 1e-8 * l2_norm(exact));
}

TEST_CASE("direct and iterative solvers agree") {
    FourierGrid g(32);
    DispersionParams p(0.51);
    auto eta = smooth_random(g, 2, 0.08, 5);
    auto psi = smooth_random(g, 3, 1.0, 8);
    DnoOptions it;
    it.n_y = 48;
    auto r1 = solve_dno(FlattenedEllipticProblem(eta, psi, p, direct(48)));
    auto r2 = solve_dno(FlattenedEllipticProblem(eta, psi, p, it));
    CHECK(r1.residual < 1e-10);
    CHECK(r2.residual < 1e-10);
    CHECK(l2_norm(r1.g - r2.g) < 1e-10 * l2_norm(r1.g));
}

TEST_CASE("linearity in psi and translation equivariance") {
    FourierGrid g(32);
    DispersionParams p(0.51);
    DnoOptions o;
    o.n_y = 48;
    auto eta = smooth_random(g, 4, 0.05, 5);
    auto p1 = smooth_random(g, 5, 1.0, 8), p2 = smooth_random(g, 6, 1.0, 8);
    auto g1 = solve_dno(FlattenedEllipticProblem(eta, p1, p, o)).g;
    auto g2 = solve_dno(FlattenedEllipticProblem(eta, p2, p, o)).g;
    auto g12 = solve_dno(FlattenedEllipticProblem(eta, 2.0 * p1 - 3.0 * p2, p, o)).g;
    CHECK(l2_norm(g12 - (2.0 * g1 - 3.0 * g2)) < 1e-10 * l2_norm(g12));

    const int shift = 5;
    auto roll = [&](const RealField& f) {
        RealField r(g);
        for (int i = 0; i < g.size(); ++i) r.v[(i + shift) % g.size()] = f.v[i];
        return r;
    };
    auto gs = solve_dno(FlattenedEllipticProblem(roll(eta), roll(p1), p, o)).g;
    CHECK(l2_norm(gs - roll(g1)) < 1e-10 * l2_norm(g1));
}

TEST_CASE("quadratic part closed form") {
    auto p = raw_params(0.5);
    FourierGrid g(32);
    const double eps = 0.3, del = 0.7;
    auto eta = RealField::from_function(g, [&](double x) { return eps * std::cos(x); });
    auto psi = RealField::from_function(g, [&](double x) { return del * std::sin(x); });
    auto q = quadratic_part(eta, psi, p);
    double r1 = oracle_ratio(0.5), g2 = 2.0 * oracle_ratio(1.0);
    double c2 = eps * del * (1.0 - r1 * g2 / 2.0 - r1 / (2.0 * 0.5));
    for (int j = 0; j < g.size(); ++j) CHECK(std::abs(q.v[j] - c2 * std::sin(2.0 * g.x(j))) < 1e-14);
    CHECK(l2_norm(quadratic_part(RealField(g), psi, p)) == 0.0);
    CHECK(l2_norm(quadratic_part(eta, RealField(g), p)) == 0.0);
}

TEST_CASE("cubic remainder of the expansion") {
    FourierGrid g(16);
    DispersionParams p(0.51);
    auto eta = RealField::from_function(g, [](double x) { return std::cos(x); });
    auto psi = RealField::from_function(g, [](double x) { return std::sin(x); });
    auto q = quadratic_part(eta, psi, p);
    auto g0 = dno_flat(psi, p);
    std::vector<double> es{1e-2, 3e-3, 1e-3, 3e-4, 1e-4}, rs;
    DnoOptions o;
    o.n_y = 128;
    for (double e : es) {
        auto G = dno_corrected(e * eta, e * psi, p, o);
        rs.push_back(l2_norm(G - e * g0 - (e * e) * q));
    }
    CHECK(std::abs(fit_slope(es, rs) - 3.0) < 0.1);
}

TEST_CASE("shape derivative") {
    FourierGrid g(32);
    DispersionParams p(0.51);
    auto o = direct(512);
    auto psi = RealField::from_function(g, [](double x) { return std::sin(x) + 0.2 * std::cos(3 * x); });
    auto eta = RealField::from_function(g, [](double x) { return 0.05 * std::cos(x); });
    auto d = RealField::from_function(g, [](double x) { return std::sin(2 * x); });
    CHECK(l2_norm(shape_derivative(eta, RealField(g), d, p, o)) == 0.0);

    auto sd = shape_derivative(eta, psi, d, p, o);
    std::vector<double> es{0.08, 0.04, 0.02, 0.01}, rs;
    for (double e : es) {
        auto gp = solve_dno(FlattenedEllipticProblem(eta + e * d, psi, p, o)).g;
        auto gm = solve_dno(FlattenedEllipticProblem(eta - e * d, psi, p, o)).g;
        rs.push_back(l2_norm((1.0 / (2 * e)) * (gp - gm) - sd));
    }
    CHECK(std::abs(fit_slope(es, rs) - 2.0) < 0.2);

    // at eta = 0 the formula is the quadratic part with eta -> delta eta, up to radial discretization
    auto sd0 = shape_derivative(RealField(g), psi, d, p, o);
    CHECK(l2_norm(sd0 - quadratic_part(d, psi, p)) < 1e-4 * l2_norm(sd0));
}

TEST_CASE("boundary flux") {
    FourierGrid g(32);
    DispersionParams p(0.51);
    auto psi = smooth_random(g, 8, 1.0, 8);
    DnoOptions o;
    o.n_y = 64;
    auto r0 = solve_dno(FlattenedEllipticProblem(RealField(g), psi, p, o));
    CHECK(std::abs(boundary_flux(r0, RealField(g), p)) < 1e-13);

    auto eta = smooth_random(g, 9, 1e-3, 5);
    std::vector<double> fl;
    for (int ny : {64, 128, 256}) {
        o.n_y = ny;
        auto r = solve_dno(FlattenedEllipticProblem(eta, psi, p, o));
        fl.push_back(std::abs(boundary_flux(r, eta, p)));
    }
    CHECK(fl[2] <= 1e-8 * l2_norm(psi));
    CHECK(std::log(fl[0] / fl[1]) / std::log(2.0) >= 1.8);
    CHECK(std::log(fl[1] / fl[2]) / std::log(2.0) >= 1.8);
}

TEST_CASE("degenerate radius is rejected") {
    FourierGrid g(32);
    DispersionParams p(0.51);
    auto eta = RealField::from_function(g, [](double x) { return -0.45 * std::cos(x); });
    auto psi = RealField::from_function(g, [](double x) { return std::sin(x); });
    CHECK_THROWS_AS(solve_dno(FlattenedEllipticProblem(eta, psi, p)), DomainError);
    CHECK_THROWS_AS(radial_step(4), ConfigError);
}
