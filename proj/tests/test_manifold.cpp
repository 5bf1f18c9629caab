#include <cmath>

#include "doctest.h"
#include "jetstab/errors.hpp"
#include "jetstab/manifold.hpp"
#include "test_util.hpp"

using namespace jetstab;
using namespace testutil;

namespace {

const DispersionParams P(0.51);

ManifoldConfig mconfig(double quad_dt = 0.1) {
    ManifoldConfig c;
    c.ext.coords.params = P;
    c.ext.coords.dno.n_y = 32;
    c.quad_dt = quad_dt;
    return c;
}

CenterConfig cconfig() {
    CenterConfig c;
    c.ext.coords.params = P;
    c.ext.coords.dno.n_y = 32;
    c.damping = 1.0;
    return c;
}

// stable datum on the growing band, normalized in H^5.5
Spectrum stable_datum(const FourierGrid& g, double norm) {
    Spectrum f(g);
    f.set(1, cplx(0.0, 0.5));
    f.set(-1, cplx(0.0, 0.5));
    return cplx(norm / sobolev_norm(f, 5.5)) * f;
}

// two dispersive modes whose difference frequency lies in the growing band
Spectrum center_datum(const FourierGrid& g, double norm) {
    Spectrum f(g);
    f.set(2, cplx(0.5, 0.2));
    f.set(-2, cplx(0.3, -0.1));
    f.set(3, cplx(0.1, 0.3));
    return cplx(norm / sobolev_norm(f, 5.5)) * f;
}

const std::vector<double> kNorms{1e-3, 5e-4, 2.5e-4};

const std::vector<HyperbolicSolution>& stable_family() {
    static const std::vector<HyperbolicSolution> fam = [] {
        FourierGrid g(32);
        std::vector<HyperbolicSolution> out;
        for (double nf : kNorms) out.push_back(solve_stable(stable_datum(g, nf), mconfig()));
        return out;
    }();
    return fam;
}

}  // namespace

TEST_CASE("config validation") {
    auto c = mconfig();
    auto r = resolve(c);
    CHECK(r.weight_a == doctest::Approx(0.5 * growth_rate_min(P)));
    CHECK(std::exp(-growth_rate_min(P) * r.horizon) <= c.tail_tol);
    CHECK(r.dt_lin == doctest::Approx(0.025));
    auto bad = c;
    bad.weight_a = 2.0;
    CHECK_THROWS_AS(resolve(bad), ConfigError);
    bad = c;
    bad.horizon = 5.0;
    CHECK_THROWS_AS(resolve(bad), ConfigError);
    bad = c;
    bad.damping = 0.0;
    CHECK_THROWS_AS(resolve(bad), ConfigError);
    bad = c;
    bad.ext.coords.params.rho = 1.5;
    CHECK_THROWS_AS(resolve(bad), ConfigError);

    FourierGrid g(32);
    CHECK_THROWS_AS(solve_stable(time_reflect(stable_datum(g, 1e-3), P), c), ConfigError);
    CHECK_THROWS_AS(solve_hyperbolic(0, stable_datum(g, 1e-3), c), ConfigError);
    CHECK_THROWS_AS(solve_center(stable_datum(g, 1e-3), cconfig()), ConfigError);
}

TEST_CASE("time reflection swaps stable and unstable subspaces") {
    FourierGrid g(32);
    auto f = stable_datum(g, 1e-3);
    auto jf = time_reflect(f, P);
    CHECK(sobolev_norm(jf - proj_u(jf, P), 5.5) == 0.0);
    auto u = random_spectrum(g, 7, 10);
    CHECK(l2_norm(time_reflect(time_reflect(u, P), P) - u) <= 1e-15 * l2_norm(u));
}

TEST_CASE("zero datum gives the zero solution") {
    FourierGrid g(32);
    auto s = solve_stable(Spectrum(g), mconfig());
    CHECK(s.iterations == 1);
    CHECK(s.residual == 0.0);
    CHECK(sobolev_norm(s.manifold_point, 5.5) == 0.0);
}

TEST_CASE("map at zero remainder is the linear decay") {
    FourierGrid g(32);
    auto rc = resolve(mconfig());
    auto f = stable_datum(g, 1e-3);
    auto times = sample_times(1, rc);
    std::vector<Spectrum> zero(times.size(), Spectrum(g));
    auto out = lp_map(1, times, zero, f, rc);
    for (size_t k = 0; k < times.size(); k += 20) {
        auto want = apply_multiplier([&](int xi) { return cplx(std::exp(-times[k] * lambda_g(xi, P))); }, f);
        CHECK(sobolev_norm(out[k] - want, 5.5) <= 1e-15);
    }
}

TEST_CASE("stable solutions: convergence, decay rate and quadratic tangency") {
    const auto& fam = stable_family();
    const double mu = growth_rate_min(P), lam = growth_rate_max(P);
    std::vector<double> defects;
    for (const auto& s : fam) {
        CHECK(s.iterations <= 30);
        CHECK(s.residual < mconfig().tol);
        for (size_t k = 1; k < s.history.size(); ++k) CHECK(s.history[k] < s.history[k - 1]);
        CHECK(s.fitted_decay >= 0.95 * mu);
        CHECK(s.fitted_decay <= 1.05 * lam);
        CHECK(s.tail_bound <= 1e-8 * sobolev_norm(s.f, 5.5));
        defects.push_back(tangency_defect(s, mconfig()));
    }
    CHECK(fit_slope(kNorms, defects) == doctest::Approx(2.0).epsilon(0.075));
}

TEST_CASE("stable solution follows the physical flow") {
    const auto& s = stable_family().front();
    auto rep = verify_decay_equivalence(s, mconfig(), 0.25 * s.horizon, 0.05);
    CHECK(rep.replay_deviation <= 1e-6);
    CHECK(std::isfinite(rep.poly_weighted_sup));
    CHECK(rep.exp_weighted_sup <= 2.0 * sobolev_norm(s.f, 5.5));
}

TEST_CASE("quadrature refinement is second order") {
    FourierGrid g(32);
    auto f = stable_datum(g, 1e-3);
    std::vector<Spectrum> pts;
    for (double qd : {0.2, 0.1, 0.05}) pts.push_back(solve_stable(f, mconfig(qd)).manifold_point);
    double d1 = sobolev_norm(pts[0] - pts[1], 5.5), d2 = sobolev_norm(pts[1] - pts[2], 5.5);
    CHECK(std::log2(d1 / d2) >= 1.8);
}

TEST_CASE("unstable manifold is the time reflection of the stable one") {
    const auto& s = stable_family().front();
    auto c = mconfig();
    auto su = solve_unstable(time_reflect(s.f, P), c);
    CHECK(su.fitted_decay == doctest::Approx(s.fitted_decay).epsilon(0.01));
    auto want = time_reflect(s.manifold_point, P);
    CHECK(sobolev_norm(su.manifold_point - want, 5.5) <= 1e-4 * tangency_defect(su, c));
    auto rep = verify_decay_equivalence(su, c, 0.25 * su.horizon, 0.05);
    CHECK(rep.replay_deviation <= 1e-6);
}

TEST_CASE("center set: zero datum") {
    FourierGrid g(32);
    auto s = solve_center(Spectrum(g), cconfig());
    CHECK(s.converged);
    CHECK(sobolev_norm(s.g, 5.5) == 0.0);
}

TEST_CASE("center set: hyperbolic part is quadratic in the datum") {
    FourierGrid g(32);
    std::vector<double> gs;
    for (double nf : kNorms) {
        auto s = solve_center(center_datum(g, nf), cconfig());
        REQUIRE(s.converged);
        CHECK(s.in_cone);
        CHECK(std::isfinite(s.cone_ratio));
        for (size_t k = 1; k < s.history.size(); ++k) CHECK(s.history[k] < s.history[k - 1]);
        CHECK(sobolev_norm(s.g - proj_u(s.g, P) - proj_s(s.g, P), 5.5) <= 1e-14 * sobolev_norm(s.g, 5.5));
        gs.push_back(sobolev_norm(s.g, 5.5));
    }
    CHECK(gs.back() > 0.0);
    CHECK(fit_slope(kNorms, gs) == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("center set: lifespan scales like 1/eps") {
    FourierGrid g(32);
    const double c = 0.01;
    std::vector<double> cert;
    for (double nf : {1e-3, 5e-4}) {
        auto rep = lifespan_probe(center_datum(g, nf), cconfig(), 4.0, c / nf, 5.0);
        CHECK_FALSE(rep.exited);
        CHECK(rep.max_jump <= 1e-6 * nf);
        cert.push_back(rep.certified);
    }
    CHECK(cert[1] >= 2.0 * cert[0] * (1.0 - 1e-12));
}

TEST_CASE("center set: off-cone perturbation leaves the ball") {
    FourierGrid g(32);
    auto cfg = cconfig();
    auto f = center_datum(g, 1e-3);
    auto s = solve_center(f, cfg);
    REQUIRE(s.converged);
    Spectrum e(g);
    e.set(1, 0.5);
    e.set(-1, 0.5);
    e = cplx(1e-3 / sobolev_norm(e, 5.5)) * proj_u(e, P);
    auto on = run_extended(s.g + f, 20.0, cfg, false);
    auto off = run_extended(s.g + f + e, 20.0, cfg, false);
    CHECK_FALSE(on.escaped);
    CHECK(off.escaped);
    CHECK(off.exit_time < 10.0);
}
