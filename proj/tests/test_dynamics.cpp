#include <cmath>

#include "doctest.h"
#include "jetstab/dynamics.hpp"
#include "jetstab/errors.hpp"

using namespace jetstab;

namespace {

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

DnoOptions small_dno() {
    DnoOptions o;
    o.n_y = 32;
    return o;
}

double state_norm(const JetState& s) { return l2_norm(to_complex(s)); }

}  // namespace

TEST_CASE("mean curvature") {
    FourierGrid g(32);
    DispersionParams p(0.51);
    auto h0 = mean_curvature(RealField(g), p);
    for (double v : h0.v) CHECK(std::abs(v - 1.0 / 0.51) < 1e-14);

    auto c = RealField::from_function(g, [](double x) { return std::cos(x); });
    std::vector<double> es{1e-2, 5e-3, 2.5e-3, 1.25e-3}, rs;
    for (double e : es) {
        auto h = mean_curvature(e * c, p);
        RealField lin(g);
        for (int j = 0; j < g.size(); ++j) lin.v[j] = 1.0 / 0.51 + e * (1.0 - 1.0 / (0.51 * 0.51)) * c.v[j];
        rs.push_back(l2_norm(h - lin));
    }
    CHECK(std::abs(fit_slope(es, rs) - 2.0) < 0.1);

    auto pinch = RealField::from_function(g, [](double x) { return -0.6 * std::cos(x); });
    CHECK_THROWS_AS(mean_curvature(pinch, p), DomainError);
}

TEST_CASE("equilibrium and linearization") {
    FourierGrid g(32);
    DispersionParams p(0.51);
    auto r = rhs(JetState(g, p), small_dno());
    CHECK(l2_norm(r.deta) < 1e-12);
    CHECK(l2_norm(r.dpsi) < 1e-12);

    auto eta = RealField::from_function(g, [](double x) { return std::cos(x) + 0.5 * std::sin(3 * x); });
    auto psi = RealField::from_function(g, [](double x) { return std::sin(2 * x) - 0.3 * std::cos(x); });
    auto g0 = dno_flat(psi, p);
    auto hp = from_spectrum(apply_multiplier([&](int xi) { return cplx(-hprime0(xi, p)); }, to_spectrum(eta)));
    std::vector<double> es{1e-3, 5e-4, 2.5e-4, 1.25e-4}, rs;
    for (double e : es) {
        auto rr = rhs(JetState(e * eta, e * psi, p), small_dno());
        rs.push_back(l2_norm(rr.deta - e * g0) + l2_norm(rr.dpsi - e * hp));
    }
    CHECK(std::abs(fit_slope(es, rs) - 2.0) < 0.1);
}

TEST_CASE("linear exponential matches the complex-coordinate flow") {
    FourierGrid g(32);
    DispersionParams p(0.51);
    auto eta = RealField::from_function(g, [](double x) { return 1e-3 * (std::cos(x) + std::sin(5 * x)); });
    auto psi = RealField::from_function(g, [](double x) { return 1e-3 * (std::sin(x) + std::cos(4 * x)); });
    JetState s(eta, psi, p);
    Spectrum e1, p1;
    linear_exponential(to_spectrum(eta), to_spectrum(psi), 0.7, p, e1, p1);
    auto viaz = from_complex(linear_flow(to_complex(s), 0.7, p), p);
    CHECK(l2_norm(from_spectrum(e1) - viaz.eta) < 1e-14);
    CHECK(l2_norm(from_spectrum(p1) - viaz.psi) < 1e-14);
}

TEST_CASE("zero state stays zero") {
    FourierGrid g(32);
    DispersionParams p(0.51);
    IntegratorConfig cfg;
    cfg.dt = 0.1;
    cfg.t_end = 1.0;
    cfg.dno = small_dno();
    auto tr = simulate(JetState(g, p), cfg);
    CHECK(tr.status == RunStatus::ok);
    CHECK(tr.samples.size() == 11u);
    for (auto& s : tr.samples) {
        CHECK(l2_norm(s.state.eta) == 0.0);
        CHECK(l2_norm(s.state.psi) == 0.0);
    }
}

TEST_CASE("dispersive seed keeps its norm") {
    // rho = 0.83: roundoff in the single growing mode is amplified by exp(50 Lambda_g) ~ 1e9,
    // which stays far below the tolerance (at rho = 0.51 the factor is 1e18)
    FourierGrid g(32);
    DispersionParams p(0.83);
    auto s0 = growth_seed(g, p, 4, 1e-6);
    IntegratorConfig cfg;
    cfg.dt = 0.1;
    cfg.t_end = 50.0;
    cfg.snapshot_stride = 50;
    cfg.dno = small_dno();
    auto tr = simulate(s0, cfg);
    REQUIRE(tr.status == RunStatus::ok);
    double n0 = state_norm(s0);
    for (auto& s : tr.samples) CHECK(std::abs(state_norm(s.state) - n0) <= 1e-3 * n0);
    CHECK(tr.samples.back().t == doctest::Approx(50.0));
}

TEST_CASE("fourth-order self-convergence in dt") {
    FourierGrid g(32);
    DispersionParams p(0.51);
    auto eta = RealField::from_function(g, [](double x) { return 0.05 * std::cos(x) + 0.02 * std::cos(3 * x); });
    auto psi = RealField::from_function(g, [](double x) { return 0.03 * std::sin(2 * x); });
    JetState s0(eta, psi, p);
    auto run = [&](double dt) {
        JetState s = s0;
        long n = std::lround(1.0 / dt);
        for (long i = 0; i < n; ++i) s = step(s, dt, small_dno());
        return s;
    };
    auto ref = run(1.0 / 512);
    std::vector<double> errs;
    for (double dt : {1.0 / 32, 1.0 / 64, 1.0 / 128}) {
        auto s = run(dt);
        errs.push_back(l2_norm(s.eta - ref.eta) + l2_norm(s.psi - ref.psi));
    }
    for (size_t i = 0; i + 1 < errs.size(); ++i) {
        double ratio = errs[i] / errs[i + 1];
        CHECK(ratio > 16.0 * 0.7);
        CHECK(ratio < 16.0 * 1.3);
    }
}

TEST_CASE("flux stays at discretization level along a trajectory") {
    FourierGrid g(32);
    DispersionParams p(0.51);
    auto s0 = growth_seed(g, p, 1, 1e-3);
    IntegratorConfig cfg;
    cfg.dt = 0.1;
    cfg.t_end = 3.0;
    cfg.snapshot_stride = 10;
    cfg.dno.n_y = 64;
    auto tr = simulate(s0, cfg);
    for (auto& s : tr.samples) CHECK(std::abs(s.diag.flux) < 1e-8);
}

TEST_CASE("growth fit on a coarse grid") {
    DispersionParams p(0.51);
    GrowthScanConfig cfg;
    cfg.n_modes = 32;
    cfg.dno.n_y = 32;
    cfg.dt = 0.1;
    cfg.t_end_dispersive = 10.0;
    auto rows = growth_scan(p, {1, 3}, cfg);
    CHECK(std::abs(rows[0].omega_measured - lambda_g(1, p)) < 0.01 * lambda_g(1, p));
    CHECK(!rows[0].flagged);
    CHECK(rows[1].omega_measured == 0.0);
    CHECK(rows[1].omega_rayleigh == 0.0);

    // time reversal: the same eigenvector decays backward at the same rate
    auto back = growth_fit(p, 1, cfg, -1.0);
    CHECK(std::abs(back.omega_measured - lambda_g(1, p)) < 0.01 * lambda_g(1, p));
}

TEST_CASE("large deformation pinches off") {
    FourierGrid g(32);
    DispersionParams p(0.51);
    auto s0 = growth_seed(g, p, 1, 0.2);
    IntegratorConfig cfg;
    cfg.dt = 0.01;
    cfg.t_end = 20.0;
    cfg.snapshot_stride = 100;
    cfg.dno = small_dno();
    auto tr = simulate(s0, cfg);
    CHECK(tr.status == RunStatus::pinch_off);
    REQUIRE(!tr.samples.empty());
    CHECK(tr.samples.back().t < 20.0);

    auto bad = growth_seed(g, p, 1, 0.9);
    auto tb = simulate(bad, cfg);
    CHECK(tb.status == RunStatus::pinch_off);
    CHECK(tb.samples.empty());
}

TEST_CASE("invalid integrator settings") {
    FourierGrid g(32);
    DispersionParams p(0.51);
    IntegratorConfig cfg;
    cfg.dt = 0.0;
    CHECK_THROWS_AS(simulate(JetState(g, p), cfg), ConfigError);
}
