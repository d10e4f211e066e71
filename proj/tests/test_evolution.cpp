#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "hypflow/evolution.hpp"
#include "hypflow/fft.hpp"
#include "hypflow/scenario.hpp"
#include "support/oracles.hpp"

using namespace hypflow;
constexpr double kPi = std::numbers::pi;

namespace {

double rel_linf(const VorticityField& a, const VorticityField& b) {
    double gap = 0.0, scale = 0.0;
    for (size_t k = 0; k < a.values().size(); ++k) {
        gap = std::max(gap, std::abs(a.values()[k] - b.values()[k]));
        scale = std::max(scale, std::abs(b.values()[k]));
    }
    return gap / std::max(scale, 1e-300);
}

// kinetic energy and enstrophy from the coefficients (torus area 4)
std::pair<double, double> invariants(const VorticityField& f) {
    const int n = f.n();
    const auto& c = f.spectral();
    double e = 0.0, z = 0.0;
    for (int j = 0; j < n; ++j) {
        int m2 = mode_of(j, n);
        for (int i = 0; i < n; ++i) {
            int m1 = mode_of(i, n);
            double k2 = kPi * kPi * (static_cast<double>(m1) * m1 + static_cast<double>(m2) * m2);
            double p = std::norm(c[static_cast<size_t>(j) * n + i]);
            z += p;
            if (k2 > 0.0) e += p / k2;
        }
    }
    return {4.0 * e, 4.0 * z};
}

} // namespace

TEST_CASE("stationary eigenfunction under RK4 drifts only at roundoff") {
    auto f0 = oracle::eigenfield(128);
    StepperConfig cfg;
    cfg.dt = 1e-3;
    cfg.t_end = 0.1;
    VorticityField f = f0;
    RunStats st = run(f, cfg, {});
    CHECK(st.steps == 100);
    CHECK(rel_linf(f, f0) < 1e-9);
    CHECK(symmetry_defect(f) == 0.0);
}

TEST_CASE("zero field stays zero") {
    VorticityField f(TorusGrid(32));
    StepperConfig cfg;
    cfg.dt = 1e-2;
    cfg.t_end = 0.1;
    run(f, cfg, {});
    for (double v : f.values()) CHECK(v == 0.0);
}

TEST_CASE("transport maximum principle at discretization tolerance") {
    auto f = oracle::random_double_odd(128, 4, 77);
    double m0 = f.max_abs();
    StepperConfig cfg;
    cfg.dt = 1e-3;
    cfg.t_end = 0.1;
    run(f, cfg, {});
    CHECK(f.max_abs() <= m0 * (1.0 + 1e-3));
}

TEST_CASE("energy and enstrophy drift below 1e-4 over t in [0,1] (n=256)") {
    auto f = oracle::random_double_odd(256, 5, 101);
    auto [e0, z0] = invariants(f);
    StepperConfig cfg;
    cfg.dt = 1e-3;
    cfg.t_end = 1.0;
    run(f, cfg, {});
    auto [e1, z1] = invariants(f);
    CHECK(std::abs(e1 - e0) / e0 < 1e-4);
    CHECK(std::abs(z1 - z0) / z0 < 1e-4);
}

TEST_CASE("semi-Lagrangian: sign preserved on [0,1]^2 for nonnegative data") {
    ScenarioConfig sc;
    sc.n = 512; // collar spans ~26 cells; interpolation undershoot stays small
    sc.datum = "bump";
    sc.m_target = 0.5;
    VorticityField f = build_initial(sc);

    StepperConfig cfg;
    cfg.scheme = Scheme::SemiLagrangian;
    cfg.dt = 5e-3;
    cfg.t_end = 0.5;
    run(f, cfg, {});

    const int n = f.n(), o = f.grid().origin_index();
    double vmin = 0.0;
    for (int j = 0; j < n / 2; ++j)
        for (int i = 0; i < n / 2; ++i) vmin = std::min(vmin, f.value(o + i, o + j));
    CHECK(vmin >= -1e-3 * 1.0);
    CHECK(symmetry_defect(f) == 0.0);
}

TEST_CASE("semi-Lagrangian stationarity is h^4-accurate per unit time") {
    auto f0 = oracle::eigenfield(128);
    StepperConfig cfg;
    cfg.scheme = Scheme::SemiLagrangian;
    cfg.dt = 2e-3;
    cfg.t_end = 0.2;
    VorticityField f = f0;
    run(f, cfg, {});
    CHECK(rel_linf(f, f0) < 1e-4);
}

TEST_CASE("observer cadence: every 10 steps over 100 steps gives 11 records") {
    auto f = oracle::eigenfield(64);
    StepperConfig cfg;
    cfg.dt = 1e-3;
    cfg.t_end = 0.1;
    int count = 0;
    std::vector<RunObserver> obs;
    obs.push_back({10, [&](const VorticityField&, const VelocityBundle&, int) { ++count; }});
    run(f, cfg, obs);
    CHECK(count == 11);
}

TEST_CASE("zero observers returns the final field only") {
    auto f = oracle::eigenfield(64);
    double t0 = f.time();
    StepperConfig cfg;
    cfg.dt = 1e-2;
    cfg.t_end = 0.05;
    RunStats st = run(f, cfg, {});
    CHECK(st.steps == 5);
    CHECK(f.time() == doctest::Approx(t0 + 0.05));
}

TEST_CASE("eigenfunction run emits constant M_D within 1e-6") {
    auto f = oracle::eigenfield(128);
    BoxGeometry box{0.1, 0.15, 0.1, 0.2};
    HyperParams hp;
    StepperConfig cfg;
    cfg.dt = 1e-3;
    cfg.t_end = 0.05;
    std::vector<double> md;
    std::vector<RunObserver> obs;
    obs.push_back({5, [&](const VorticityField& fld, const VelocityBundle& b, int) {
                       md.push_back(growth_observer(fld, b, box, hp).M_D);
                   }});
    run(f, cfg, obs);
    REQUIRE(md.size() >= 3);
    for (double v : md) CHECK(std::abs(v - md.front()) < 1e-6 * std::max(1.0, md.front()));
}

TEST_CASE("CFL violation raises StepRejected; run() recovers by halving dt") {
    auto f = oracle::eigenfield(64);
    StepperConfig cfg;
    cfg.dt = 10.0; // far over the CFL limit
    CHECK_THROWS_AS((void)step(f, cfg), StepRejected);

    cfg.t_end = 0.4;
    cfg.dt = 0.4; // needs a few halvings: max|u| ~ 0.16, h = 0.03125
    VorticityField g = f;
    RunStats st = run(g, cfg, {});
    CHECK(st.rejected > 0);
    CHECK(st.dt_final < 0.4);
    CHECK(rel_linf(g, f) < 1e-6); // still the stationary datum
}
