#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "hypflow/diagnostics.hpp"
#include "hypflow/scenario.hpp"
#include "support/oracles.hpp"

using namespace hypflow;
constexpr double kPi = std::numbers::pi;

namespace {
const BoxGeometry kBox{0.1, 0.15, 0.1, 0.2};
const HyperParams kHp{1.0, 0.4, 0.1};
} // namespace

TEST_CASE("growth_observer: zero field and region monotonicity") {
    VorticityField z(TorusGrid(128));
    auto b = make_velocity_bundle(z);
    GrowthRecord r = growth_observer(z, b, kBox, kHp);
    CHECK(r.M_D == 0.0);
    CHECK(r.M_Dhat == 0.0);
    CHECK(r.sup_grad == 0.0);
    CHECK(r.feeding_residual == 0.0);
    CHECK(r.hyper_margin == doctest::Approx(-kHp.beta0));

    for (unsigned seed : {1u, 2u, 3u, 4u, 5u, 6u, 7u, 8u, 9u, 10u}) {
        auto f = oracle::random_double_odd(128, 4, seed);
        auto rb = growth_observer(f, make_velocity_bundle(f), kBox, kHp);
        CHECK(rb.M_D <= rb.M_Dhat + 1e-14);
    }
}

TEST_CASE("growth_observer maxima match a brute-force analytic region scan") {
    const int n = 256;
    auto f = oracle::eigenfield(n);
    auto b = make_velocity_bundle(f);
    GrowthRecord r = growth_observer(f, b, kBox, kHp);

    // independent oracle: naive scan over the same node lattice with the
    // closed-form gradient of the product-sine datum
    const TorusGrid& g = f.grid();
    const double al = kBox.alpha;
    double mD = 0.0, mDh = 0.0, sg = 0.0, feed = 0.0;
    for (int j = 0; j < n / 2; ++j)
        for (int i = 0; i < n / 2; ++i) {
            double x1 = g.node(g.origin_index() + i), x2 = g.node(g.origin_index() + j);
            if (x1 <= 0.0 || x2 <= 0.0 || x2 >= kBox.delta2) continue;
            double g1 = kPi * std::cos(kPi * x1) * std::sin(kPi * x2);
            double g2 = kPi * std::sin(kPi * x1) * std::cos(kPi * x2);
            double wgt = std::max(std::pow(x1, al) * std::abs(g1), std::pow(x2, al) * std::abs(g2));
            if (x1 < kBox.delta1) {
                mD = std::max(mD, wgt);
                sg = std::max(sg, std::hypot(g1, g2));
            }
            if (x1 < kBox.delta1 + kBox.delta3) mDh = std::max(mDh, wgt);
            if (x1 >= kBox.delta1 && x1 < kBox.delta1 + kBox.delta3)
                feed = std::max(feed, std::max(std::abs(g1) / std::pow(x2, 1.0 - al),
                                               std::abs(g2)));
        }
    CHECK(r.M_D == doctest::Approx(mD).epsilon(1e-4));
    CHECK(r.M_Dhat == doctest::Approx(mDh).epsilon(1e-4));
    CHECK(r.sup_grad == doctest::Approx(sg).epsilon(1e-4));
    CHECK(r.feeding_residual == doctest::Approx(feed).epsilon(1e-4));
    CHECK(std::isfinite(r.feeding_residual));
}

TEST_CASE("growth_observer rejects an under-resolved box") {
    VorticityField z(TorusGrid(64)); // h = 0.03125, delta2 = 0.15 spans 4.8 cells
    auto b = make_velocity_bundle(z);
    CHECK_THROWS_AS(growth_observer(z, b, kBox, kHp), UnderResolvedBox);
}

TEST_CASE("measure_m: plateau bump, degenerate and negative data") {
    ScenarioConfig sc;
    sc.n = 256;
    sc.datum = "bump";
    sc.m_target = 0.64;
    VorticityField f = build_initial(sc);
    auto crit = measure_m(f, 1e-3);
    CHECK(std::abs(crit.m - 0.64) < 0.02 * 0.64); // within 2% of the target

    VorticityField z(TorusGrid(64));
    CHECK_THROWS_AS(measure_m(z, 1e-3), DegenerateField);

    VorticityField neg(TorusGrid(64));
    for (int j = 0; j < 64; ++j)
        for (int i = 0; i < 64; ++i)
            neg.value(i, j) = -std::sin(kPi * neg.grid().node(i)) *
                              std::sin(kPi * neg.grid().node(j));
    CHECK_THROWS_AS(measure_m(neg, 1e-3), PreconditionFailed);

    // eigenfunction: isolated maximum, m ~ single-cell area at tight tolerance
    auto e = oracle::eigenfield(256);
    auto crit_e = measure_m(e, 1e-8);
    CHECK(crit_e.m < 1e-3);
}

TEST_CASE("check_q_upper_bound: degenerate zero field, eigenfunction stability") {
    const int n = 256;
    VorticityField z{TorusGrid(n)};
    auto bz = make_velocity_bundle(z);
    std::vector<Vec2> pts{{0.05, 0.05}, {0.08, 0.1}};
    auto fz = check_q_upper_bound(z, bz, kBox, pts);
    CHECK(fz.degenerate);
    CHECK(fz.constant == 0.0);
    CHECK(fz.pass);

    auto f = oracle::eigenfield(n);
    auto b = make_velocity_bundle(f);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    std::vector<Vec2> sample;
    for (int k = 0; k < 400; ++k)
        sample.push_back({u(rng) * kBox.delta1, u(rng) * kBox.delta2});
    auto fit = check_q_upper_bound(f, b, kBox, sample);
    CHECK(!fit.degenerate);
    CHECK(std::isfinite(fit.constant));
    CHECK(fit.pass);

    // ratio stays bounded approaching the top of the box
    const double h = f.grid().h;
    double prev = 0.0;
    for (double d : {16 * h, 8 * h, 4 * h, 2 * h}) {
        std::vector<Vec2> top{{0.5 * kBox.delta1, kBox.delta2 - d}};
        auto ft = check_q_upper_bound(f, b, kBox, top);
        CHECK(ft.constant < 10.0 * std::max(prev, fit.constant));
        prev = std::max(prev, ft.constant);
    }
    CHECK_THROWS_AS(check_q_upper_bound(f, b, kBox, {{0.5, 0.5}}), InvalidArgument);
}

TEST_CASE("check_coefficient_bounds: gammas validated, stable on the eigenfunction") {
    const int n = 256;
    auto f = oracle::eigenfield(n);
    auto b = make_velocity_bundle(f);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    std::vector<Vec2> sample;
    for (int k = 0; k < 1000; ++k)
        sample.push_back({u(rng) * kBox.delta1, u(rng) * kBox.delta2});

    auto fits = check_coefficient_bounds(f, b, kBox, sample, {0.5, 0.5, 0.5});
    REQUIRE(fits.size() == 3);
    CHECK(fits[0].name == "estc");
    CHECK(fits[1].name == "estb");
    CHECK(fits[2].name == "estxdQ");
    for (const auto& fit : fits) {
        CHECK(std::isfinite(fit.constant));
        CHECK(!fit.degenerate);
        CHECK(fit.pass);
    }

    VorticityField z{TorusGrid(n)};
    auto bz = make_velocity_bundle(z);
    auto zfits = check_coefficient_bounds(z, bz, kBox, {{0.05, 0.05}}, {0.5, 0.5, 0.5});
    for (const auto& fit : zfits) CHECK(fit.degenerate);

    CHECK_THROWS_AS(check_coefficient_bounds(f, b, kBox, sample, {0.5, 0.3, 0.3}),
                    InvalidArgument);
    CHECK_THROWS_AS(check_coefficient_bounds(f, b, kBox, sample, {1.5, 0.5, 0.5}),
                    InvalidArgument);
}

TEST_CASE("envelope fit: planted exponent, stationary series, negative control") {
    // exact exponential: C2 recovered to 1e-6
    std::vector<double> t, g;
    for (int k = 0; k < 60; ++k) {
        t.push_back(k * 0.1);
        g.push_back(std::exp(2.0 * k * 0.1));
    }
    auto fit = exponential_envelope_fit(t, g);
    CHECK(std::abs(fit.C2 - 2.0) < 1e-6);
    CHECK(fit.no_upward_trend);
    CHECK(fit.max_positive_residual < 1e-9);

    // stationary: C2 ~ 0
    std::vector<double> gs(t.size(), 3.25);
    auto fs = exponential_envelope_fit(t, gs);
    CHECK(std::abs(fs.C2) < 1e-4);
    CHECK(fs.no_upward_trend);

    // planted double exponential on [0,3]: residuals trend up, check fails
    std::vector<double> td, gd;
    for (int k = 0; k < 60; ++k) {
        td.push_back(k * 0.05);
        gd.push_back(std::exp(std::exp(k * 0.05)));
    }
    auto fd = exponential_envelope_fit(td, gd);
    CHECK(!fd.no_upward_trend);

    // non-positive samples are excluded with a note
    std::vector<double> gneg = g;
    gneg[5] = 0.0;
    auto fe = exponential_envelope_fit(t, gneg);
    CHECK(fe.excluded == 1);
}

TEST_CASE("feeding monitor: pass, planted violation, measured residual") {
    const int n = 256;
    VorticityField z{TorusGrid(n)};
    auto bz = make_velocity_bundle(z);
    CHECK(feeding_monitor(z, bz, kBox, 0.0).pass);
    CHECK(feeding_monitor(z, bz, kBox, 2.0).pass);
    CHECK_THROWS_AS(feeding_monitor(z, bz, kBox, -1.0), InvalidArgument);

    auto f = oracle::eigenfield(n);
    auto b = make_velocity_bundle(f);
    double R = growth_observer(f, b, kBox, kHp).feeding_residual;
    auto rep = feeding_monitor(f, b, kBox, R);
    CHECK(rep.pass);
    CHECK(rep.worst_ratio == doctest::Approx(1.0).epsilon(1e-6));

    // planted violation: d1 w = 2 R x2^{1-a} at a feeding-zone node
    auto rep2 = feeding_monitor(f, b, kBox, 0.5 * R);
    CHECK(!rep2.pass);
    CHECK(rep2.worst_ratio == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("q lower bound margin: positive for the eigenfunction, fails on zero") {
    const int n = 256;
    auto f = oracle::eigenfield(n);
    auto b = make_velocity_bundle(f);
    GrowthRecord r = growth_observer(f, b, kBox, kHp);
    auto rep = q_lower_bound_check({r});
    CHECK(rep.pass);
    CHECK(rep.min_margin > 0.0);

    VorticityField z{TorusGrid(n)};
    auto bz = make_velocity_bundle(z);
    GrowthRecord rz = growth_observer(z, bz, kBox, kHp);
    auto repz = q_lower_bound_check({rz});
    CHECK(!repz.pass);
    CHECK(repz.min_margin == doctest::Approx(-kHp.beta0));
}

TEST_CASE("diagnostics csv round trip") {
    std::vector<GrowthRecord> recs;
    for (int k = 0; k < 5; ++k)
        recs.push_back({0.1 * k, 1.0 + k, 2.0 + k, 3.0 + k, -0.1 * k, 0.5 * k, 0.42});
    write_diagnostics_csv("diag_test.csv", recs);
    auto back = read_diagnostics_csv("diag_test.csv");
    REQUIRE(back.size() == recs.size());
    for (size_t k = 0; k < recs.size(); ++k) {
        CHECK(back[k].t == recs[k].t);
        CHECK(back[k].M_D == recs[k].M_D);
        CHECK(back[k].hyper_margin == recs[k].hyper_margin);
        CHECK(back[k].q_min_D == recs[k].q_min_D);
    }
    std::remove("diag_test.csv");
}
