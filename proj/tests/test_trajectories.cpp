#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "hypflow/trajectories.hpp"
#include "support/oracles.hpp"

using namespace hypflow;
constexpr double kPi = std::numbers::pi;

namespace {

// frozen affine hyperbolic flow u = (-q x1, q x2)
SyntheticProbe constant_q_probe(double q, double t0, double t1) {
    return SyntheticProbe(
        [q](Vec2, double, FlowSample& s) {
            s.q1 = q;
            s.q2 = q;
            s.a1 = q;
            s.a2 = q;
            s.b = 0.0;
            s.c = 0.0;
            s.u1 = 0.0; // filled by the caller through q (structural form)
            s.u2 = 0.0;
        },
        t0, t1);
}

const BoxGeometry kBox{0.1, 0.15, 0.1, 0.2};

} // namespace

TEST_CASE("box geometry validation") {
    CHECK_THROWS_AS((BoxGeometry{0.2, 0.1, 0.3, 0.2}.validate()), InvalidArgument);
    CHECK_THROWS_AS((BoxGeometry{0.1, 0.5, 0.1, 0.2}.validate()), InvalidArgument); // d2 > d1+d3
    CHECK_THROWS_AS((BoxGeometry{0.1, 0.15, 0.1, 0.3}.validate()), InvalidArgument); // alpha
    BoxGeometry ok{0.02, 0.04, 0.05, 0.2};
    ok.validate();
    CHECK(ok.top_distance({0.01, 0.01}) == doctest::Approx(0.03));
    CHECK(ok.axis_distance({0.01, 0.03}) == doctest::Approx(0.01));
}

TEST_CASE("phi profile satisfies its constraints") {
    for (double s : {0.0, 0.1, 0.5, 0.9, 1.0, 2.0, 10.0}) {
        CHECK(phi_profile(s) <= 1.0 - std::exp(-s) + 1e-15);
        CHECK(phi_profile(s) >= 0.0);
    }
    CHECK(phi_profile(0.5) == doctest::Approx(0.5 * (1.0 - std::exp(-1.0))));
    CHECK(phi_profile(3.0) == doctest::Approx(1.0 - std::exp(-1.0))); // constant past s* = 1
}

TEST_CASE("constant-Q flow: exponential trajectory to 1e-8") {
    const double q = 0.7;
    auto probe = constant_q_probe(q, 0.0, 5.0); // exit at log(8)/q ~ 2.97
    Vec2 start{0.05, kBox.delta2 / 8.0};
    Trajectory traj = trace(probe, kBox, start, 0.0);
    REQUIRE(traj.entered);
    CHECK(traj.T0 == 0.0);
    REQUIRE(traj.closed);
    CHECK(traj.exit_side == "top");
    for (const auto& p : traj.samples) {
        if (p.t > traj.Te) continue;
        double exact = start.y * std::exp(q * p.t);
        CHECK(std::abs(p.x2 - exact) <= 1e-8 * std::max(1.0, exact));
    }
    // exit when X2 reaches delta2: Te = log(8)/q
    CHECK(traj.Te == doctest::Approx(std::log(8.0) / q).epsilon(1e-7));
    // representation residual is tiny for constant coefficients
    CHECK(verify_representation(traj) < 1e-10);
}

TEST_CASE("axis invariance: X2 = 0 stays exactly zero") {
    const int n = 128;
    auto f = oracle::eigenfield(n);
    std::vector<VelocityBundle> frames;
    for (double t : {0.0, 1.0}) {
        auto b = make_velocity_bundle(f);
        b.t = t;
        frames.push_back(std::move(b));
    }
    BundleSeriesProbe probe(std::move(frames));
    Trajectory traj = trace(probe, kBox, {0.08, 0.0}, 0.0);
    REQUIRE(traj.samples.size() > 5);
    for (const auto& p : traj.samples) CHECK(p.x2 == 0.0);
    // X1 strictly decreasing toward the origin, never exits through the top
    for (size_t k = 1; k < traj.samples.size(); ++k)
        CHECK(traj.samples[k].x1 < traj.samples[k - 1].x1);
    CHECK(!traj.closed);
    CHECK(traj.exit_side == "none");
}

TEST_CASE("start on the top boundary exits immediately") {
    auto probe = constant_q_probe(0.5, 0.0, 1.0);
    Trajectory traj = trace(probe, kBox, {0.05, kBox.delta2}, 0.0);
    CHECK(traj.closed);
    CHECK(traj.Te == 0.0);
    CHECK(traj.exit_side == "top");
}

TEST_CASE("feeding-zone start enters through the right edge") {
    auto probe = constant_q_probe(0.6, 0.0, 6.0);
    Vec2 start{kBox.delta1 + 0.5 * kBox.delta3, kBox.delta2 / 16.0};
    Trajectory traj = trace(probe, kBox, start, 0.0);
    REQUIRE(traj.entered);
    // entry when X1 decays to delta1: T0 = log(start.x / delta1) / q
    CHECK(traj.T0 == doctest::Approx(std::log(start.x / kBox.delta1) / 0.6).epsilon(1e-6));
    CHECK(std::abs(traj.coeffs.front().x1 - kBox.delta1) < 1e-7);
    CHECK(traj.closed);
}

TEST_CASE("zero flow: trajectory constant, residual zero, open") {
    auto probe = constant_q_probe(0.0, 0.0, 1.0);
    Trajectory traj = trace(probe, kBox, {0.05, 0.05}, 0.0);
    CHECK(!traj.closed);
    for (const auto& p : traj.samples) {
        CHECK(p.x1 == doctest::Approx(0.05).epsilon(1e-12));
        CHECK(p.x2 == doctest::Approx(0.05).epsilon(1e-12));
    }
    CHECK(verify_representation(traj) < 1e-12);
}

TEST_CASE("exit-time bound: synthetic flow leaves in exactly log(2)/beta") {
    const double beta = 0.8;
    auto probe = constant_q_probe(beta, 0.0, 5.0);
    Vec2 start{0.05, 0.5 * kBox.delta2};
    Trajectory traj = trace(probe, kBox, start, 0.0);
    REQUIRE(traj.closed);
    REQUIRE(traj.T1.has_value());
    CHECK(*traj.T1 == 0.0);
    CHECK(traj.Te == doctest::Approx(std::log(2.0) / beta).epsilon(1e-7));

    ExitTimeReport rep = exit_time_bound_check(traj, kBox, beta, true, 1e-3);
    CHECK(rep.t1_exists);
    CHECK(rep.bound_ok);
    CHECK(rep.dichotomy_case == 1);
    CHECK(rep.dichotomy_ok);
    CHECK(rep.te_minus_t1 == doctest::Approx(std::log(2.0) / beta).epsilon(1e-6));

    CHECK_THROWS_AS(exit_time_bound_check(traj, kBox, beta, false, 1e-3),
                    PreconditionNotChecked);
    CHECK_THROWS_AS(exit_time_bound_check(traj, kBox, 0.0, true, 1e-3), PreconditionNotChecked);
}

TEST_CASE("no-T1 trajectory reports dichotomy case 2 vacuously") {
    auto probe = constant_q_probe(0.3, 0.0, 0.5); // short horizon, stays low
    Vec2 start{0.05, kBox.delta2 / 16.0};
    Trajectory traj = trace(probe, kBox, start, 0.0);
    CHECK(!traj.T1.has_value());
    CHECK(!traj.closed);
    ExitTimeReport rep = exit_time_bound_check(traj, kBox, 0.3, true, 1e-3);
    CHECK(!rep.t1_exists);
    CHECK(rep.dichotomy_case == 2);
    CHECK(rep.dichotomy_ok);
    CHECK(rep.bound_ok);
}

TEST_CASE("phi distance estimate and entry-height bound on synthetic flow") {
    const double q = 0.9;
    auto probe = constant_q_probe(q, 0.0, 8.0);
    for (double h0 : {0.5, 0.25, 0.06125}) {
        Trajectory traj = trace(probe, kBox, {0.05, h0 * kBox.delta2}, 0.0);
        REQUIRE(traj.closed);
        CHECK(phi_distance_violation(traj, kBox) <= 1e-6);
        CHECK(key_lemma_violation(traj, kBox) <= 1e-6);
    }
}

TEST_CASE("seed layouts are deterministic and match their specification") {
    BoxGeometry box{0.02, 0.04, 0.05, 0.2};
    auto single = seed_tracers(box, TracerLayout::Grid, 1);
    REQUIRE(single.size() == 1);
    CHECK(single[0].x == doctest::Approx(0.5 * (box.delta1 + box.delta3)));
    CHECK(single[0].y == doctest::Approx(0.5 * box.delta2));

    auto edge = seed_tracers(box, TracerLayout::FeedingEdge, 4);
    REQUIRE(edge.size() == 4);
    for (int k = 1; k <= 4; ++k) {
        CHECK(edge[k - 1].x == box.delta1 + box.delta3);
        CHECK(edge[k - 1].y == doctest::Approx(box.delta2 * std::pow(2.0, -k)));
    }

    auto a = seed_tracers(box, TracerLayout::Grid, 7);
    auto b = seed_tracers(box, TracerLayout::Grid, 7);
    REQUIRE(a.size() == b.size());
    for (size_t k = 0; k < a.size(); ++k) {
        CHECK(a[k].x == b[k].x); // bitwise reproducible
        CHECK(a[k].y == b[k].y);
    }
    CHECK_THROWS_AS(seed_tracers(box, TracerLayout::Grid, 0), InvalidArgument);
}

TEST_CASE("trace rejects starts outside closure(Dhat) and bad spans") {
    auto probe = constant_q_probe(0.5, 0.0, 1.0);
    CHECK_THROWS_AS(trace(probe, kBox, {0.5, 0.05}, 0.0), InvalidArgument);
    CHECK_THROWS_AS(trace(probe, kBox, {0.05, 0.05}, 2.0), InvalidArgument);
}
