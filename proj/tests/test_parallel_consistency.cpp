#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hypflow/biot_savart.hpp"
#include "hypflow/diagnostics.hpp"
#include "hypflow/evolution.hpp"
#include "support/oracles.hpp"

// The OpenMP kernels against their plain serial reference twins.

using namespace hypflow;

TEST_CASE("q_kernel: serial reference vs parallel") {
    auto f = oracle::random_double_odd(128, 4, 301);
    KernelQuadOptions ser;
    ser.policy = ExecPolicy::Serial;
    for (Vec2 p : {Vec2{0.3, 0.4}, Vec2{0.2, 0.7}, Vec2{0.55, 0.15}}) {
        auto a = serial::q_kernel(f, p, 4, ser);
        auto b = q_kernel(f, p, 4);
        CHECK(std::abs(a.q1 - b.q1) <= 1e-13 * std::max(1.0, std::abs(a.q1)));
        CHECK(std::abs(a.q2 - b.q2) <= 1e-13 * std::max(1.0, std::abs(a.q2)));
    }
}

TEST_CASE("dq_principal_value: serial reference vs parallel") {
    auto f = oracle::random_double_odd(128, 4, 302);
    const double h = f.grid().h;
    std::vector<double> radii{6 * h, 3 * h};
    PvOptions ser;
    ser.policy = ExecPolicy::Serial;
    PvOptions par;
    for (int i = 1; i <= 2; ++i)
        for (int j = 1; j <= 2; ++j) {
            auto a = dq_principal_value(f, {0.35, 0.45}, j, i, radii, ser);
            auto b = dq_principal_value(f, {0.35, 0.45}, j, i, radii, par);
            CHECK(std::abs(a.value - b.value) <= 1e-12 * std::max(1.0, std::abs(a.value)));
        }
}

TEST_CASE("growth_observer: serial reference vs parallel (bitwise: max reductions)") {
    auto f = oracle::random_double_odd(256, 5, 303);
    auto b = make_velocity_bundle(f);
    BoxGeometry box{0.1, 0.15, 0.1, 0.2};
    HyperParams hp;
    GrowthRecord rs = serial::growth_observer(f, b, box, hp);
    GrowthRecord rp = growth_observer(f, b, box, hp);
    CHECK(rs.M_D == rp.M_D);
    CHECK(rs.M_Dhat == rp.M_Dhat);
    CHECK(rs.sup_grad == rp.sup_grad);
    CHECK(rs.hyper_margin == rp.hyper_margin);
    CHECK(rs.feeding_residual == rp.feeding_residual);
    CHECK(rs.q_min_D == rp.q_min_D);
}

TEST_CASE("advect_sweep: serial reference vs parallel (bitwise: pure map)") {
    auto f = oracle::random_double_odd(128, 4, 304);
    auto cur = make_velocity_bundle(f);
    auto prev = cur;
    auto a = serial::advect_sweep(f, cur, &prev, 2e-3);
    auto b = advect_sweep(f, cur, &prev, 2e-3, ExecPolicy::Parallel);
    REQUIRE(a.size() == b.size());
    for (size_t k = 0; k < a.size(); ++k) CHECK(a[k] == b[k]);
}
