// Timing comparison of the serial reference kernels against the OpenMP ones.

#include <chrono>
#include <cstdio>
#include <numbers>

#include "hypflow/biot_savart.hpp"
#include "hypflow/diagnostics.hpp"
#include "hypflow/evolution.hpp"

using namespace hypflow;

namespace {

double now_ms() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double, std::milli>(clock::now().time_since_epoch()).count();
}

VorticityField eigenfield(int n) {
    TorusGrid g(n);
    VorticityField f(g);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            f.value(i, j) =
                std::sin(std::numbers::pi * g.node(i)) * std::sin(std::numbers::pi * g.node(j));
    return f;
}

template <typename Fn>
double time_ms(Fn&& fn, int reps) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        double t0 = now_ms();
        fn();
        best = std::min(best, now_ms() - t0);
    }
    return best;
}

} // namespace

int main() {
    std::printf("threads: %d\n", thread_count());
    std::printf("%-24s %10s %10s %8s\n", "kernel", "serial", "openmp", "speedup");

    for (int n : {256, 512}) {
        VorticityField f = eigenfield(n);
        VelocityBundle b = make_velocity_bundle(f);
        Vec2 probe{0.2, 0.3};

        KernelQuadOptions serial_opts;
        serial_opts.policy = ExecPolicy::Serial;
        double ts = time_ms([&] { (void)serial::q_kernel(f, probe, 4, serial_opts); }, 3);
        double tp = time_ms([&] { (void)q_kernel(f, probe, 4); }, 3);
        std::printf("%-24s %9.2fms %9.2fms %7.2fx\n",
                    ("q_kernel n=" + std::to_string(n)).c_str(), ts, tp, ts / tp);

        PvOptions pvs;
        pvs.policy = ExecPolicy::Serial;
        std::vector<double> radii{8 * f.grid().h, 4 * f.grid().h, 2 * f.grid().h};
        ts = time_ms([&] { (void)dq_principal_value(f, probe, 2, 2, radii, pvs); }, 3);
        PvOptions pvp;
        tp = time_ms([&] { (void)dq_principal_value(f, probe, 2, 2, radii, pvp); }, 3);
        std::printf("%-24s %9.2fms %9.2fms %7.2fx\n",
                    ("pv_derivative n=" + std::to_string(n)).c_str(), ts, tp, ts / tp);

        BoxGeometry box{0.1, 0.15, 0.1, 0.2};
        HyperParams hp;
        ts = time_ms([&] { (void)serial::growth_observer(f, b, box, hp); }, 5);
        tp = time_ms([&] { (void)growth_observer(f, b, box, hp); }, 5);
        std::printf("%-24s %9.2fms %9.2fms %7.2fx\n",
                    ("growth_observer n=" + std::to_string(n)).c_str(), ts, tp, ts / tp);

        ts = time_ms([&] { (void)serial::advect_sweep(f, b, nullptr, 1e-3); }, 5);
        tp = time_ms([&] { (void)advect_sweep(f, b, nullptr, 1e-3, ExecPolicy::Parallel); }, 5);
        std::printf("%-24s %9.2fms %9.2fms %7.2fx\n",
                    ("advect_sweep n=" + std::to_string(n)).c_str(), ts, tp, ts / tp);
    }
    return 0;
}
