#include "hypflow/evolution.hpp"

#include <cmath>
#include <numbers>

#include "hypflow/fft.hpp"

namespace hypflow {

namespace {

constexpr double kPi = std::numbers::pi;

// -omega_t in coefficient space: F[u . grad w], dealiased
std::vector<cplx> advection_coeffs(int n, const std::vector<cplx>& wc, bool dealias_23) {
    std::vector<cplx> w = wc;
    if (dealias_23) dealias(n, w);

    std::vector<cplx> psi(w.size());
    for (int j = 0; j < n; ++j) {
        int m2 = mode_of(j, n);
        for (int i = 0; i < n; ++i) {
            int m1 = mode_of(i, n);
            size_t idx = static_cast<size_t>(j) * n + i;
            double k2 = kPi * kPi * (static_cast<double>(m1) * m1 + static_cast<double>(m2) * m2);
            psi[idx] = (k2 == 0.0) ? cplx(0.0) : w[idx] / k2;
        }
    }
    auto mult_ik = [&](const std::vector<cplx>& c, int axis) {
        std::vector<cplx> out(c.size());
        for (int j = 0; j < n; ++j) {
            int m2 = mode_of(j, n);
            for (int i = 0; i < n; ++i) {
                int m1 = mode_of(i, n);
                int m = (axis == 1) ? m1 : m2;
                size_t idx = static_cast<size_t>(j) * n + i;
                out[idx] = (m == -n / 2) ? cplx(0.0) : c[idx] * cplx(0.0, kPi * m);
            }
        }
        return out;
    };

    auto u1 = fft2_inverse_real(n, mult_ik(psi, 2));
    for (double& v : u1) v = -v;
    auto u2 = fft2_inverse_real(n, mult_ik(psi, 1));
    auto w1 = fft2_inverse_real(n, mult_ik(w, 1));
    auto w2 = fft2_inverse_real(n, mult_ik(w, 2));

    std::vector<double> adv(u1.size());
    for (size_t k = 0; k < adv.size(); ++k) adv[k] = u1[k] * w1[k] + u2[k] * w2[k];
    auto ac = fft2_forward(n, adv);
    if (dealias_23) dealias(n, ac);
    return ac;
}

VorticityField rk4_spectral_step(const VorticityField& f, const StepperConfig& cfg) {
    const int n = f.n();
    const double dt = cfg.dt;
    std::vector<cplx> c0 = f.spectral();

    auto axpy = [&](const std::vector<cplx>& base, double s, const std::vector<cplx>& k) {
        std::vector<cplx> out(base.size());
        for (size_t i = 0; i < out.size(); ++i) out[i] = base[i] + s * k[i];
        return out;
    };

    // k = -F[u . grad w]
    auto rhs = [&](const std::vector<cplx>& c) {
        auto a = advection_coeffs(n, c, cfg.dealias_23);
        for (auto& z : a) z = -z;
        return a;
    };

    auto k1 = rhs(c0);
    auto k2 = rhs(axpy(c0, 0.5 * dt, k1));
    auto k3 = rhs(axpy(c0, 0.5 * dt, k2));
    auto k4 = rhs(axpy(c0, dt, k3));

    std::vector<cplx> cn(c0.size());
    for (size_t i = 0; i < cn.size(); ++i)
        cn[i] = c0[i] + (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);

    VorticityField out(f.grid(), fft2_inverse_real(n, cn), f.time() + dt);
    return out;
}

} // namespace

std::vector<double> advect_sweep(const VorticityField& f, const VelocityBundle& cur,
                                 const VelocityBundle* prev, double dt, ExecPolicy policy) {
    const int n = f.n();
    const TorusGrid& g = f.grid();
    std::vector<double> out(static_cast<size_t>(n) * n);

    auto depart_value = [&](int i, int j) {
        Vec2 xn{g.node(i), g.node(j)};
        size_t idx = static_cast<size_t>(j) * n + i;
        // half step back with the nodal velocity
        Vec2 xm{xn.x - 0.5 * dt * cur.u1[idx], xn.y - 0.5 * dt * cur.u2[idx]};
        // midpoint velocity, extrapolated to t + dt/2 when history exists
        double um1 = cur.interp(cur.u1, xm), um2 = cur.interp(cur.u2, xm);
        if (prev) {
            um1 = 1.5 * um1 - 0.5 * prev->interp(prev->u1, xm);
            um2 = 1.5 * um2 - 0.5 * prev->interp(prev->u2, xm);
        }
        Vec2 dep{xn.x - dt * um1, xn.y - dt * um2};
        return interp_bicubic(g, f.values(), dep);
    };

    if (policy == ExecPolicy::Parallel) {
#pragma omp parallel for schedule(static)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) out[static_cast<size_t>(j) * n + i] = depart_value(i, j);
    } else {
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) out[static_cast<size_t>(j) * n + i] = depart_value(i, j);
    }
    return out;
}

namespace serial {
std::vector<double> advect_sweep(const VorticityField& f, const VelocityBundle& cur,
                                 const VelocityBundle* prev, double dt) {
    return hypflow::advect_sweep(f, cur, prev, dt, ExecPolicy::Serial);
}
} // namespace serial

VorticityField step(const VorticityField& f, const StepperConfig& cfg, const VelocityBundle* prev) {
    VelocityBundle cur = make_velocity_bundle(f);
    double cfl = cfg.dt * cur.max_speed / f.grid().h;
    double limit = (cfg.scheme == Scheme::SemiLagrangian) ? 4.0 * cfg.cfl_limit : cfg.cfl_limit;
    if (cfl > limit) throw StepRejected("step: CFL estimate " + std::to_string(cfl) + " over limit");

    VorticityField next = (cfg.scheme == Scheme::Rk4Spectral)
        ? rk4_spectral_step(f, cfg)
        : VorticityField(f.grid(), advect_sweep(f, cur, prev, cfg.dt, cfg.policy), f.time() + cfg.dt);
    if (cfg.symmetrize_every_step) next = symmetrize(next);
    return next;
}

Stepper::Stepper(VorticityField initial, StepperConfig cfg)
    : state_(std::move(initial)), cfg_(cfg) {
    bundle_ = make_velocity_bundle(state_);
}

void Stepper::advance() {
    double cfl = cfg_.dt * bundle_->max_speed / state_.grid().h;
    double limit = (cfg_.scheme == Scheme::SemiLagrangian) ? 4.0 * cfg_.cfl_limit : cfg_.cfl_limit;
    if (cfl > limit)
        throw StepRejected("Stepper: CFL estimate " + std::to_string(cfl) + " over limit");

    VorticityField next =
        (cfg_.scheme == Scheme::Rk4Spectral)
            ? rk4_spectral_step(state_, cfg_)
            : VorticityField(state_.grid(),
                             advect_sweep(state_, *bundle_, prev_bundle_ ? &*prev_bundle_ : nullptr,
                                          cfg_.dt, cfg_.policy),
                             state_.time() + cfg_.dt);
    if (cfg_.symmetrize_every_step) next = symmetrize(next);
    state_ = std::move(next);
    prev_bundle_ = std::move(bundle_);
    bundle_ = make_velocity_bundle(state_);
    ++steps_;
}

RunStats run(VorticityField& field, StepperConfig cfg, const std::vector<RunObserver>& observers,
             const FrameHook& frame_hook) {
    RunStats stats;
    Stepper st(field, cfg);

    for (const auto& obs : observers)
        if (obs.fn) obs.fn(st.field(), st.bundle(), 0);

    const double t0 = field.time();
    int step_idx = 0;
    while (st.time() < t0 + cfg.t_end - 1e-12) {
        int retries = 0;
        for (;;) {
            try {
                st.advance();
                break;
            } catch (const StepRejected&) {
                if (++retries > cfg.max_step_retries) throw;
                ++stats.rejected;
                StepperConfig halved = st.config();
                halved.dt *= 0.5;
                st = Stepper(st.field(), halved);
            }
        }
        ++step_idx;
        if (frame_hook) frame_hook(st.prev_bundle(), st.bundle());
        for (const auto& obs : observers)
            if (obs.fn && obs.every > 0 && step_idx % obs.every == 0)
                obs.fn(st.field(), st.bundle(), step_idx);
    }
    field = st.field();
    stats.steps = step_idx;
    stats.dt_final = st.config().dt;
    stats.t_final = st.time();
    return stats;
}

} // namespace hypflow
