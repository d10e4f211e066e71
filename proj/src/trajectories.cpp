#include "hypflow/trajectories.hpp"

#include <algorithm>
#include <cmath>

namespace hypflow {

namespace {
constexpr double kAxisEps = 1e-12;
constexpr double kTiny = 1e-300;
} // namespace

FlowSample flow_sample_from_bundle(const VelocityBundle& b, Vec2 x) {
    FlowSample s;
    s.u1 = b.interp(b.u1, x);
    s.u2 = b.interp(b.u2, x);
    const double d11 = b.interp(b.du11, x);
    const double d12 = b.interp(b.du12, x);
    const double d21 = b.interp(b.du21, x);
    const double d22 = b.interp(b.du22, x);
    s.q1 = (std::abs(x.x) < kAxisEps) ? -d11 : -s.u1 / x.x;
    s.q2 = (std::abs(x.y) < kAxisEps) ? d22 : s.u2 / x.y;
    s.a1 = -d11;
    s.a2 = d22;
    s.b = -d12;
    s.c = -d21;
    s.gw1 = b.grad_w1(x);
    s.gw2 = b.grad_w2(x);
    return s;
}

FlowSample BundleWindowProbe::at(Vec2 x, double t) const {
    FlowSample lo = flow_sample_from_bundle(*lo_, x);
    if (hi_ == lo_ || hi_->t <= lo_->t) return lo;
    FlowSample hi = flow_sample_from_bundle(*hi_, x);
    double th = std::clamp((t - lo_->t) / (hi_->t - lo_->t), 0.0, 1.0);
    FlowSample s;
    auto mix = [th](double a, double b) { return (1.0 - th) * a + th * b; };
    s.u1 = mix(lo.u1, hi.u1);
    s.u2 = mix(lo.u2, hi.u2);
    s.q1 = mix(lo.q1, hi.q1);
    s.q2 = mix(lo.q2, hi.q2);
    s.a1 = mix(lo.a1, hi.a1);
    s.a2 = mix(lo.a2, hi.a2);
    s.b = mix(lo.b, hi.b);
    s.c = mix(lo.c, hi.c);
    s.gw1 = mix(lo.gw1, hi.gw1);
    s.gw2 = mix(lo.gw2, hi.gw2);
    return s;
}

BundleSeriesProbe::BundleSeriesProbe(std::vector<VelocityBundle> bundles)
    : bundles_(std::move(bundles)) {
    if (bundles_.empty()) throw InvalidArgument("BundleSeriesProbe: empty series");
}

FlowSample BundleSeriesProbe::at(Vec2 x, double t) const {
    if (bundles_.size() == 1 || t <= bundles_.front().t)
        return flow_sample_from_bundle(bundles_.front(), x);
    if (t >= bundles_.back().t) return flow_sample_from_bundle(bundles_.back(), x);
    size_t hi = 1;
    while (hi + 1 < bundles_.size() && bundles_[hi].t < t) ++hi;
    BundleWindowProbe w(&bundles_[hi - 1], &bundles_[hi]);
    return w.at(x, t);
}

// --- adaptive Dormand-Prince 5(4) --------------------------------------------

namespace {

// characteristic velocity in the structural form (-x1 Q1, x2 Q2): identical
// to u off the axes and exactly zero on them, so the axes are invariant
inline Vec2 char_velocity(const FlowProbe& probe, Vec2 x, double t) {
    FlowSample s = probe.at(x, t);
    return Vec2{-x.x * s.q1, x.y * s.q2};
}

struct DP45 {
    // returns error-norm <= 1 on acceptance; fills x_new
    static bool step(const FlowProbe& probe, double t, Vec2 x, double dt, Vec2& x_new,
                     double& err_norm, double rel_tol, double abs_tol) {
        auto f = [&](double tt, Vec2 xx) { return char_velocity(probe, xx, tt); };
        const Vec2 k1 = f(t, x);
        const Vec2 k2 = f(t + dt / 5.0, {x.x + dt * 0.2 * k1.x, x.y + dt * 0.2 * k1.y});
        const Vec2 k3 = f(t + 3.0 * dt / 10.0, {x.x + dt * (3.0 / 40 * k1.x + 9.0 / 40 * k2.x),
                                                x.y + dt * (3.0 / 40 * k1.y + 9.0 / 40 * k2.y)});
        const Vec2 k4 = f(t + 4.0 * dt / 5.0,
                          {x.x + dt * (44.0 / 45 * k1.x - 56.0 / 15 * k2.x + 32.0 / 9 * k3.x),
                           x.y + dt * (44.0 / 45 * k1.y - 56.0 / 15 * k2.y + 32.0 / 9 * k3.y)});
        const Vec2 k5 =
            f(t + 8.0 * dt / 9.0,
              {x.x + dt * (19372.0 / 6561 * k1.x - 25360.0 / 2187 * k2.x + 64448.0 / 6561 * k3.x -
                           212.0 / 729 * k4.x),
               x.y + dt * (19372.0 / 6561 * k1.y - 25360.0 / 2187 * k2.y + 64448.0 / 6561 * k3.y -
                           212.0 / 729 * k4.y)});
        const Vec2 k6 =
            f(t + dt, {x.x + dt * (9017.0 / 3168 * k1.x - 355.0 / 33 * k2.x +
                                   46732.0 / 5247 * k3.x + 49.0 / 176 * k4.x -
                                   5103.0 / 18656 * k5.x),
                       x.y + dt * (9017.0 / 3168 * k1.y - 355.0 / 33 * k2.y +
                                   46732.0 / 5247 * k3.y + 49.0 / 176 * k4.y -
                                   5103.0 / 18656 * k5.y)});
        x_new = {x.x + dt * (35.0 / 384 * k1.x + 500.0 / 1113 * k3.x + 125.0 / 192 * k4.x -
                             2187.0 / 6784 * k5.x + 11.0 / 84 * k6.x),
                 x.y + dt * (35.0 / 384 * k1.y + 500.0 / 1113 * k3.y + 125.0 / 192 * k4.y -
                             2187.0 / 6784 * k5.y + 11.0 / 84 * k6.y)};
        const Vec2 k7 = f(t + dt, x_new);
        const double e1 = dt * ((35.0 / 384 - 5179.0 / 57600) * k1.x +
                                (500.0 / 1113 - 7571.0 / 16695) * k3.x +
                                (125.0 / 192 - 393.0 / 640) * k4.x +
                                (-2187.0 / 6784 + 92097.0 / 339200) * k5.x +
                                (11.0 / 84 - 187.0 / 2100) * k6.x - k7.x / 40.0);
        const double e2 = dt * ((35.0 / 384 - 5179.0 / 57600) * k1.y +
                                (500.0 / 1113 - 7571.0 / 16695) * k3.y +
                                (125.0 / 192 - 393.0 / 640) * k4.y +
                                (-2187.0 / 6784 + 92097.0 / 339200) * k5.y +
                                (11.0 / 84 - 187.0 / 2100) * k6.y - k7.y / 40.0);
        double s1 = e1 / (abs_tol + rel_tol * std::abs(x_new.x));
        double s2 = e2 / (abs_tol + rel_tol * std::abs(x_new.y));
        err_norm = std::sqrt(0.5 * (s1 * s1 + s2 * s2));
        return err_norm <= 1.0;
    }
};

// accurate re-integration for event bisection
Vec2 integrate_to(const FlowProbe& probe, double t_from, Vec2 x_from, double t_to, int sub = 16) {
    double dt = (t_to - t_from) / sub;
    Vec2 x = x_from;
    double t = t_from;
    auto f = [&](double tt, Vec2 xx) { return char_velocity(probe, xx, tt); };
    for (int k = 0; k < sub; ++k) {
        Vec2 k1 = f(t, x);
        Vec2 k2 = f(t + dt / 2, {x.x + dt / 2 * k1.x, x.y + dt / 2 * k1.y});
        Vec2 k3 = f(t + dt / 2, {x.x + dt / 2 * k2.x, x.y + dt / 2 * k2.y});
        Vec2 k4 = f(t + dt, {x.x + dt * k3.x, x.y + dt * k3.y});
        x = {x.x + dt / 6 * (k1.x + 2 * k2.x + 2 * k3.x + k4.x),
             x.y + dt / 6 * (k1.y + 2 * k2.y + 2 * k3.y + k4.y)};
        t += dt;
    }
    return x;
}

// bisect the crossing time of pred (false at t_lo, true at t_hi)
double bisect_event(const FlowProbe& probe, double t_lo, Vec2 x_lo, double t_hi,
                    const std::function<bool(Vec2)>& pred, double pos_tol, Vec2& x_event) {
    double lo = t_lo, hi = t_hi;
    Vec2 x_at_lo = x_lo;
    for (int it = 0; it < 80; ++it) {
        double mid = 0.5 * (lo + hi);
        Vec2 xm = integrate_to(probe, lo, x_at_lo, mid);
        if (pred(xm)) {
            hi = mid;
        } else {
            lo = mid;
            x_at_lo = xm;
        }
        Vec2 x_hi_now = integrate_to(probe, lo, x_at_lo, hi);
        if (std::hypot(x_hi_now.x - x_at_lo.x, x_hi_now.y - x_at_lo.y) < pos_tol) break;
    }
    x_event = integrate_to(probe, lo, x_at_lo, hi);
    return hi;
}

} // namespace

TracerIntegrator::TracerIntegrator(const BoxGeometry& box, Vec2 start, double t_start,
                                   const TraceOptions& opts)
    : box_(box), opts_(opts), x_(start), t_(t_start) {
    box_.validate();
    if (!box_.in_Dhat_closure(start))
        throw InvalidArgument("TracerIntegrator: start must lie in closure(Dhat)");
    traj_.start = start;
    traj_.t_start = t_start;
    if (box_.in_D_closure(start)) {
        traj_.entered = true;
        inside_ = true;
        traj_.T0 = t_start;
        if (start.y >= 0.5 * box_.delta2) traj_.T1 = t_start;
    }
    traj_.samples.push_back({t_start, start.x, start.y});
}

void TracerIntegrator::record(const FlowProbe& probe, double t, Vec2 x) {
    traj_.samples.push_back({t, x.x, x.y});
    if (inside_) {
        FlowSample s = probe.at(x, t);
        traj_.coeffs.push_back({t, x.x, x.y, s.q1, s.q2, s.a1, s.a2, s.b, s.c, s.gw1, s.gw2});
    }
}

void TracerIntegrator::handle_events(const FlowProbe& probe, double t_prev, Vec2 x_prev, double t,
                                     Vec2 x) {
    if (!inside_ && !done_) {
        if (box_.in_D_closure(x)) {
            Vec2 xe;
            double te = bisect_event(
                probe, t_prev, x_prev, t, [&](Vec2 p) { return box_.in_D_closure(p); },
                opts_.event_tol, xe);
            traj_.entered = true;
            traj_.T0 = te;
            inside_ = true;
            traj_.samples.push_back({te, xe.x, xe.y});
            FlowSample s = probe.at(xe, te);
            traj_.coeffs.push_back(
                {te, xe.x, xe.y, s.q1, s.q2, s.a1, s.a2, s.b, s.c, s.gw1, s.gw2});
            if (xe.y >= 0.5 * box_.delta2) traj_.T1 = te;
            // continue below in case the same step also exits
            x_prev = xe;
            t_prev = te;
        } else {
            return;
        }
    }
    if (inside_ && !traj_.T1 && x.y >= 0.5 * box_.delta2) {
        Vec2 xe;
        double te = bisect_event(
            probe, t_prev, x_prev, t, [&](Vec2 p) { return p.y >= 0.5 * box_.delta2; },
            opts_.event_tol, xe);
        traj_.T1 = te;
    }
    if (inside_ && !box_.in_D_closure(x)) {
        Vec2 xe;
        double te = bisect_event(
            probe, t_prev, x_prev, t, [&](Vec2 p) { return !box_.in_D_closure(p); },
            opts_.event_tol, xe);
        traj_.Te = te;
        traj_.closed = true;
        done_ = true;
        double top_gap = std::abs(xe.y - box_.delta2);
        double right_gap = std::abs(xe.x - box_.delta1);
        traj_.exit_side = (top_gap <= right_gap) ? "top" : "right";
        traj_.samples.push_back({te, xe.x, xe.y});
        FlowSample s = probe.at(xe, te);
        traj_.coeffs.push_back({te, xe.x, xe.y, s.q1, s.q2, s.a1, s.a2, s.b, s.c, s.gw1, s.gw2});
    }
}

void TracerIntegrator::advance_through(const FlowProbe& probe, double t_to) {
    if (done_) return;

    // boundary start moving outward exits immediately
    if (inside_ && traj_.samples.size() == 1) {
        FlowSample s = probe.at(x_, t_);
        Vec2 v = char_velocity(probe, x_, t_);
        bool exits_top = std::abs(x_.y - box_.delta2) < kAxisEps && v.y > 0.0;
        bool exits_right = std::abs(x_.x - box_.delta1) < kAxisEps && v.x > 0.0;
        if (exits_top || exits_right) {
            traj_.Te = t_;
            traj_.closed = true;
            traj_.exit_side = exits_top ? "top" : "right";
            traj_.coeffs.push_back(
                {t_, x_.x, x_.y, s.q1, s.q2, s.a1, s.a2, s.b, s.c, s.gw1, s.gw2});
            done_ = true;
            return;
        }
        // seed the coefficient path with the start sample
        traj_.coeffs.push_back({t_, x_.x, x_.y, s.q1, s.q2, s.a1, s.a2, s.b, s.c, s.gw1, s.gw2});
    }

    double dt = opts_.max_step;
    while (!done_ && t_ < t_to - 1e-14) {
        Vec2 v0 = char_velocity(probe, x_, t_);
        double speed = std::hypot(v0.x, v0.y);
        double cap = opts_.max_step;
        if (x_.x <= 2.0 * (box_.delta1 + box_.delta3) && x_.y <= 2.0 * box_.delta2)
            cap = std::min(cap, box_.delta2 / (8.0 * std::max(speed, kTiny)));
        dt = std::min({dt, cap, t_to - t_});

        Vec2 x_new;
        double err = 0.0;
        int attempts = 0;
        while (!DP45::step(probe, t_, x_, dt, x_new, err, opts_.rel_tol, opts_.abs_tol)) {
            dt *= std::clamp(0.9 * std::pow(std::max(err, 1e-16), -0.2), 0.2, 1.0);
            if (++attempts > 40) break;
        }
        double t_new = t_ + dt;
        handle_events(probe, t_, x_, t_new, x_new);
        if (done_) return;
        record(probe, t_new, x_new);
        x_ = x_new;
        t_ = t_new;
        dt *= std::clamp(0.9 * std::pow(std::max(err, 1e-16), -0.2), 0.2, 5.0);
    }
}

void TracerIntegrator::finish_open(double horizon) {
    if (done_) return;
    traj_.Te = horizon;
    traj_.closed = false;
    traj_.exit_side = "none";
    done_ = true;
}

Trajectory trace(const FlowProbe& probe, const BoxGeometry& box, Vec2 start, double t_start,
                 const TraceOptions& opts) {
    if (t_start < probe.t_begin() - 1e-12 || t_start > probe.t_end() + 1e-12)
        throw InvalidArgument("trace: t_start outside the probe's span");
    TracerIntegrator tr(box, start, t_start, opts);
    tr.advance_through(probe, probe.t_end());
    if (!tr.done()) tr.finish_open(probe.t_end());
    return tr.trajectory();
}

// --- checks -------------------------------------------------------------------

double verify_representation(const Trajectory& traj) {
    const auto& cs = traj.coeffs;
    if (!traj.entered || cs.size() < 2) return 0.0;
    double worst = 0.0;
    double I1 = 0.0, I2 = 0.0;
    const double x10 = cs.front().x1, x20 = cs.front().x2;
    for (size_t k = 1; k < cs.size(); ++k) {
        double dt = cs[k].t - cs[k - 1].t;
        I1 += 0.5 * dt * (cs[k].q1 + cs[k - 1].q1);
        I2 += 0.5 * dt * (cs[k].q2 + cs[k - 1].q2);
        double rep1 = x10 * std::exp(-I1);
        double rep2 = x20 * std::exp(I2);
        worst = std::max(worst, std::abs(cs[k].x1 - rep1) / std::max(std::abs(cs[k].x1), kTiny));
        worst = std::max(worst, std::abs(cs[k].x2 - rep2) / std::max(std::abs(cs[k].x2), kTiny));
    }
    return worst;
}

ExitTimeReport exit_time_bound_check(const Trajectory& traj, const BoxGeometry& box, double beta,
                                     bool hyperbolicity_checked, double dt_slack) {
    if (!hyperbolicity_checked || !(beta > 0.0))
        throw PreconditionNotChecked(
            "exit_time_bound_check: beta-hyperbolicity must be verified first");
    ExitTimeReport rep;
    const double half = 0.5 * box.delta2;
    const double tol = 1e-9 + 10.0 * 1e-8;
    if (traj.T1) {
        rep.t1_exists = true;
        rep.te_minus_t1 = traj.Te - *traj.T1;
        rep.bound = std::log(2.0) / beta + 2.0 * dt_slack;
        // for open trajectories Te is the horizon; the residence bound still
        // applies to the time spent above delta2/2 so far
        rep.bound_ok = rep.te_minus_t1 <= rep.bound;
        rep.dichotomy_case = 1;
        for (const auto& p : traj.samples)
            if (p.t >= *traj.T1 && p.t <= traj.Te && p.x2 < half - tol) rep.dichotomy_ok = false;
    } else {
        rep.dichotomy_case = 2;
        for (const auto& p : traj.samples)
            if (traj.entered && p.t >= traj.T0 && p.t <= traj.Te && p.x2 > half + tol)
                rep.dichotomy_ok = false;
    }
    return rep;
}

double phi_distance_violation(const Trajectory& traj, const BoxGeometry& box) {
    const auto& cs = traj.coeffs;
    if (!traj.entered || cs.size() < 2) return 0.0;
    std::vector<double> I(cs.size(), 0.0);
    for (size_t k = 1; k < cs.size(); ++k)
        I[k] = I[k - 1] + 0.5 * (cs[k].t - cs[k - 1].t) * (cs[k].q2 + cs[k - 1].q2);
    double worst = -1e300;
    for (size_t k = 0; k < cs.size(); ++k) {
        double tail = I.back() - I[k];
        double lhs = box.delta2 - cs[k].x2; // d(X(t))
        double rhs = box.delta2 * phi_profile(tail);
        worst = std::max(worst, rhs - lhs);
    }
    return worst;
}

double key_lemma_violation(const Trajectory& traj, const BoxGeometry& box) {
    const auto& cs = traj.coeffs;
    if (!traj.entered || cs.size() < 2) return 0.0;
    double worst = -1e300;
    double I = 0.0;
    const double x20 = cs.front().x2;
    for (size_t k = 1; k < cs.size(); ++k) {
        I += 0.5 * (cs[k].t - cs[k - 1].t) * (cs[k].q2 + cs[k - 1].q2);
        worst = std::max(worst, x20 - box.delta2 * std::exp(-I));
    }
    return worst;
}

std::vector<Vec2> seed_tracers(const BoxGeometry& box, TracerLayout layout, int count) {
    if (count < 1) throw InvalidArgument("seed_tracers: count must be >= 1");
    box.validate();
    std::vector<Vec2> pts;
    pts.reserve(count);
    if (layout == TracerLayout::FeedingEdge) {
        for (int k = 1; k <= count; ++k)
            pts.push_back({box.delta1 + box.delta3, box.delta2 * std::pow(2.0, -k)});
    } else if (layout == TracerLayout::Grid) {
        int side = 1;
        while (side * side < count) ++side;
        const double w = box.delta1 + box.delta3;
        for (int j = 0; j < side && static_cast<int>(pts.size()) < count; ++j)
            for (int i = 0; i < side && static_cast<int>(pts.size()) < count; ++i)
                pts.push_back({(i + 0.5) * w / side, (j + 0.5) * box.delta2 / side});
    } else {
        pts = seed_tracers(box, TracerLayout::FeedingEdge, count);
        auto grid = seed_tracers(box, TracerLayout::Grid, 3 * count + 1);
        pts.insert(pts.end(), grid.begin(), grid.end());
    }
    return pts;
}

} // namespace hypflow
