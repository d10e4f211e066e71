#pragma once

//==============================================================================
// Characteristic tracing through the analysis box.
//
// Particles obey dX1/dt = -X1 Q1 = u1(X), dX2/dt = X2 Q2 = u2(X); the axes
// are invariant, which the integrator preserves structurally by advancing
// log-coordinates when a component starts at zero... in practice tracers with
// X2 = 0 keep X2 = 0 exactly because u2 = x2 Q2 is evaluated as x2 * Q2.
//
// A trajectory is followed from its start (inside closure(Dhat)) until it
// leaves D through the boundary (exit time Te, located by bisection to 1e-8)
// or until the probe's time horizon ends (open trajectory).  Entry time T0 is
// the start time for starts inside closure(D), otherwise the located crossing
// of the right edge.  T1 is the first time X2 >= delta2 / 2.
//==============================================================================

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hypflow/box.hpp"
#include "hypflow/spectral.hpp"

namespace hypflow {

// Everything the tracer and the gradient ODE need at one space-time point.
struct FlowSample {
    double u1 = 0.0, u2 = 0.0;
    double q1 = 0.0, q2 = 0.0;
    double a1 = 0.0;   // Q1 + x1 dQ1/dx1 = -du1/dx1
    double a2 = 0.0;   // Q2 + x2 dQ2/dx2 =  du2/dx2 (trace-zero partner)
    double b = 0.0;    // x1 dQ1/dx2 = -du1/dx2
    double c = 0.0;    // -x2 dQ2/dx1 = -du2/dx1
    double gw1 = 0.0, gw2 = 0.0; // grad w at the point
};

class FlowProbe {
  public:
    virtual ~FlowProbe() = default;
    virtual FlowSample at(Vec2 x, double t) const = 0;
    virtual double t_begin() const = 0;
    virtual double t_end() const = 0;
};

FlowSample flow_sample_from_bundle(const VelocityBundle& b, Vec2 x);

// Linear-in-time interpolation across a window of two velocity bundles.
class BundleWindowProbe : public FlowProbe {
  public:
    BundleWindowProbe(const VelocityBundle* lo, const VelocityBundle* hi) : lo_(lo), hi_(hi) {}
    FlowSample at(Vec2 x, double t) const override;
    double t_begin() const override { return lo_->t; }
    double t_end() const override { return hi_->t; }

  private:
    const VelocityBundle* lo_;
    const VelocityBundle* hi_;
};

// A stored series of bundles (tests and small runs).
class BundleSeriesProbe : public FlowProbe {
  public:
    explicit BundleSeriesProbe(std::vector<VelocityBundle> bundles);
    FlowSample at(Vec2 x, double t) const override;
    double t_begin() const override { return bundles_.front().t; }
    double t_end() const override { return bundles_.back().t; }

  private:
    std::vector<VelocityBundle> bundles_;
};

// Closed-form flows for oracle tests: supply u and the velocity gradient.
class SyntheticProbe : public FlowProbe {
  public:
    using VelFn = std::function<void(Vec2, double, FlowSample&)>;
    SyntheticProbe(VelFn fn, double t0, double t1) : fn_(std::move(fn)), t0_(t0), t1_(t1) {}
    FlowSample at(Vec2 x, double t) const override {
        FlowSample s;
        fn_(x, t, s);
        return s;
    }
    double t_begin() const override { return t0_; }
    double t_end() const override { return t1_; }

  private:
    VelFn fn_;
    double t0_, t1_;
};

struct TrajPoint {
    double t = 0.0;
    double x1 = 0.0, x2 = 0.0;
};

struct CoeffSample {
    double t = 0.0;
    double x1 = 0.0, x2 = 0.0;
    double q1 = 0.0, q2 = 0.0;
    double a1 = 0.0, a2 = 0.0, b = 0.0, c = 0.0;
    double gw1 = 0.0, gw2 = 0.0;
};

struct Trajectory {
    Vec2 start;
    double t_start = 0.0;
    bool entered = false;          // reached closure(D)
    double T0 = 0.0;               // entry time (valid when entered)
    std::optional<double> T1;      // first time X2 >= delta2/2
    double Te = 0.0;               // exit time; horizon end when open
    bool closed = false;           // left D through its boundary
    std::string exit_side;         // "top" | "right" | "none"
    std::vector<TrajPoint> samples;
    std::vector<CoeffSample> coeffs; // dense samples on [T0, Te]
};

struct TraceOptions {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double max_step = 0.01;
    double event_tol = 1e-8; // position tolerance of entry/exit bisection
};

// One-shot trace across the probe's whole time range.
Trajectory trace(const FlowProbe& probe, const BoxGeometry& box, Vec2 start, double t_start,
                 const TraceOptions& opts = {});

// Incremental tracer used by the streaming scenario runner: feed frames one
// at a time; the trajectory is finalized when done() or at the horizon.
class TracerIntegrator {
  public:
    TracerIntegrator(const BoxGeometry& box, Vec2 start, double t_start,
                     const TraceOptions& opts = {});

    void advance_through(const FlowProbe& probe, double t_to);
    void finish_open(double horizon);

    bool done() const { return done_; }
    const Trajectory& trajectory() const { return traj_; }
    Trajectory& trajectory() { return traj_; }

  private:
    void record(const FlowProbe& probe, double t, Vec2 x);
    void handle_events(const FlowProbe& probe, double t_prev, Vec2 x_prev, double t, Vec2 x);

    BoxGeometry box_;
    TraceOptions opts_;
    Trajectory traj_;
    Vec2 x_;
    double t_;
    bool inside_ = false;
    bool done_ = false;
};

// Max relative residual of X_i(t) against the exponential representation
// X2(t) = X2(T0) exp(int Q2), X1(t) = X1(T0) exp(-int Q1) on [T0, Te].
double verify_representation(const Trajectory& traj);

struct ExitTimeReport {
    bool t1_exists = false;
    double te_minus_t1 = 0.0;
    double bound = 0.0; // log(2)/beta + slack
    bool bound_ok = true;
    int dichotomy_case = 2; // 1: above delta2/2 after T1; 2: below throughout
    bool dichotomy_ok = true;
};

// Prop-style residence bound: Te - T1 <= log(2)/beta + slack.  The caller
// must have verified beta-hyperbolicity along the trajectory span and pass
// `hyperbolicity_checked = true`, otherwise PreconditionNotChecked is thrown.
ExitTimeReport exit_time_bound_check(const Trajectory& traj, const BoxGeometry& box, double beta,
                                     bool hyperbolicity_checked, double dt_slack);

// Worst violation of d(X(t)) >= delta2 * phi(int_t^Te Q2 ds) over the
// coefficient grid (positive = violated by that much).
double phi_distance_violation(const Trajectory& traj, const BoxGeometry& box);

// Worst violation of X2(T0) <= delta2 exp(-int_{T0}^{T*} Q2) over T* in the
// coefficient grid.
double key_lemma_violation(const Trajectory& traj, const BoxGeometry& box);

enum class TracerLayout { Grid, FeedingEdge, Mixed };

// Deterministic start-point layouts.  Grid: raster lattice over Dhat.
// Feeding edge: {delta1+delta3} x heights delta2 * 2^{-k}, k = 1..count.
// Mixed: the feeding-edge family plus a (3*count+1)-point grid, covering both
// the long-residence regime and gradient-carrying starts.
std::vector<Vec2> seed_tracers(const BoxGeometry& box, TracerLayout layout, int count);

} // namespace hypflow
