#pragma once

//==============================================================================
// Time advance of w_t + u . grad w = 0 on the torus, double-odd symmetry
// re-enforced exactly after every step.
//
// Two schemes:
//  - RK4 pseudo-spectral with 2/3 dealiasing (default; spectrally accurate,
//    CFL limited),
//  - semi-Lagrangian: backward characteristic departure (two-stage midpoint,
//    velocity extrapolated from the previous step) + bicubic interpolation.
//==============================================================================

#include <functional>
#include <optional>

#include "hypflow/parallel.hpp"
#include "hypflow/spectral.hpp"

namespace hypflow {

enum class Scheme { Rk4Spectral, SemiLagrangian };

struct StepperConfig {
    double dt = 1e-3;
    Scheme scheme = Scheme::Rk4Spectral;
    bool dealias_23 = true;
    double t_end = 1.0;
    bool symmetrize_every_step = true;
    double cfl_limit = 1.0;      // dt * max|u| / h must stay below this
    int max_step_retries = 8;    // dt halvings run() will attempt on rejection
    ExecPolicy policy = ExecPolicy::Parallel;
};

// One step of the configured scheme.  Throws StepRejected on CFL violation;
// the caller halves dt.  `prev` is the velocity of the step before (used by
// the semi-Lagrangian extrapolation; pass nullptr for a cold start).
VorticityField step(const VorticityField& f, const StepperConfig& cfg,
                    const VelocityBundle* prev = nullptr);

// Stateful stepping with velocity history and bundle reuse.
class Stepper {
  public:
    Stepper(VorticityField initial, StepperConfig cfg);

    const VorticityField& field() const { return state_; }
    const VelocityBundle& bundle() const { return *bundle_; }
    // velocity one step back (equal to bundle() before the first advance)
    const VelocityBundle& prev_bundle() const { return prev_bundle_ ? *prev_bundle_ : *bundle_; }
    const StepperConfig& config() const { return cfg_; }
    double time() const { return state_.time(); }

    // advance one dt; throws StepRejected on CFL violation
    void advance();

    int steps_taken() const { return steps_; }

  private:
    VorticityField state_;
    StepperConfig cfg_;
    std::optional<VelocityBundle> bundle_;      // velocity at current time
    std::optional<VelocityBundle> prev_bundle_; // one step back
    int steps_ = 0;
};

struct RunStats {
    int steps = 0;
    int rejected = 0;
    double dt_final = 0.0;
    double t_final = 0.0;
};

// Observer invoked at t = 0 and every `every` accepted steps thereafter.
struct RunObserver {
    int every = 1;
    std::function<void(const VorticityField&, const VelocityBundle&, int step_index)> fn;
};

// Frame hook runs after every accepted step (used for tracer streaming).
using FrameHook =
    std::function<void(const VelocityBundle& prev, const VelocityBundle& cur)>;

RunStats run(VorticityField& field, StepperConfig cfg, const std::vector<RunObserver>& observers,
             const FrameHook& frame_hook = {});

// Serial reference for the semi-Lagrangian node sweep.
namespace serial {
std::vector<double> advect_sweep(const VorticityField& f, const VelocityBundle& cur,
                                 const VelocityBundle* prev, double dt);
}
std::vector<double> advect_sweep(const VorticityField& f, const VelocityBundle& cur,
                                 const VelocityBundle* prev, double dt, ExecPolicy policy);

} // namespace hypflow
