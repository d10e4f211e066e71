#pragma once

//==============================================================================
// Scenario monitors and fitted-constant inequality checks.
//
// M(x,t) = max over 0 <= y1,y2 <= max(x1,x2) of {|y1^a dw/dx1|, |y2^a dw/dx2|};
// M_D, M_Dhat are the same maxima over the boxes.  The hyperbolicity margin is
// min(Q_i) + A |x|^{1-a} M(x,t) - beta0 over the corner square [0,rho]^2.
//
// Inequality checks fit C = max over samples of (left side)/(structural right
// side) and report stability of C under half-vs-full sampling; the refinement
// sweep probes stability of the constants as the box shrinks.
//==============================================================================

#include <optional>
#include <string>
#include <vector>

#include "hypflow/box.hpp"
#include "hypflow/gradient_ode.hpp"
#include "hypflow/spectral.hpp"
#include "hypflow/trajectories.hpp"

namespace hypflow {

struct HyperParams {
    double A = 1.0;
    double beta0 = 0.4;
    double rho = 0.1;
};

struct GrowthRecord {
    double t = 0.0;
    double M_D = 0.0;
    double M_Dhat = 0.0;
    double sup_grad = 0.0;          // max |grad w| over D (Euclidean)
    double hyper_margin = 0.0;
    double feeding_residual = 0.0;  // smallest admissible feeding parameter R
    double q_min_D = 0.0;           // min over D nodes of min(Q1, Q2)
};

// Node-based monitors; requires both sides of Dhat to span >= 8 grid cells
// (UnderResolvedBox otherwise).
GrowthRecord growth_observer(const VorticityField& f, const VelocityBundle& b,
                             const BoxGeometry& box, const HyperParams& hp,
                             ExecPolicy policy = ExecPolicy::Parallel);
GrowthRecord growth_observer(const VorticityField& f, const BoxGeometry& box,
                             const HyperParams& hp);

namespace serial {
GrowthRecord growth_observer(const VorticityField& f, const VelocityBundle& b,
                             const BoxGeometry& box, const HyperParams& hp);
}

struct HyperbolicityCriterion {
    double m = 0.0;              // area of the near-max level set on [0,1]^2
    double K_region = 0.0;       // radius of the verified region
    double beta0_measured = 0.0; // min of Q_i over the region (filled after runs)
};

// Plateau measure m = |{x in [0,1]^2 : w0(x) >= max - level_tolerance}|.
// Throws PreconditionFailed when w0 < 0 somewhere on [0,1]^2 and
// DegenerateField when w0 vanishes identically there.
HyperbolicityCriterion measure_m(const VorticityField& f0, double level_tolerance);

struct InequalityFit {
    std::string name;
    int sample_count = 0;
    double constant = 0.0;        // max over samples of lhs / rhs
    double stability_ratio = 1.0; // C(half sample) / C(full sample)
    bool degenerate = false;      // all numerators vanished
    bool pass = true;             // stability within [0.5, 2]
};

// Q_i(x) <= C [ |w|_inf (1 + |log d(x)|) + M_Dhat |delta|^{1-a} ]
InequalityFit check_q_upper_bound(const VorticityField& f, const VelocityBundle& b,
                                  const BoxGeometry& box, const std::vector<Vec2>& points);

struct GammaChoice {
    double gamma = 0.5;
    double gamma1 = 0.5;
    double gamma2 = 0.5; // gamma1 + gamma2 = 1 for the |c| estimate
};

// |c|, |b|, |x_i dQ_i/dx_i| against their structural right sides; one fit per
// estimate, names "estc", "estb", "estxdQ".
std::vector<InequalityFit> check_coefficient_bounds(const VorticityField& f,
                                                    const VelocityBundle& b,
                                                    const BoxGeometry& box,
                                                    const std::vector<Vec2>& points,
                                                    const GammaChoice& gammas);

struct EnvelopeFit {
    double C1 = 0.0;            // exp(intercept) of the full-series fit
    double C2 = 0.0;            // slope of the full-series fit
    double max_positive_residual = 0.0;
    // split-sample trend test: envelope fitted on the first half, OLS slope of
    // the second-half residuals vs t, one-sided 95% bound
    double trend_slope = 0.0;
    double trend_slope_bound = 0.0;
    bool no_upward_trend = true;
    int excluded = 0; // non-positive samples dropped
};

EnvelopeFit exponential_envelope_fit(const std::vector<double>& t, const std::vector<double>& g);
EnvelopeFit exponential_envelope_fit(const std::vector<GrowthRecord>& records);

struct FeedingReport {
    bool pass = true;
    double worst_ratio = 0.0;
    Vec2 worst_point;
};

// |d1 w| <= R x2^{1-a} and |d2 w| <= R on the feeding zone nodes.
FeedingReport feeding_monitor(const VorticityField& f, const VelocityBundle& b,
                              const BoxGeometry& box, double R);

struct LowerBoundReport {
    bool pass = true;
    double min_margin = 0.0;
    std::vector<double> margin_series;
};

// Hyperbolicity margins collected over a run.
LowerBoundReport q_lower_bound_check(const std::vector<GrowthRecord>& records);

// Composite per-trajectory check of the section-6 lemma conclusions: the
// exponential-representation residual, the distance estimate, the entry-height
// bound and the xi dominance, reported as one record.
struct TrajectoryLemmaReport {
    double representation_residual = 0.0;
    double phi_violation = 0.0;      // positive = violated
    double key_lemma_violation = 0.0;
    double xi1_violation = 0.0;      // max (|xi1| - bound)/scale, positive = violated
    double xi2_violation = 0.0;
    double grad_consistency = 0.0;   // max rel gap: integrated xi vs field gradient
    double grad_scale = 0.0;         // path max |grad w|; ~0 = the trajectory rides
                                     // material fluid with identically zero gradient
    double trace_defect = 0.0;
};

TrajectoryLemmaReport trajectory_lemma_report(const Trajectory& traj, const BoxGeometry& box);

// CSV / JSON writers used by the scenario runner ("check" re-reads these).
void write_diagnostics_csv(const std::string& path, const std::vector<GrowthRecord>& records);
std::vector<GrowthRecord> read_diagnostics_csv(const std::string& path);
void write_trajectory_csv(const std::string& path, const Trajectory& traj);
void write_gronwall_csv(const std::string& path, const CoefficientPath& p, const GronwallData& gd,
                        const std::vector<GradientState>& xi);

} // namespace hypflow
