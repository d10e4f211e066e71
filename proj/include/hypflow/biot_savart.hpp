#pragma once

//==============================================================================
// Q1, Q2 and their derivatives, two independent ways.
//
// Spectral route: u from the periodic Poisson solve, then Q1 = -u1/x1,
// Q2 = u2/x2 (limits on the axes via the velocity gradient), and dQ by the
// product rule on spectral derivatives of u.
//
// Kernel route: Q_i = c0 * [ integral over [0,1]^2 of (G_i^1+G_i^2) w
//   + image sum over the rest of the quarter plane ].  The cell containing
// the singularity is handled by a radially-smooth cutoff: grid quadrature
// outside, polar quadrature (exact angular cancellation of the odd leading
// part) inside.  The image sum runs over expanding square shells of period-2
// blocks; per-shell sums are kept as the convergence monitor and the ~1/R^2
// truncated tail is removed by one Richardson step on the partial sums.
//
// Principal-value route for dQ_i/dx_j: volume integral with an excluded disc
// of radius delta plus the circle correction -w(x) * c0 * int_{dB} G_i^i nu_j,
// Richardson-extrapolated linearly in delta.
//==============================================================================

#include <vector>

#include "hypflow/grid.hpp"
#include "hypflow/kernels.hpp"
#include "hypflow/parallel.hpp"
#include "hypflow/spectral.hpp"

namespace hypflow {

struct QuadratureMeta {
    double exclusion_radius = 0.0;   // singular-patch radius (q_kernel) or last PV radius
    int images = 0;                  // image shells requested
    int image_cells = 0;
    double est_error = 0.0;          // magnitude of the last image shell
    std::vector<double> shell_sums_q1; // per-shell contributions (monitor)
    std::vector<double> shell_sums_q2;
};

struct QEvaluation {
    Vec2 point;
    double q1 = 0.0, q2 = 0.0;
    double dq[2][2] = {{0.0, 0.0}, {0.0, 0.0}}; // dq[i-1][j-1] = dQ_i/dx_j
    enum class Method { Spectral, Kernel } method = Method::Spectral;
    QuadratureMeta meta;
};

// --- spectral route ----------------------------------------------------------

QEvaluation q_spectral(const VelocityBundle& b, Vec2 x);
QEvaluation q_spectral(const VorticityField& f, Vec2 x); // builds a bundle ad hoc

// --- kernel route ------------------------------------------------------------

struct KernelQuadOptions {
    double patch_radius_cells = 6.0; // singular patch radius in units of h
    int n_theta = 64;
    ExecPolicy policy = ExecPolicy::Parallel;
};

QEvaluation q_kernel(const VorticityField& f, Vec2 x, int images,
                     const KernelQuadOptions& opts = {});

// --- principal value derivative ----------------------------------------------

struct PvResult {
    double value = 0.0;                 // Richardson limit
    std::vector<double> radii;
    std::vector<double> per_radius;     // V(delta) sequence
    std::vector<double> circle_terms;   // -w(x) c0 int_{dB(delta)} G_i^i nu_j
};

struct PvOptions {
    int images = 3; // period-block shells, region radius 2*images+1
    double patch_radius_cells = 16.0;
    int n_theta = 64;
    ExecPolicy policy = ExecPolicy::Parallel;
};

PvResult dq_principal_value(const VorticityField& f, Vec2 x, int j, int i,
                            const std::vector<double>& radii, const PvOptions& opts = {});

// Raw circle term (without c0), exposed for convergence tests:
// -w(x) * int_{dB(delta,x)} G_i^i nu_j dsigma
double pv_circle_term(const VorticityField& f, Vec2 x, int i, int j, double delta,
                      int n_theta = 256);

// Calibration of the kernel front constant against the spectral route on the
// product-sine datum; returns the c0 that makes the two agree at the probe.
double calibrate_c0(int n, int images = 6);

// Serial reference twins (identical contracts, plain loops); the parallel
// kernels are tested against these.
namespace serial {
QEvaluation q_kernel(const VorticityField& f, Vec2 x, int images,
                     const KernelQuadOptions& opts = {});
} // namespace serial

} // namespace hypflow
