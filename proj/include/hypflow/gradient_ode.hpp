#pragma once

//==============================================================================
// The gradient-evolution ODE along a trajectory and its integral-inequality
// machinery.
//
//   xi' = [[a, c], [b, -a]] xi,   a = Q1 + x1 dQ1/dx1, b = x1 dQ1/dx2,
//                                 c = -x2 dQ2/dx1,  A(t) = int a.
//
// Operators (time origin shifted to the trajectory entry internally):
//   (F+ g)(t) = g + e^A  int_0^t a e^-A g,   (F- g)(t) = g - e^-A int_0^t a e^A g
//   (I - P)^-1 g:  phi1 = F+ g1,  phi2 = F- g2 + e^-A int e^A b (F+ g1)
//   w1 = xi1(0) + int c xi2,  w2 = xi2(0),  xi1 = F+ w1,
//   xi2 = xi2(0) e^-A + e^-A int e^A b (F+ w1)
//
// Willett bound: z <= f0 + f1 int v1 z + f2 int v2 z  implies  z <= H f0 with
// the explicit four-line functional; the sampled-path version here evaluates
// it by nested trapezoids with grid-halving refinement.
//==============================================================================

#include <array>
#include <vector>

#include "hypflow/trajectories.hpp"

namespace hypflow {

// --- sampled-path quadrature helpers ------------------------------------------

// cumulative trapezoid, out[0] = 0
std::vector<double> cumtrapz(const std::vector<double>& t, const std::vector<double>& y);

// cumulative integral via piecewise-cubic interpolation (4-point Lagrange per
// interval, exact for cubics); O(dt^4) on smooth data, nonuniform grids ok
std::vector<double> cumquad_cubic(const std::vector<double>& t, const std::vector<double>& y);

// value of the piecewise-cubic interpolant at tq
double interp_cubic(const std::vector<double>& t, const std::vector<double>& y, double tq);

// resample onto a new grid with the same interpolant
std::vector<double> resample_cubic(const std::vector<double>& t, const std::vector<double>& y,
                                   const std::vector<double>& t_new);

// --- coefficient path ----------------------------------------------------------

struct CoefficientPath {
    std::vector<double> t;      // trajectory times, t.front() = T0
    std::vector<double> a;      // Q1 + x1 dQ1/dx1 (matrix entry)
    std::vector<double> a_alt;  // Q2 + x2 dQ2/dx2 (trace-zero partner, stored)
    std::vector<double> b, c;
    std::vector<double> q1, q2;
    std::vector<double> A;      // cumulative integral of a from T0
    double trace_defect = 0.0;  // max |a - a_alt|

    size_t size() const { return t.size(); }
};

// Build the path from a traced trajectory's dense samples; verifies the
// trace-zero invariant (|a - a_alt| below tol * max|a|).
CoefficientPath sample_coefficients(const Trajectory& traj, double trace_tol = 1e-6);

// Synthetic path on a uniform grid (tests, random ensembles).
CoefficientPath make_path(std::vector<double> t, std::vector<double> a, std::vector<double> b,
                          std::vector<double> c);

struct GradientState {
    double xi1 = 0.0, xi2 = 0.0;
};

// RK4 integration of the full 2x2 system on the path grid (coefficients
// interpolated cubically; each interval substepped for accuracy).
std::vector<GradientState> integrate_exact(const CoefficientPath& p, GradientState xi0,
                                           int substeps = 4);

// Diagonal heuristic xi1 = e^A xi1(0), xi2 = e^-A xi2(0).
std::vector<GradientState> model_diagonal(const CoefficientPath& p, GradientState xi0);

// Explicit c = 0 solution: xi2 = e^-A [xi2(0) + xi1(0) int b e^{2A}].
std::vector<GradientState> model_c_zero(const CoefficientPath& p, GradientState xi0);

// --- Volterra machinery ---------------------------------------------------------

struct VolterraSolution {
    std::vector<double> phi1, phi2;
    double residual = 0.0; // sup norm of phi - P phi - g
};

// Solve phi = P^ phi + g by the explicit F+/F- formulas; the residual of the
// defining equation is evaluated independently and returned.
VolterraSolution volterra_solve(const CoefficientPath& p, const std::vector<double>& g1,
                                const std::vector<double>& g2);

// (F+ g) on the path grid
std::vector<double> f_plus(const CoefficientPath& p, const std::vector<double>& g);
std::vector<double> f_minus(const CoefficientPath& p, const std::vector<double>& g);

struct WRepresentation {
    std::vector<double> w1;
    double residual = 0.0; // max of the three representation residuals
};

// Verify the w <-> xi relations against an integrated path.
WRepresentation w_representation(const CoefficientPath& p, GradientState xi0,
                                 const std::vector<GradientState>& xi_path);

// --- Willett inequality ----------------------------------------------------------

struct WillettInputs {
    std::vector<double> t, f0, f1, f2, v1, v2;
};

// The dominating functional H f0, nested trapezoids refined (by grid halving
// with cubic resampling) until successive levels agree to `tol` in sup norm.
std::vector<double> willett_bound(const WillettInputs& in, double tol = 1e-8);

struct GronwallData {
    std::vector<double> t;
    std::vector<double> f0, f1, f2, v1, v2;
    std::vector<double> Hf0;
    std::vector<double> bound_xi1, bound_xi2;
};

// Assemble f0..v2 from a coefficient path per the final-lemma definitions,
// evaluate H f0 and both right sides of the xi bounds.
GronwallData xi_bounds(const CoefficientPath& p, GradientState xi0);

} // namespace hypflow
