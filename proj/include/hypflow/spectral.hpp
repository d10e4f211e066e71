#pragma once

//==============================================================================
// Spectral operations on torus fields: differentiation, the periodic Poisson
// solve, and the velocity recovery u = grad^perp (-Laplace)^{-1} w.
//
// Wavenumbers are k_m = pi*m for integer modes m (period 2).  The velocity of
// a double-odd, mean-zero field is divergence-free to spectral accuracy,
// vanishes at the origin and at the corners of [-1,1]^2, and satisfies
// u1 = 0 on the x2-axis, u2 = 0 on the x1-axis.
//==============================================================================

#include <array>
#include <vector>

#include "hypflow/grid.hpp"
#include "hypflow/parallel.hpp"

namespace hypflow {

// d(field)/dx_axis with spectral accuracy (axis: 1 or 2).
VorticityField spectral_derivative(const VorticityField& f, int axis);

// Round trip helper: field values reconstructed from the coefficient array.
std::vector<double> from_spectral(const TorusGrid& g, const std::vector<cplx>& coeffs);

// Kinetic quantities of a coefficient array (L2 over the torus).
double grid_l2(const VorticityField& f);
double coeff_l2(const VorticityField& f);

// Largest |c(m)| among modes with max(|m1|,|m2|) >= cutoff; spectral-tail
// resolution monitor.
double spectral_tail(const VorticityField& f, int cutoff);

// Velocity field (u1, u2) from a double-odd mean-zero vorticity.  Throws
// InvalidField when the mean is not (numerically) zero.
struct VelocityPair {
    std::vector<double> u1, u2;
};
VelocityPair velocity_spectral(const VorticityField& f);

// max |div u| evaluated spectrally
double divergence_sup(const VorticityField& f);

// Everything trajectory/diagnostic sampling needs at one instant:
// velocity, full velocity gradient (all four entries independently), and the
// vorticity gradient.  The vorticity gradient additionally exists on a
// Fourier-refined (zero-padded, 2n) lattice: the vorticity develops thin
// structure that the velocity never has, and gradient sampling along
// trajectories needs the extra interpolation accuracy.
struct VelocityBundle {
    TorusGrid grid;
    TorusGrid grid_fine;
    double t = 0.0;
    std::vector<double> u1, u2;
    std::vector<double> du11, du12, du21, du22; // du_ij = d u_i / d x_j
    std::vector<double> gw1, gw2;               // grad w on the base lattice
    std::vector<double> gw1f, gw2f;             // grad w on the refined lattice
    double max_speed = 0.0;

    double interp(const std::vector<double>& a, Vec2 p) const {
        return interp_bicubic(grid, a, p);
    }
    double grad_w1(Vec2 p) const { return interp_bicubic(grid_fine, gw1f, p); }
    double grad_w2(Vec2 p) const { return interp_bicubic(grid_fine, gw2f, p); }
};

VelocityBundle make_velocity_bundle(const VorticityField& f);

// 2/3-rule dealias mask applied in place to a coefficient array.
void dealias(int n, std::vector<cplx>& coeffs);

} // namespace hypflow
