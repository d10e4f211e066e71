#pragma once

// Independent oracles used by the test suites: a naive DFT, finite-difference
// derivatives, dense-lattice maxima, the Picard fixed point of the two-kernel
// Volterra inequality, and seeded random field/path generators.  Everything
// here stays independent of the implementation paths it cross-checks.

#include <functional>
#include <random>
#include <vector>

#include "hypflow/grid.hpp"
#include "hypflow/kernels.hpp"

namespace hypflow::oracle {

// O(n^4) discrete Fourier transform, 1/n^2 normalization (matches spectral()).
std::vector<cplx> naive_dft2(int n, const std::vector<double>& values);

// 4th-order central differences of a periodic grid field.
std::vector<double> fd4_derivative(const TorusGrid& g, const std::vector<double>& v, int axis);

// central finite difference of kernel_value
double kernel_fd(KernelId id, KernelVar wrt, Vec2 x, Vec2 y, double step = 1e-5);

// max of fn over a dense lattice of (0,w) x (0,h) with `res` points per side
double dense_max(double w, double h, int res, const std::function<double(Vec2)>& fn);

// Picard fixed point of z = f0 + f1 int v1 z + f2 int v2 z (trapezoid rule),
// with recursive interval splitting as a safety net.
std::vector<double> picard_fixed_point(const std::vector<double>& t, const std::vector<double>& f0,
                                       const std::vector<double>& f1,
                                       const std::vector<double>& f2,
                                       const std::vector<double>& v1,
                                       const std::vector<double>& v2);

// band-limited random double-odd field: sum of sin(pi m1 x1) sin(pi m2 x2)
VorticityField random_double_odd(int n, int max_mode, unsigned seed, double amplitude = 1.0);

// product-sine eigenfunction of the periodic Laplacian
VorticityField eigenfield(int n);

// smooth random path on [t0, t1]: low-order Fourier series with |value| <= amp
std::vector<double> random_smooth_path(const std::vector<double>& t, unsigned seed, double amp,
                                       bool nonneg = false);

// piecewise-linear nonnegative random path (Willett ensembles)
std::vector<double> random_pwl_nonneg(const std::vector<double>& t, std::mt19937_64& rng,
                                      double amp);

std::vector<double> uniform_grid(double t0, double t1, int count);

} // namespace hypflow::oracle
