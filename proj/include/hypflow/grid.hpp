#pragma once

//==============================================================================
// Periodic scalar fields on the torus [-1,1)^2.
//
// The grid is uniform with n nodes per axis (n even, power of two, n >= 8),
// spacing h = 2/n and node coordinates x_j = -1 + j*h.  The node set contains
// 0 and is closed under the reflections x -> (-x1, x2) and x -> (x1, -x2), so
// the double-odd symmetry
//     w(-x1, x2) = -w(x1, x2),   w(x1, -x2) = -w(x1, x2)
// and the implied vanishing of w on the coordinate axes are exactly
// representable on nodes.
//==============================================================================

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hypflow/errors.hpp"

namespace hypflow {

using cplx = std::complex<double>;

struct Vec2 {
    double x = 0.0, y = 0.0;
};

struct TorusGrid {
    int n = 0;
    double h = 0.0;

    TorusGrid() = default;
    explicit TorusGrid(int n_pts);

    double node(int j) const { return -1.0 + h * j; }
    // periodic index wrap
    int wrap(int j) const { int m = j % n; return m < 0 ? m + n : m; }
    // index of the node at -x_j
    int reflect(int j) const { return wrap(n - j); }
    // index of x = 0
    int origin_index() const { return n / 2; }

    bool operator==(const TorusGrid&) const = default;
};

// Scalar vorticity samples on a TorusGrid, stored row-major: value(i, j) with
// i the x1 index and j the x2 index lives at v[j*n + i].  Mutation through
// value()/set_values() invalidates the cached Fourier coefficients.
class VorticityField {
  public:
    VorticityField() = default;
    VorticityField(TorusGrid grid, double time = 0.0);
    VorticityField(TorusGrid grid, std::vector<double> values, double time = 0.0);

    const TorusGrid& grid() const { return grid_; }
    int n() const { return grid_.n; }
    double time() const { return time_; }
    void set_time(double t) { time_ = t; }

    const std::vector<double>& values() const { return v_; }
    double value(int i, int j) const { return v_[static_cast<size_t>(j) * grid_.n + i]; }
    double& value(int i, int j) {
        dirty_ = true;
        return v_[static_cast<size_t>(j) * grid_.n + i];
    }
    void set_values(std::vector<double> v);

    // Discrete Fourier coefficients, normalized by 1/n^2 and stored in FFT
    // index order; mode (m1, m2) with m in [-n/2, n/2) sits at raw index
    // (m mod n).  Computed on demand and cached.  Throws InvalidField on
    // non-finite values.
    const std::vector<cplx>& spectral() const;

    // Coefficient of the plane wave e^{i pi (m1 x1 + m2 x2)} (period-2 basis;
    // applies the node-offset phase to the raw DFT coefficient).
    cplx spectral_coeff(int m1, int m2) const;

    double max_abs() const;

  private:
    TorusGrid grid_;
    std::vector<double> v_;
    double time_ = 0.0;
    mutable std::vector<cplx> spec_;
    mutable bool dirty_ = true;
};

struct ScalarFieldSample {
    Vec2 point;
    double value = 0.0;
    std::optional<Vec2> gradient;
};

// Signed average of the four reflections: exact idempotent projection onto
// the double-odd subspace.  Axis nodes come out exactly zero.
VorticityField symmetrize(const VorticityField& f);

// Max violation of the two odd reflections over all nodes.
double symmetry_defect(const VorticityField& f);

bool is_double_odd(const VorticityField& f, double tol = 1e-12);

// Bicubic (4-point Lagrange, periodic wrap) point sampler; O(h^4) on smooth
// fields and exact on nodes.
ScalarFieldSample sample(const VorticityField& f, Vec2 p, bool with_gradient = false);

// Raw bicubic interpolation of an arbitrary grid array (row-major, same
// layout as VorticityField), used by the velocity samplers.
double interp_bicubic(const TorusGrid& g, const std::vector<double>& v, Vec2 p);

// --- serialization -----------------------------------------------------------
// Binary layout (little-endian): magic "HYPF", u32 version, u32 n, f64 time,
// then n*n f64 values row-major.  CSV alternative: header line "n,<n>,time,<t>"
// followed by one row of comma-separated values per grid row.
void save_field(const VorticityField& f, const std::string& path, bool binary = true);
VorticityField load_field(const std::string& path);

} // namespace hypflow
