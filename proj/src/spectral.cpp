#include "hypflow/spectral.hpp"

#include <cmath>
#include <numbers>

#include "hypflow/fft.hpp"

namespace hypflow {

namespace {

constexpr double kPi = std::numbers::pi;

// multiply coefficient array by i*k along one axis, Nyquist zeroed
std::vector<cplx> apply_ik(int n, const std::vector<cplx>& c, int axis) {
    std::vector<cplx> out(c.size());
    for (int j = 0; j < n; ++j) {
        int m2 = mode_of(j, n);
        for (int i = 0; i < n; ++i) {
            int m1 = mode_of(i, n);
            int m = (axis == 1) ? m1 : m2;
            if (m == -n / 2) {
                out[static_cast<size_t>(j) * n + i] = 0.0;
                continue;
            }
            out[static_cast<size_t>(j) * n + i] =
                c[static_cast<size_t>(j) * n + i] * cplx(0.0, kPi * m);
        }
    }
    return out;
}

// zero-pad an n-grid coefficient array onto the 2n lattice (trigonometric
// interpolation; original nodes are reproduced exactly, Nyquist split evenly)
std::vector<cplx> pad_spectrum(int n, const std::vector<cplx>& c) {
    const int n2 = 2 * n;
    std::vector<cplx> out(static_cast<size_t>(n2) * n2, cplx(0.0));
    auto idx2 = [n2](int m1, int m2) {
        int i = m1 < 0 ? m1 + n2 : m1;
        int j = m2 < 0 ? m2 + n2 : m2;
        return static_cast<size_t>(j) * n2 + i;
    };
    for (int j = 0; j < n; ++j) {
        int m2 = mode_of(j, n);
        for (int i = 0; i < n; ++i) {
            int m1 = mode_of(i, n);
            cplx v = c[static_cast<size_t>(j) * n + i];
            double w1 = (std::abs(m1) == n / 2) ? 0.5 : 1.0;
            double w2 = (std::abs(m2) == n / 2) ? 0.5 : 1.0;
            if (w1 == 1.0 && w2 == 1.0) {
                out[idx2(m1, m2)] = v;
            } else {
                // split Nyquist modes onto +-n/2 to keep the field real
                for (int s1 : {1, -1})
                    for (int s2 : {1, -1}) {
                        if ((s1 < 0 && std::abs(m1) != n / 2) ||
                            (s2 < 0 && std::abs(m2) != n / 2))
                            continue;
                        out[idx2(s1 * m1, s2 * m2)] += v * w1 * w2;
                    }
            }
        }
    }
    return out;
}

} // namespace

VorticityField spectral_derivative(const VorticityField& f, int axis) {
    if (axis != 1 && axis != 2) throw InvalidArgument("spectral_derivative: axis must be 1 or 2");
    const int n = f.n();
    auto dc = apply_ik(n, f.spectral(), axis);
    VorticityField out(f.grid(), fft2_inverse_real(n, dc), f.time());
    return out;
}

std::vector<double> from_spectral(const TorusGrid& g, const std::vector<cplx>& coeffs) {
    return fft2_inverse_real(g.n, coeffs);
}

double grid_l2(const VorticityField& f) {
    const int n = f.n();
    double s = 0.0;
    for (double x : f.values()) s += x * x;
    // cell area h^2, torus area 4
    return std::sqrt(s * (2.0 / n) * (2.0 / n));
}

double coeff_l2(const VorticityField& f) {
    double s = 0.0;
    for (const cplx& c : f.spectral()) s += std::norm(c);
    return std::sqrt(4.0 * s); // Parseval with torus area 4
}

double spectral_tail(const VorticityField& f, int cutoff) {
    const int n = f.n();
    const auto& c = f.spectral();
    double worst = 0.0;
    for (int j = 0; j < n; ++j) {
        int m2 = std::abs(mode_of(j, n));
        for (int i = 0; i < n; ++i) {
            int m1 = std::abs(mode_of(i, n));
            if (std::max(m1, m2) >= cutoff)
                worst = std::max(worst, std::abs(c[static_cast<size_t>(j) * n + i]));
        }
    }
    return worst;
}

VelocityPair velocity_spectral(const VorticityField& f) {
    const int n = f.n();
    const auto& c = f.spectral();
    double mean = std::abs(c[0]);
    if (mean > 1e-12 * std::max(1.0, f.max_abs()))
        throw InvalidField("velocity_spectral: field has non-zero mean");

    std::vector<cplx> psi(c.size());
    for (int j = 0; j < n; ++j) {
        int m2 = mode_of(j, n);
        for (int i = 0; i < n; ++i) {
            int m1 = mode_of(i, n);
            size_t idx = static_cast<size_t>(j) * n + i;
            double k2 = kPi * kPi * (static_cast<double>(m1) * m1 + static_cast<double>(m2) * m2);
            psi[idx] = (k2 == 0.0) ? cplx(0.0) : c[idx] / k2;
        }
    }
    // u = (-d psi/dx2, d psi/dx1)
    VelocityPair u;
    u.u1 = fft2_inverse_real(n, apply_ik(n, psi, 2));
    for (double& x : u.u1) x = -x;
    u.u2 = fft2_inverse_real(n, apply_ik(n, psi, 1));
    return u;
}

double divergence_sup(const VorticityField& f) {
    const int n = f.n();
    const auto& c = f.spectral();
    std::vector<cplx> psi(c.size());
    for (int j = 0; j < n; ++j) {
        int m2 = mode_of(j, n);
        for (int i = 0; i < n; ++i) {
            int m1 = mode_of(i, n);
            size_t idx = static_cast<size_t>(j) * n + i;
            double k2 = kPi * kPi * (static_cast<double>(m1) * m1 + static_cast<double>(m2) * m2);
            psi[idx] = (k2 == 0.0) ? cplx(0.0) : c[idx] / k2;
        }
    }
    auto d1 = apply_ik(n, apply_ik(n, psi, 2), 1); // d1 u1 = -d1 d2 psi (sign below)
    auto d2 = apply_ik(n, apply_ik(n, psi, 1), 2); // d2 u2 =  d2 d1 psi
    std::vector<cplx> div(d1.size());
    for (size_t i = 0; i < div.size(); ++i) div[i] = -d1[i] + d2[i];
    auto g = fft2_inverse_real(n, div);
    double worst = 0.0;
    for (double x : g) worst = std::max(worst, std::abs(x));
    return worst;
}

VelocityBundle make_velocity_bundle(const VorticityField& f) {
    const int n = f.n();
    const auto& c = f.spectral();
    VelocityBundle b;
    b.grid = f.grid();
    b.t = f.time();

    std::vector<cplx> psi(c.size());
    for (int j = 0; j < n; ++j) {
        int m2 = mode_of(j, n);
        for (int i = 0; i < n; ++i) {
            int m1 = mode_of(i, n);
            size_t idx = static_cast<size_t>(j) * n + i;
            double k2 = kPi * kPi * (static_cast<double>(m1) * m1 + static_cast<double>(m2) * m2);
            psi[idx] = (k2 == 0.0) ? cplx(0.0) : c[idx] / k2;
        }
    }
    auto u1c = apply_ik(n, psi, 2);
    for (auto& z : u1c) z = -z;
    auto u2c = apply_ik(n, psi, 1);

    b.u1 = fft2_inverse_real(n, u1c);
    b.u2 = fft2_inverse_real(n, u2c);
    b.du11 = fft2_inverse_real(n, apply_ik(n, u1c, 1));
    b.du12 = fft2_inverse_real(n, apply_ik(n, u1c, 2));
    b.du21 = fft2_inverse_real(n, apply_ik(n, u2c, 1));
    b.du22 = fft2_inverse_real(n, apply_ik(n, u2c, 2));
    b.gw1 = fft2_inverse_real(n, apply_ik(n, c, 1));
    b.gw2 = fft2_inverse_real(n, apply_ik(n, c, 2));

    b.grid_fine = TorusGrid(2 * n);
    auto cf = pad_spectrum(n, c);
    b.gw1f = fft2_inverse_real(2 * n, apply_ik(2 * n, cf, 1));
    b.gw2f = fft2_inverse_real(2 * n, apply_ik(2 * n, cf, 2));

    double ms = 0.0;
    for (size_t i = 0; i < b.u1.size(); ++i)
        ms = std::max(ms, std::hypot(b.u1[i], b.u2[i]));
    b.max_speed = ms;
    return b;
}

void dealias(int n, std::vector<cplx>& coeffs) {
    const int cut = n / 3;
    for (int j = 0; j < n; ++j) {
        int m2 = std::abs(mode_of(j, n));
        for (int i = 0; i < n; ++i) {
            int m1 = std::abs(mode_of(i, n));
            if (m1 > cut || m2 > cut) coeffs[static_cast<size_t>(j) * n + i] = 0.0;
        }
    }
}

} // namespace hypflow
