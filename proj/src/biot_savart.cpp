#include "hypflow/biot_savart.hpp"

#include <cmath>
#include <numbers>

namespace hypflow {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kAxisEps = 1e-12;

// quintic smoothstep, 0 below a, 1 above b
inline double smoothstep(double r, double a, double b) {
    if (r <= a) return 0.0;
    if (r >= b) return 1.0;
    double t = (r - a) / (b - a);
    return t * t * t * (t * (6.0 * t - 15.0) + 10.0);
}

// both kernel pair sums at once, sharing the distance work
inline void kernel_pairs(Vec2 x, Vec2 y, double& g1, double& g2) {
    const double m1 = y.x - x.x, p1 = y.x + x.x;
    const double m2 = y.y - x.y, p2 = y.y + x.y;
    const double A = m1 * m1 + m2 * m2;
    const double B = p1 * p1 + m2 * m2;
    const double C = m1 * m1 + p2 * p2;
    const double D = p1 * p1 + p2 * p2;
    g1 = y.x * m2 / (A * B) + y.x * p2 / (D * C);
    g2 = y.y * p1 / (D * B) + y.y * m1 / (A * C);
}

// value of the periodically extended field at lattice point (q1*h, q2*h)
inline double node_value_ext(const VorticityField& f, long q1, long q2) {
    const int n = f.n();
    long j1 = (q1 + n / 2) % n;
    if (j1 < 0) j1 += n;
    long j2 = (q2 + n / 2) % n;
    if (j2 < 0) j2 += n;
    return f.values()[static_cast<size_t>(j2) * n + j1];
}

// bicubic sample of the periodic extension at an arbitrary point
inline double value_ext(const VorticityField& f, Vec2 y) {
    // wrap into [-1, 1)
    double x = std::remainder(y.x, 2.0);
    double z = std::remainder(y.y, 2.0);
    if (x >= 1.0) x -= 2.0;
    if (z >= 1.0) z -= 2.0;
    return interp_bicubic(f.grid(), f.values(), Vec2{x, z});
}

// largest radius <= cap from x in direction (c, s) staying inside [0,1]^2
inline double wall_clip(Vec2 x, double c, double s, double cap) {
    double r = cap;
    if (c > 0.0) r = std::min(r, (1.0 - x.x) / c);
    if (c < 0.0) r = std::min(r, -x.x / c);
    if (s > 0.0) r = std::min(r, (1.0 - x.y) / s);
    if (s < 0.0) r = std::min(r, -x.y / s);
    return std::max(r, 0.0);
}

// 16-point Gauss-Legendre on [0, 1]
constexpr int kGL = 16;
const double kGLx[kGL] = {
    0.0052995325041750, 0.0277124884633837, 0.0671843988060841, 0.1222977958224985,
    0.1910618777986781, 0.2709916111713863, 0.3591982246103705, 0.4524937450811813,
    0.5475062549188187, 0.6408017753896295, 0.7290083888286137, 0.8089381222013219,
    0.8777022041775015, 0.9328156011939159, 0.9722875115366163, 0.9947004674958250};
const double kGLw[kGL] = {
    0.0135762297058770, 0.0311267619693239, 0.0475792558412464, 0.0623144856277669,
    0.0747979944082884, 0.0845782596975013, 0.0913017075224618, 0.0947253052275343,
    0.0947253052275343, 0.0913017075224618, 0.0845782596975013, 0.0747979944082884,
    0.0623144856277669, 0.0475792558412464, 0.0311267619693239, 0.0135762297058770};

struct BoxSums {
    double g1 = 0.0, g2 = 0.0;
};

// grid part of the [0,1]^2 integral with the radial cutoff around x
BoxSums box_grid_sum(const VorticityField& f, Vec2 x, double rho, bool parallel) {
    const int n2 = f.n() / 2;
    const double h = f.grid().h;
    const double rho_half = 0.5 * rho;
    double s1 = 0.0, s2 = 0.0;

    if (parallel) {
#pragma omp parallel for schedule(static) reduction(+ : s1, s2)
        for (int q2 = 1; q2 < n2; ++q2) {
            for (int q1 = 1; q1 < n2; ++q1) {
                double w = node_value_ext(f, q1, q2);
                if (w == 0.0) continue;
                Vec2 y{q1 * h, q2 * h};
                double r = std::hypot(y.x - x.x, y.y - x.y);
                if (r <= rho_half) continue;
                double cut = (r >= rho) ? 1.0 : smoothstep(r, rho_half, rho);
                double g1, g2;
                kernel_pairs(x, y, g1, g2);
                s1 += cut * g1 * w;
                s2 += cut * g2 * w;
            }
        }
    } else {
        for (int q2 = 1; q2 < n2; ++q2) {
            for (int q1 = 1; q1 < n2; ++q1) {
                double w = node_value_ext(f, q1, q2);
                if (w == 0.0) continue;
                Vec2 y{q1 * h, q2 * h};
                double r = std::hypot(y.x - x.x, y.y - x.y);
                if (r <= rho_half) continue;
                double cut = (r >= rho) ? 1.0 : smoothstep(r, rho_half, rho);
                double g1, g2;
                kernel_pairs(x, y, g1, g2);
                s1 += cut * g1 * w;
                s2 += cut * g2 * w;
            }
        }
    }
    return {s1 * h * h, s2 * h * h};
}

// polar patch over B(x, rho) clipped to [0,1]^2, integrand (1-cut) * K * w
BoxSums polar_patch(const VorticityField& f, Vec2 x, double rho, int n_theta) {
    double s1 = 0.0, s2 = 0.0;
    const double rho_half = 0.5 * rho;
    for (int it = 0; it < n_theta; ++it) {
        double th = 2.0 * kPi * (it + 0.5) / n_theta;
        double c = std::cos(th), s = std::sin(th);
        double rmax = wall_clip(x, c, s, rho);
        if (rmax <= 0.0) continue;
        for (int g = 0; g < kGL; ++g) {
            double r = rmax * kGLx[g];
            double cut = 1.0 - smoothstep(r, rho_half, rho);
            if (cut == 0.0) continue;
            double wgt = rmax * kGLw[g] * (2.0 * kPi / n_theta) * r;
            Vec2 y{x.x + r * c, x.y + r * s};
            double w = value_ext(f, y);
            double g1, g2;
            kernel_pairs(x, y, g1, g2);
            s1 += wgt * cut * g1 * w;
            s2 += wgt * cut * g2 * w;
        }
    }
    return {s1, s2};
}

// one expanding square shell of period-2 image blocks: the L-shaped region
// [0, 2s+1]^2 \ [0, 2s-1]^2 in unit-cell coordinates.  Full period blocks per
// shell make the double-odd cancellation complete, leaving a ~1/R^2 tail.
BoxSums image_shell(const VorticityField& f, Vec2 x, int shell, bool parallel) {
    const int n2 = f.n() / 2;
    const double h = f.grid().h;
    double s1 = 0.0, s2 = 0.0;

    const long lo = 2L * shell - 1, hi = 2L * shell + 1;
    struct Range {
        long a1, b1, a2, b2;
    };
    Range parts[2] = {
        {1, hi * n2 - 1, lo * n2 + 1, hi * n2 - 1},
        {lo * n2 + 1, hi * n2 - 1, 1, lo * n2 - 1}};

    for (const Range& rg : parts) {
        if (rg.b1 < rg.a1 || rg.b2 < rg.a2) continue;
        if (parallel) {
#pragma omp parallel for schedule(static) reduction(+ : s1, s2)
            for (long q2 = rg.a2; q2 <= rg.b2; ++q2) {
                for (long q1 = rg.a1; q1 <= rg.b1; ++q1) {
                    double w = node_value_ext(f, q1, q2);
                    if (w == 0.0) continue;
                    double g1, g2;
                    kernel_pairs(x, Vec2{q1 * h, q2 * h}, g1, g2);
                    s1 += g1 * w;
                    s2 += g2 * w;
                }
            }
        } else {
            for (long q2 = rg.a2; q2 <= rg.b2; ++q2) {
                for (long q1 = rg.a1; q1 <= rg.b1; ++q1) {
                    double w = node_value_ext(f, q1, q2);
                    if (w == 0.0) continue;
                    double g1, g2;
                    kernel_pairs(x, Vec2{q1 * h, q2 * h}, g1, g2);
                    s1 += g1 * w;
                    s2 += g2 * w;
                }
            }
        }
    }
    return {s1 * h * h, s2 * h * h};
}

QEvaluation q_kernel_impl(const VorticityField& f, Vec2 x, int images,
                          const KernelQuadOptions& opts, bool parallel) {
    if (images < 1) throw InvalidArgument("q_kernel: images must be >= 1");
    const double h = f.grid().h;
    if (x.x < h || x.y < h || x.x > 1.0 - h || x.y > 1.0 - h)
        throw AxisPoint("q_kernel: point must be off the axes by at least one grid cell");

    const double rho = opts.patch_radius_cells * h;
    BoxSums far = box_grid_sum(f, x, rho, parallel);
    BoxSums near = polar_patch(f, x, rho, opts.n_theta);

    QEvaluation out;
    out.point = x;
    out.method = QEvaluation::Method::Kernel;
    out.meta.exclusion_radius = rho;
    out.meta.images = images;
    out.meta.image_cells = (2 * images + 1) * (2 * images + 1) - 1; // unit cells covered

    double t1 = far.g1 + near.g1, t2 = far.g2 + near.g2;
    for (int s = 1; s <= images; ++s) {
        BoxSums sh = image_shell(f, x, s, parallel);
        out.meta.shell_sums_q1.push_back(kKernelC0 * sh.g1);
        out.meta.shell_sums_q2.push_back(kKernelC0 * sh.g2);
        t1 += sh.g1;
        t2 += sh.g2;
    }
    // the truncated tail follows C / R^2 with outer shell radius R = 2s+1;
    // with shell_N = tail(N-1) - tail(N) the remaining tail equals
    // shell_N (2N-1)^2 / (8N), one Richardson step on the partial sums
    double corr1 = 0.0, corr2 = 0.0;
    if (images >= 2) {
        const double N = images;
        const double factor = (2.0 * N - 1.0) * (2.0 * N - 1.0) / (8.0 * N);
        corr1 = (out.meta.shell_sums_q1.back() / kKernelC0) * factor;
        corr2 = (out.meta.shell_sums_q2.back() / kKernelC0) * factor;
    }
    out.q1 = kKernelC0 * (t1 + corr1);
    out.q2 = kKernelC0 * (t2 + corr2);
    out.meta.est_error = kKernelC0 * std::max(std::abs(corr1), std::abs(corr2));
    return out;
}

} // namespace

QEvaluation q_spectral(const VelocityBundle& b, Vec2 x) {
    QEvaluation out;
    out.point = x;
    out.method = QEvaluation::Method::Spectral;

    const bool ax1 = std::abs(x.x) < kAxisEps;
    const bool ax2 = std::abs(x.y) < kAxisEps;

    const double u1 = b.interp(b.u1, x);
    const double u2 = b.interp(b.u2, x);
    const double d11 = b.interp(b.du11, x);
    const double d12 = b.interp(b.du12, x);
    const double d21 = b.interp(b.du21, x);
    const double d22 = b.interp(b.du22, x);

    out.q1 = ax1 ? -d11 : -u1 / x.x;
    out.q2 = ax2 ? d22 : u2 / x.y;

    if (!ax1) {
        out.dq[0][0] = -(d11 + out.q1) / x.x;
        out.dq[0][1] = -d12 / x.x;
    } else {
        // one-sided cubic differences of q1 along x1 off the axis
        const double h = b.grid.h;
        auto q1_at = [&](double x1) {
            Vec2 p{x1, x.y};
            return -b.interp(b.u1, p) / x1;
        };
        double f0 = out.q1, f1 = q1_at(h), f2 = q1_at(2 * h), f3 = q1_at(3 * h);
        out.dq[0][0] = (-11.0 * f0 + 18.0 * f1 - 9.0 * f2 + 2.0 * f3) / (6.0 * h);
        auto q1_axis = [&](double x2) { return -b.interp(b.du11, Vec2{0.0, x2}); };
        out.dq[0][1] = (q1_axis(x.y + h) - q1_axis(x.y - h)) / (2.0 * h);
    }
    if (!ax2) {
        out.dq[1][0] = d21 / x.y;
        out.dq[1][1] = (d22 - out.q2) / x.y;
    } else {
        const double h = b.grid.h;
        auto q2_at = [&](double x2) {
            Vec2 p{x.x, x2};
            return b.interp(b.u2, p) / x2;
        };
        double f0 = out.q2, f1 = q2_at(h), f2 = q2_at(2 * h), f3 = q2_at(3 * h);
        out.dq[1][1] = (-11.0 * f0 + 18.0 * f1 - 9.0 * f2 + 2.0 * f3) / (6.0 * h);
        auto q2_axis = [&](double x1) { return b.interp(b.du22, Vec2{x1, 0.0}); };
        out.dq[1][0] = (q2_axis(x.x + h) - q2_axis(x.x - h)) / (2.0 * h);
    }
    return out;
}

QEvaluation q_spectral(const VorticityField& f, Vec2 x) {
    return q_spectral(make_velocity_bundle(f), x);
}

QEvaluation q_kernel(const VorticityField& f, Vec2 x, int images, const KernelQuadOptions& opts) {
    return q_kernel_impl(f, x, images, opts, opts.policy == ExecPolicy::Parallel);
}

namespace serial {
QEvaluation q_kernel(const VorticityField& f, Vec2 x, int images, const KernelQuadOptions& opts) {
    return q_kernel_impl(f, x, images, opts, false);
}
} // namespace serial

// --- principal value ----------------------------------------------------------

namespace {

// grid part of the PV volume integral, cutoff at patch radius
double pv_grid_sum(const VorticityField& f, Vec2 x, int i, int j, double P, bool parallel) {
    const int n2 = f.n() / 2;
    const double h = f.grid().h;
    const double P_half = 0.5 * P;
    double acc = 0.0;
    if (parallel) {
#pragma omp parallel for schedule(static) reduction(+ : acc)
        for (int q2 = 1; q2 < n2; ++q2) {
            for (int q1 = 1; q1 < n2; ++q1) {
                double w = node_value_ext(f, q1, q2);
                if (w == 0.0) continue;
                Vec2 y{q1 * h, q2 * h};
                double r = std::hypot(y.x - x.x, y.y - x.y);
                if (r <= P_half) continue;
                double cut = (r >= P) ? 1.0 : smoothstep(r, P_half, P);
                acc += cut * kernel_pair_dx(i, j, x, y) * w;
            }
        }
    } else {
        for (int q2 = 1; q2 < n2; ++q2) {
            for (int q1 = 1; q1 < n2; ++q1) {
                double w = node_value_ext(f, q1, q2);
                if (w == 0.0) continue;
                Vec2 y{q1 * h, q2 * h};
                double r = std::hypot(y.x - x.x, y.y - x.y);
                if (r <= P_half) continue;
                double cut = (r >= P) ? 1.0 : smoothstep(r, P_half, P);
                acc += cut * kernel_pair_dx(i, j, x, y) * w;
            }
        }
    }
    return acc * h * h;
}

// annulus delta <= r <= P, weighted by (1 - cutoff), polar quadrature clipped
// to the box; log-radial substitution resolves the 1/r^2 peak at r = delta
double pv_annulus(const VorticityField& f, Vec2 x, int i, int j, double delta, double P,
                  int n_theta) {
    double acc = 0.0;
    const double P_half = 0.5 * P;
    for (int it = 0; it < n_theta; ++it) {
        double th = 2.0 * kPi * (it + 0.5) / n_theta;
        double c = std::cos(th), s = std::sin(th);
        double rmax = wall_clip(x, c, s, P);
        if (rmax <= delta) continue;
        const double lspan = std::log(rmax / delta);
        for (int g = 0; g < kGL; ++g) {
            double r = delta * std::exp(lspan * kGLx[g]);
            double cut = 1.0 - smoothstep(r, P_half, P);
            if (cut == 0.0) continue;
            double wgt = lspan * kGLw[g] * (2.0 * kPi / n_theta) * r * r;
            Vec2 y{x.x + r * c, x.y + r * s};
            acc += wgt * cut * kernel_pair_dx(i, j, x, y) * value_ext(f, y);
        }
    }
    return acc;
}

double pv_image_deriv(const VorticityField& f, Vec2 x, int i, int j, int images, bool parallel) {
    const int n2 = f.n() / 2;
    const double h = f.grid().h;
    double acc = 0.0;
    // same period-block region as q_kernel: [0, 2*images+1]^2 minus [0,1]^2
    const long top = static_cast<long>(2 * images + 1) * n2 - 1;
    if (parallel) {
#pragma omp parallel for schedule(static) reduction(+ : acc)
        for (long q2 = 1; q2 <= top; ++q2) {
            bool out2 = q2 > n2 - 1;
            for (long q1 = (out2 ? 1 : n2 + 1); q1 <= top; ++q1) {
                double w = node_value_ext(f, q1, q2);
                if (w == 0.0) continue;
                acc += kernel_pair_dx(i, j, x, Vec2{q1 * h, q2 * h}) * w;
            }
        }
    } else {
        for (long q2 = 1; q2 <= top; ++q2) {
            bool out2 = q2 > n2 - 1;
            for (long q1 = (out2 ? 1 : n2 + 1); q1 <= top; ++q1) {
                double w = node_value_ext(f, q1, q2);
                if (w == 0.0) continue;
                acc += kernel_pair_dx(i, j, x, Vec2{q1 * h, q2 * h}) * w;
            }
        }
    }
    return acc * h * h;
}

double circle_integral(const VorticityField&, Vec2 x, int i, int j, double delta, int n_theta) {
    // int_{dB(delta,x)} G_i^i nu_j dsigma
    KernelId id{i, i};
    double acc = 0.0;
    for (int it = 0; it < n_theta; ++it) {
        double th = 2.0 * kPi * (it + 0.5) / n_theta;
        double nu[2] = {std::cos(th), std::sin(th)};
        Vec2 y{x.x + delta * nu[0], x.y + delta * nu[1]};
        acc += kernel_value(id, x, y) * nu[j - 1];
    }
    return acc * delta * (2.0 * kPi / n_theta);
}

} // namespace

double pv_circle_term(const VorticityField& f, Vec2 x, int i, int j, double delta, int n_theta) {
    double wx = sample(f, x).value;
    return -wx * circle_integral(f, x, i, j, delta, n_theta);
}

PvResult dq_principal_value(const VorticityField& f, Vec2 x, int j, int i,
                            const std::vector<double>& radii, const PvOptions& opts) {
    if (radii.size() < 2) throw InvalidArgument("dq_principal_value: need at least two radii");
    for (size_t k = 1; k < radii.size(); ++k)
        if (!(radii[k] < radii[k - 1]))
            throw InvalidArgument("dq_principal_value: radii must be strictly decreasing");
    if (i != 1 && i != 2) throw InvalidArgument("dq_principal_value: i must be 1 or 2");
    if (j != 1 && j != 2) throw InvalidArgument("dq_principal_value: j must be 1 or 2");

    const double h = f.grid().h;
    const bool parallel = opts.policy == ExecPolicy::Parallel;
    const double P = std::max(opts.patch_radius_cells * h, 1.5 * radii.front());

    const double far = pv_grid_sum(f, x, i, j, P, parallel);
    const double img = pv_image_deriv(f, x, i, j, opts.images, parallel);
    const double wx = sample(f, x).value;

    PvResult res;
    res.radii = radii;
    for (double delta : radii) {
        double ann = pv_annulus(f, x, i, j, delta, P, opts.n_theta);
        double circ = -wx * circle_integral(f, x, i, j, delta, opts.n_theta);
        res.circle_terms.push_back(circ);
        res.per_radius.push_back(kKernelC0 * (far + ann + circ + img));
    }
    // linear Richardson in delta on the last two radii
    size_t m = res.per_radius.size();
    double d1 = radii[m - 2], d2 = radii[m - 1];
    double v1 = res.per_radius[m - 2], v2 = res.per_radius[m - 1];
    res.value = (v2 * d1 - v1 * d2) / (d1 - d2);
    return res;
}

double calibrate_c0(int n, int images) {
    TorusGrid g(n);
    VorticityField f(g);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            f.value(i, j) = std::sin(kPi * g.node(i)) * std::sin(kPi * g.node(j));
    Vec2 probe{0.2, 0.3};
    QEvaluation sp = q_spectral(f, probe);
    QEvaluation kq = q_kernel(f, probe, images);
    // kq.q1 already carries kKernelC0; rescale to the raw quadrature value
    double raw = kq.q1 / kKernelC0;
    return sp.q1 / raw;
}

} // namespace hypflow
