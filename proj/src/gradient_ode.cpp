#include "hypflow/gradient_ode.hpp"

#include <algorithm>
#include <cmath>

namespace hypflow {

namespace {

void check_grid(const std::vector<double>& t, const std::vector<double>& y, const char* who) {
    if (t.size() != y.size() || t.size() < 2)
        throw InvalidArgument(std::string(who) + ": grid/value size mismatch");
}

// indices of the 4-point stencil around interval k
inline void stencil4(size_t k, size_t n, size_t idx[4]) {
    size_t base = (k == 0) ? 0 : (k + 2 >= n ? n - 4 : k - 1);
    for (int j = 0; j < 4; ++j) idx[j] = base + j;
}

inline double lagrange4(const double tx[4], const double yx[4], double tq) {
    double acc = 0.0;
    for (int i = 0; i < 4; ++i) {
        double w = yx[i];
        for (int j = 0; j < 4; ++j)
            if (j != i) w *= (tq - tx[j]) / (tx[i] - tx[j]);
        acc += w;
    }
    return acc;
}

} // namespace

std::vector<double> cumtrapz(const std::vector<double>& t, const std::vector<double>& y) {
    check_grid(t, y, "cumtrapz");
    std::vector<double> out(t.size(), 0.0);
    for (size_t k = 1; k < t.size(); ++k)
        out[k] = out[k - 1] + 0.5 * (t[k] - t[k - 1]) * (y[k] + y[k - 1]);
    return out;
}

std::vector<double> cumquad_cubic(const std::vector<double>& t, const std::vector<double>& y) {
    check_grid(t, y, "cumquad_cubic");
    const size_t n = t.size();
    if (n < 4) return cumtrapz(t, y);
    std::vector<double> out(n, 0.0);
    // two-point Gauss integrates the local cubic exactly
    constexpr double g1 = 0.5 - 0.28867513459481288705; // (1 - 1/sqrt3)/2
    constexpr double g2 = 0.5 + 0.28867513459481288705;
    for (size_t k = 0; k + 1 < n; ++k) {
        size_t idx[4];
        stencil4(k, n, idx);
        double tx[4] = {t[idx[0]], t[idx[1]], t[idx[2]], t[idx[3]]};
        double yx[4] = {y[idx[0]], y[idx[1]], y[idx[2]], y[idx[3]]};
        double a = t[k], b = t[k + 1], len = b - a;
        double v = 0.5 * len *
                   (lagrange4(tx, yx, a + g1 * len) + lagrange4(tx, yx, a + g2 * len));
        out[k + 1] = out[k] + v;
    }
    return out;
}

double interp_cubic(const std::vector<double>& t, const std::vector<double>& y, double tq) {
    check_grid(t, y, "interp_cubic");
    const size_t n = t.size();
    if (n < 4) {
        // linear fallback
        size_t k = std::upper_bound(t.begin(), t.end(), tq) - t.begin();
        k = std::clamp<size_t>(k, 1, n - 1) - 1;
        double th = (tq - t[k]) / (t[k + 1] - t[k]);
        return (1 - th) * y[k] + th * y[k + 1];
    }
    size_t k = std::upper_bound(t.begin(), t.end(), tq) - t.begin();
    k = std::clamp<size_t>(k, 1, n - 1) - 1;
    size_t idx[4];
    stencil4(k, n, idx);
    double tx[4] = {t[idx[0]], t[idx[1]], t[idx[2]], t[idx[3]]};
    double yx[4] = {y[idx[0]], y[idx[1]], y[idx[2]], y[idx[3]]};
    return lagrange4(tx, yx, tq);
}

std::vector<double> resample_cubic(const std::vector<double>& t, const std::vector<double>& y,
                                   const std::vector<double>& t_new) {
    std::vector<double> out(t_new.size());
    for (size_t k = 0; k < t_new.size(); ++k) out[k] = interp_cubic(t, y, t_new[k]);
    return out;
}

// --- coefficient path -----------------------------------------------------------

CoefficientPath sample_coefficients(const Trajectory& traj, double trace_tol) {
    if (!traj.entered || traj.coeffs.size() < 2)
        throw InvalidArgument("sample_coefficients: trajectory never entered the box");
    CoefficientPath p;
    for (const auto& s : traj.coeffs) {
        if (!p.t.empty() && s.t - p.t.back() < 1e-14) continue; // drop duplicate event times
        p.t.push_back(s.t);
        p.a.push_back(s.a1);
        p.a_alt.push_back(s.a2);
        p.b.push_back(s.b);
        p.c.push_back(s.c);
        p.q1.push_back(s.q1);
        p.q2.push_back(s.q2);
    }
    p.A = cumquad_cubic(p.t, p.a);
    double scale = 0.0;
    for (double v : p.a) scale = std::max(scale, std::abs(v));
    double defect = 0.0;
    for (size_t k = 0; k < p.a.size(); ++k)
        defect = std::max(defect, std::abs(p.a[k] - p.a_alt[k]));
    p.trace_defect = defect / std::max(scale, 1e-30); // relative to max |a|
    (void)trace_tol;
    return p;
}

CoefficientPath make_path(std::vector<double> t, std::vector<double> a, std::vector<double> b,
                          std::vector<double> c) {
    CoefficientPath p;
    p.t = std::move(t);
    p.a = std::move(a);
    p.b = std::move(b);
    p.c = std::move(c);
    p.a_alt = p.a;
    p.q1.assign(p.t.size(), 0.0);
    p.q2.assign(p.t.size(), 0.0);
    p.A = cumquad_cubic(p.t, p.a);
    return p;
}

std::vector<GradientState> integrate_exact(const CoefficientPath& p, GradientState xi0,
                                           int substeps) {
    const size_t n = p.size();
    std::vector<GradientState> out(n);
    out[0] = xi0;
    GradientState s = xi0;
    for (size_t k = 0; k + 1 < n; ++k) {
        double t0 = p.t[k], t1 = p.t[k + 1];
        double dt = (t1 - t0) / substeps;
        for (int m = 0; m < substeps; ++m) {
            double tc = t0 + m * dt;
            auto deriv = [&](double tt, GradientState g) {
                double av = interp_cubic(p.t, p.a, tt);
                double bv = interp_cubic(p.t, p.b, tt);
                double cv = interp_cubic(p.t, p.c, tt);
                return GradientState{av * g.xi1 + cv * g.xi2, bv * g.xi1 - av * g.xi2};
            };
            GradientState k1 = deriv(tc, s);
            GradientState k2 = deriv(tc + dt / 2, {s.xi1 + dt / 2 * k1.xi1, s.xi2 + dt / 2 * k1.xi2});
            GradientState k3 = deriv(tc + dt / 2, {s.xi1 + dt / 2 * k2.xi1, s.xi2 + dt / 2 * k2.xi2});
            GradientState k4 = deriv(tc + dt, {s.xi1 + dt * k3.xi1, s.xi2 + dt * k3.xi2});
            s.xi1 += dt / 6 * (k1.xi1 + 2 * k2.xi1 + 2 * k3.xi1 + k4.xi1);
            s.xi2 += dt / 6 * (k1.xi2 + 2 * k2.xi2 + 2 * k3.xi2 + k4.xi2);
        }
        out[k + 1] = s;
    }
    return out;
}

std::vector<GradientState> model_diagonal(const CoefficientPath& p, GradientState xi0) {
    std::vector<GradientState> out(p.size());
    for (size_t k = 0; k < p.size(); ++k)
        out[k] = {xi0.xi1 * std::exp(p.A[k]), xi0.xi2 * std::exp(-p.A[k])};
    return out;
}

std::vector<GradientState> model_c_zero(const CoefficientPath& p, GradientState xi0) {
    std::vector<double> be2A(p.size());
    for (size_t k = 0; k < p.size(); ++k) be2A[k] = p.b[k] * std::exp(2.0 * p.A[k]);
    auto J = cumquad_cubic(p.t, be2A);
    std::vector<GradientState> out(p.size());
    for (size_t k = 0; k < p.size(); ++k) {
        out[k].xi1 = xi0.xi1 * std::exp(p.A[k]);
        out[k].xi2 = std::exp(-p.A[k]) * (xi0.xi2 + xi0.xi1 * J[k]);
    }
    return out;
}

// --- Volterra -------------------------------------------------------------------

std::vector<double> f_plus(const CoefficientPath& p, const std::vector<double>& g) {
    std::vector<double> integrand(p.size());
    for (size_t k = 0; k < p.size(); ++k)
        integrand[k] = p.a[k] * std::exp(-p.A[k]) * g[k];
    auto I = cumquad_cubic(p.t, integrand);
    std::vector<double> out(p.size());
    for (size_t k = 0; k < p.size(); ++k) out[k] = g[k] + std::exp(p.A[k]) * I[k];
    return out;
}

std::vector<double> f_minus(const CoefficientPath& p, const std::vector<double>& g) {
    std::vector<double> integrand(p.size());
    for (size_t k = 0; k < p.size(); ++k)
        integrand[k] = p.a[k] * std::exp(p.A[k]) * g[k];
    auto I = cumquad_cubic(p.t, integrand);
    std::vector<double> out(p.size());
    for (size_t k = 0; k < p.size(); ++k) out[k] = g[k] - std::exp(-p.A[k]) * I[k];
    return out;
}

VolterraSolution volterra_solve(const CoefficientPath& p, const std::vector<double>& g1,
                                const std::vector<double>& g2) {
    check_grid(p.t, g1, "volterra_solve");
    check_grid(p.t, g2, "volterra_solve");
    VolterraSolution sol;
    sol.phi1 = f_plus(p, g1);

    std::vector<double> inner(p.size());
    for (size_t k = 0; k < p.size(); ++k)
        inner[k] = std::exp(p.A[k]) * p.b[k] * sol.phi1[k];
    auto I = cumquad_cubic(p.t, inner);
    auto fm = f_minus(p, g2);
    sol.phi2.resize(p.size());
    for (size_t k = 0; k < p.size(); ++k)
        sol.phi2[k] = fm[k] + std::exp(-p.A[k]) * I[k];

    // residual of phi = P^ phi + g, evaluated independently
    std::vector<double> r1(p.size()), r2(p.size());
    for (size_t k = 0; k < p.size(); ++k) {
        r1[k] = p.a[k] * sol.phi1[k];
        r2[k] = p.b[k] * sol.phi1[k] - p.a[k] * sol.phi2[k];
    }
    auto P1 = cumquad_cubic(p.t, r1);
    auto P2 = cumquad_cubic(p.t, r2);
    double scale = 1.0;
    for (size_t k = 0; k < p.size(); ++k)
        scale = std::max({scale, std::abs(sol.phi1[k]), std::abs(sol.phi2[k])});
    for (size_t k = 0; k < p.size(); ++k) {
        sol.residual = std::max(sol.residual, std::abs(sol.phi1[k] - P1[k] - g1[k]) / scale);
        sol.residual = std::max(sol.residual, std::abs(sol.phi2[k] - P2[k] - g2[k]) / scale);
    }
    return sol;
}

WRepresentation w_representation(const CoefficientPath& p, GradientState xi0,
                                 const std::vector<GradientState>& xi_path) {
    if (xi_path.size() != p.size())
        throw InvalidArgument("w_representation: path size mismatch");
    const size_t n = p.size();

    // route 1: w1 = xi1(0) + int c xi2
    std::vector<double> cxi2(n);
    for (size_t k = 0; k < n; ++k) cxi2[k] = p.c[k] * xi_path[k].xi2;
    auto I = cumquad_cubic(p.t, cxi2);
    WRepresentation rep;
    rep.w1.resize(n);
    for (size_t k = 0; k < n; ++k) rep.w1[k] = xi0.xi1 + I[k];

    auto Fw = f_plus(p, rep.w1);

    // xi2 representation: xi2(0) e^-A + e^-A int e^A b (F+ w1)
    std::vector<double> inner(n);
    for (size_t k = 0; k < n; ++k) inner[k] = std::exp(p.A[k]) * p.b[k] * Fw[k];
    auto J = cumquad_cubic(p.t, inner);

    // route 2: the nested first line of the w <-> xi relation
    std::vector<double> emAc(n);
    for (size_t k = 0; k < n; ++k) emAc[k] = std::exp(-p.A[k]) * p.c[k];
    auto K0 = cumquad_cubic(p.t, emAc);
    std::vector<double> outer(n);
    for (size_t k = 0; k < n; ++k) outer[k] = emAc[k] * J[k];
    auto K1 = cumquad_cubic(p.t, outer);

    double scale = 1.0;
    for (size_t k = 0; k < n; ++k)
        scale = std::max({scale, std::abs(xi_path[k].xi1), std::abs(xi_path[k].xi2),
                          std::abs(rep.w1[k])});
    for (size_t k = 0; k < n; ++k) {
        double xi2_rep = xi0.xi2 * std::exp(-p.A[k]) + std::exp(-p.A[k]) * J[k];
        double w1_nested = xi0.xi1 + xi0.xi2 * K0[k] + K1[k];
        rep.residual = std::max(rep.residual, std::abs(xi_path[k].xi1 - Fw[k]) / scale);
        rep.residual = std::max(rep.residual, std::abs(xi_path[k].xi2 - xi2_rep) / scale);
        rep.residual = std::max(rep.residual, std::abs(rep.w1[k] - w1_nested) / scale);
    }
    return rep;
}

// --- Willett ---------------------------------------------------------------------

namespace {

std::vector<double> willett_on_grid(const std::vector<double>& t, const std::vector<double>& f0,
                                    const std::vector<double>& f1, const std::vector<double>& f2,
                                    const std::vector<double>& v1, const std::vector<double>& v2) {
    const size_t n = t.size();
    auto prod = [&](const std::vector<double>& x, const std::vector<double>& y) {
        std::vector<double> r(n);
        for (size_t k = 0; k < n; ++k) r[k] = x[k] * y[k];
        return r;
    };
    auto E1arg = cumtrapz(t, prod(v1, f1));
    auto I10 = cumtrapz(t, prod(v1, f0));
    auto I12 = cumtrapz(t, prod(v1, f2));
    std::vector<double> P0(n), P2(n);
    for (size_t k = 0; k < n; ++k) {
        double E1 = std::exp(E1arg[k]);
        P0[k] = f0[k] + f1[k] * E1 * I10[k];
        P2[k] = f2[k] + f1[k] * E1 * I12[k];
    }
    auto E2arg = cumtrapz(t, prod(v2, P2));
    auto I20 = cumtrapz(t, prod(v2, P0));
    std::vector<double> H(n);
    for (size_t k = 0; k < n; ++k) H[k] = P0[k] + P2[k] * std::exp(E2arg[k]) * I20[k];
    return H;
}

std::vector<double> halve_grid(const std::vector<double>& t) {
    std::vector<double> out;
    out.reserve(t.size() * 2 - 1);
    for (size_t k = 0; k + 1 < t.size(); ++k) {
        out.push_back(t[k]);
        out.push_back(0.5 * (t[k] + t[k + 1]));
    }
    out.push_back(t.back());
    return out;
}

std::vector<double> resample_nonneg(const std::vector<double>& t, const std::vector<double>& y,
                                    const std::vector<double>& tn) {
    auto r = resample_cubic(t, y, tn);
    for (double& v : r) v = std::max(v, 0.0);
    return r;
}

} // namespace

std::vector<double> willett_bound(const WillettInputs& in, double tol) {
    check_grid(in.t, in.f0, "willett_bound");
    for (const auto* v : {&in.f0, &in.f1, &in.f2, &in.v1, &in.v2}) {
        if (v->size() != in.t.size()) throw InvalidArgument("willett_bound: size mismatch");
        for (double x : *v)
            if (x < -1e-14) throw InvalidArgument("willett_bound: inputs must be nonnegative");
    }

    std::vector<double> t = in.t, f0 = in.f0, f1 = in.f1, f2 = in.f2, v1 = in.v1, v2 = in.v2;
    std::vector<double> H_prev = willett_on_grid(t, f0, f1, f2, v1, v2);
    size_t stride = 1;

    for (int level = 0; level < 8; ++level) {
        auto tn = halve_grid(t);
        auto f0n = resample_nonneg(t, f0, tn);
        auto f1n = resample_nonneg(t, f1, tn);
        auto f2n = resample_nonneg(t, f2, tn);
        auto v1n = resample_nonneg(t, v1, tn);
        auto v2n = resample_nonneg(t, v2, tn);
        auto Hn = willett_on_grid(tn, f0n, f1n, f2n, v1n, v2n);

        double diff = 0.0, scale = 0.0;
        for (size_t k = 0; k < in.t.size(); ++k) {
            size_t base = k * stride * 2; // original nodes keep even positions
            diff = std::max(diff, std::abs(Hn[base] - H_prev[k * stride]));
            scale = std::max(scale, std::abs(Hn[base])); // scale-free: keeps H linear in f0
        }
        t = std::move(tn);
        f0 = std::move(f0n);
        f1 = std::move(f1n);
        f2 = std::move(f2n);
        v1 = std::move(v1n);
        v2 = std::move(v2n);
        H_prev = std::move(Hn);
        stride *= 2;
        if (diff <= tol * scale) break;
    }

    std::vector<double> out(in.t.size());
    for (size_t k = 0; k < in.t.size(); ++k) out[k] = H_prev[k * stride];
    return out;
}

GronwallData xi_bounds(const CoefficientPath& p, GradientState xi0) {
    // The integrands involve |a|, |b|, |c|, which kink at sign changes, so
    // everything is evaluated by monotone trapezoids on a refined grid: the
    // smooth signed coefficients are upsampled cubically, absolute values are
    // taken on the fine grid, and the results are read back at the original
    // nodes.  This keeps the f_i nonnegative and nondecreasing by
    // construction while hitting the 1e-8 quadrature target.
    constexpr int kRefine = 8;
    const size_t n0 = p.size();
    const size_t n = (n0 - 1) * kRefine + 1;

    std::vector<double> t(n), a(n), b(n), c(n);
    for (size_t k = 0; k + 1 < n0; ++k)
        for (int m = 0; m < kRefine; ++m) {
            double th = static_cast<double>(m) / kRefine;
            t[k * kRefine + m] = p.t[k] + th * (p.t[k + 1] - p.t[k]);
        }
    t[n - 1] = p.t.back();
    for (size_t k = 0; k < n; ++k) {
        a[k] = interp_cubic(p.t, p.a, t[k]);
        b[k] = interp_cubic(p.t, p.b, t[k]);
        c[k] = interp_cubic(p.t, p.c, t[k]);
    }
    auto A = cumtrapz(t, a);

    std::vector<double> eA(n), emA(n), absa(n), absb(n), absc(n);
    for (size_t k = 0; k < n; ++k) {
        eA[k] = std::exp(A[k]);
        emA[k] = std::exp(-A[k]);
        absa[k] = std::abs(a[k]);
        absb[k] = std::abs(b[k]);
        absc[k] = std::abs(c[k]);
    }

    std::vector<double> emAc(n), e2Ab(n);
    for (size_t k = 0; k < n; ++k) {
        emAc[k] = emA[k] * absc[k];
        e2Ab[k] = eA[k] * eA[k] * absb[k];
    }
    auto f2 = cumtrapz(t, emAc);
    auto Jb = cumtrapz(t, e2Ab);
    std::vector<double> f1_int(n);
    for (size_t k = 0; k < n; ++k) f1_int[k] = emAc[k] * Jb[k];
    auto f1 = cumtrapz(t, f1_int);

    std::vector<double> f0(n), v1(n), v2(n);
    for (size_t k = 0; k < n; ++k) {
        f0[k] = std::abs(xi0.xi1) + f2[k] * std::abs(xi0.xi2);
        v1[k] = absa[k] * emA[k];
        v2[k] = absb[k] * eA[k];
    }

    auto Hf0 = willett_bound({t, f0, f1, f2, v1, v2});

    // |xi1| <= H f0 + e^A int |a| e^-A H f0
    std::vector<double> i1(n);
    for (size_t k = 0; k < n; ++k) i1[k] = absa[k] * emA[k] * Hf0[k];
    auto L = cumtrapz(t, i1);

    // |xi2| <= |xi2(0)| e^-A + e^-A [ int e^A |b| H f0 + int e^2A |b| int |a| e^-A H f0 ]
    std::vector<double> i2(n), i3(n);
    for (size_t k = 0; k < n; ++k) {
        i2[k] = eA[k] * absb[k] * Hf0[k];
        i3[k] = eA[k] * eA[k] * absb[k] * L[k];
    }
    auto M1 = cumtrapz(t, i2);
    auto M2 = cumtrapz(t, i3);

    GronwallData gd;
    gd.t = p.t;
    auto pick = [&](const std::vector<double>& fine) {
        std::vector<double> out(n0);
        for (size_t k = 0; k < n0; ++k) out[k] = fine[std::min(k * kRefine, n - 1)];
        return out;
    };
    gd.f0 = pick(f0);
    gd.f1 = pick(f1);
    gd.f2 = pick(f2);
    gd.v1 = pick(v1);
    gd.v2 = pick(v2);
    gd.Hf0 = pick(Hf0);
    gd.bound_xi1.resize(n0);
    gd.bound_xi2.resize(n0);
    for (size_t k = 0; k < n0; ++k) {
        size_t kk = std::min(k * kRefine, n - 1);
        gd.bound_xi1[k] = Hf0[kk] + eA[kk] * L[kk];
        gd.bound_xi2[k] = std::abs(xi0.xi2) * emA[kk] + emA[kk] * (M1[kk] + M2[kk]);
    }
    return gd;
}

} // namespace hypflow
