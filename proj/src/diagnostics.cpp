#include "hypflow/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace hypflow {

namespace {

// one-sided 95% Student-t quantile, interpolated in 1/df
double t95(int df) {
    static const std::pair<double, double> table[] = {
        {1, 6.314}, {2, 2.920}, {3, 2.353}, {4, 2.132}, {5, 2.015},  {6, 1.943},
        {7, 1.895}, {8, 1.860}, {9, 1.833}, {10, 1.812}, {15, 1.753}, {20, 1.725},
        {30, 1.697}, {60, 1.671}, {120, 1.658}, {1000000, 1.645}};
    if (df < 1) return 6.314;
    for (size_t k = 1; k < std::size(table); ++k) {
        if (df <= table[k].first) {
            double x0 = 1.0 / table[k - 1].first, x1 = 1.0 / table[k].first;
            double y0 = table[k - 1].second, y1 = table[k].second;
            double x = 1.0 / df;
            return y1 + (y0 - y1) * (x - x1) / (x0 - x1);
        }
    }
    return 1.645;
}

struct Ols {
    double slope = 0.0, intercept = 0.0, slope_se = 0.0;
    int n = 0;
};

Ols ols_fit(const std::vector<double>& x, const std::vector<double>& y) {
    Ols o;
    o.n = static_cast<int>(x.size());
    if (o.n < 2) return o;
    double mx = 0.0, my = 0.0;
    for (int k = 0; k < o.n; ++k) {
        mx += x[k];
        my += y[k];
    }
    mx /= o.n;
    my /= o.n;
    double sxx = 0.0, sxy = 0.0;
    for (int k = 0; k < o.n; ++k) {
        sxx += (x[k] - mx) * (x[k] - mx);
        sxy += (x[k] - mx) * (y[k] - my);
    }
    if (sxx == 0.0) return o;
    o.slope = sxy / sxx;
    o.intercept = my - o.slope * mx;
    if (o.n > 2) {
        double rss = 0.0;
        for (int k = 0; k < o.n; ++k) {
            double r = y[k] - (o.intercept + o.slope * x[k]);
            rss += r * r;
        }
        o.slope_se = std::sqrt(rss / (o.n - 2) / sxx);
    }
    return o;
}

struct NodeRegion {
    int i_lo, i_hi, j_lo, j_hi; // inclusive grid index bounds
};

// nodes with lo < x <= hi mapped to indices; x = node(i) = -1 + i h
NodeRegion region_indices(const TorusGrid& g, double x1_lo, double x1_hi, double x2_lo,
                          double x2_hi, bool strict_lo = true) {
    NodeRegion r;
    auto lo_idx = [&](double v) {
        int i = static_cast<int>(std::ceil((v + 1.0) / g.h - (strict_lo ? 0.0 : 1e-12)));
        if (strict_lo && std::abs(g.node(i) - v) < 1e-14) ++i;
        return i;
    };
    auto hi_idx = [&](double v) {
        int i = static_cast<int>(std::floor((v + 1.0) / g.h + 1e-12));
        if (std::abs(g.node(i) - v) < 1e-14) --i; // strict upper bound
        return i;
    };
    r.i_lo = lo_idx(x1_lo);
    r.i_hi = hi_idx(x1_hi);
    r.j_lo = lo_idx(x2_lo);
    r.j_hi = hi_idx(x2_hi);
    return r;
}

} // namespace

// --- growth observer -----------------------------------------------------------

namespace {

GrowthRecord growth_observer_impl(const VorticityField& f, const VelocityBundle& b,
                                  const BoxGeometry& box, const HyperParams& hp, bool parallel) {
    box.validate();
    const TorusGrid& g = f.grid();
    const int n = g.n;
    const double h = g.h;
    if ((box.delta1 + box.delta3) / h < 8.0 || box.delta2 / h < 8.0)
        throw UnderResolvedBox("growth_observer: Dhat must span at least 8 cells per side");

    GrowthRecord rec;
    rec.t = f.time();
    const double al = box.alpha;
    const int o = g.origin_index();

    // weighted-gradient magnitude at a [0,1]^2 node (x = 1 wraps to -1)
    auto gval = [&](int i, int j) {
        double x1 = g.node(o + i), x2 = g.node(o + j);
        size_t idx = static_cast<size_t>(g.wrap(o + j)) * n + g.wrap(o + i);
        return std::max(std::pow(x1, al) * std::abs(b.gw1[idx]),
                        std::pow(x2, al) * std::abs(b.gw2[idx]));
    };

    NodeRegion D = region_indices(g, 0.0, box.delta1, 0.0, box.delta2);
    NodeRegion Dh = region_indices(g, 0.0, box.delta1 + box.delta3, 0.0, box.delta2);

    double mD = 0.0, mDh = 0.0, sg = 0.0, qmin = 1e300, feed = 0.0;

#pragma omp parallel for schedule(static) reduction(max : mDh) if (parallel)
    for (int j = Dh.j_lo; j <= Dh.j_hi; ++j)
        for (int i = Dh.i_lo; i <= Dh.i_hi; ++i)
            mDh = std::max(mDh, gval(i - o, j - o));

#pragma omp parallel for schedule(static) reduction(max : mD, sg) reduction(min : qmin) \
    if (parallel)
    for (int j = D.j_lo; j <= D.j_hi; ++j)
        for (int i = D.i_lo; i <= D.i_hi; ++i) {
            mD = std::max(mD, gval(i - o, j - o));
            size_t idx = static_cast<size_t>(j) * n + i;
            sg = std::max(sg, std::hypot(b.gw1[idx], b.gw2[idx]));
            double x1 = g.node(i), x2 = g.node(j);
            double q1 = -b.u1[idx] / x1;
            double q2 = b.u2[idx] / x2;
            qmin = std::min(qmin, std::min(q1, q2));
        }

    // feeding zone: delta1 <= x1 < delta1+delta3, 0 < x2 < delta2
    NodeRegion Fz = region_indices(g, box.delta1, box.delta1 + box.delta3, 0.0, box.delta2);
    Fz.i_lo = static_cast<int>(std::ceil((box.delta1 + 1.0) / g.h - 1e-12)); // include x1 = delta1
#pragma omp parallel for schedule(static) reduction(max : feed) if (parallel)
    for (int j = Fz.j_lo; j <= Fz.j_hi; ++j)
        for (int i = Fz.i_lo; i <= Fz.i_hi; ++i) {
            size_t idx = static_cast<size_t>(j) * n + i;
            double x2 = g.node(j);
            feed = std::max(feed, std::max(std::abs(b.gw1[idx]) / std::pow(x2, 1.0 - al),
                                           std::abs(b.gw2[idx])));
        }

    // square prefix maxima of the weighted gradient for M(x, t)
    const int half = n / 2;
    std::vector<double> S(half + 1, 0.0);
    for (int k = 1; k <= half; ++k) {
        double m = S[k - 1];
        for (int i = 0; i <= k; ++i) {
            m = std::max(m, gval(i, k));
            m = std::max(m, gval(k, i));
        }
        S[k] = m;
    }
    auto M_of = [&](double x1, double x2) {
        double r = std::max(x1, x2);
        int k = std::min(half, static_cast<int>(std::ceil(r / h - 1e-12)));
        return S[k];
    };

    // hyperbolicity margin over [0, rho]^2 (axis nodes take the limit values)
    int k_rho = std::min(half - 1, static_cast<int>(std::floor(hp.rho / h + 1e-12)));
    double margin = 1e300;
#pragma omp parallel for schedule(static) reduction(min : margin) if (parallel)
    for (int j = 0; j <= k_rho; ++j)
        for (int i = 0; i <= k_rho; ++i) {
            int gi = o + i, gj = o + j;
            size_t idx = static_cast<size_t>(gj) * n + gi;
            double x1 = g.node(gi), x2 = g.node(gj);
            double q1 = (i == 0) ? -b.du11[idx] : -b.u1[idx] / x1;
            double q2 = (j == 0) ? b.du22[idx] : b.u2[idx] / x2;
            double r = std::hypot(x1, x2);
            double m = std::min(q1, q2) + hp.A * std::pow(r, 1.0 - al) * M_of(x1, x2) - hp.beta0;
            margin = std::min(margin, m);
        }

    rec.M_D = mD;
    rec.M_Dhat = mDh;
    rec.sup_grad = sg;
    rec.hyper_margin = margin;
    rec.feeding_residual = feed;
    rec.q_min_D = qmin;
    return rec;
}

} // namespace

GrowthRecord growth_observer(const VorticityField& f, const VelocityBundle& b,
                             const BoxGeometry& box, const HyperParams& hp, ExecPolicy policy) {
    return growth_observer_impl(f, b, box, hp, policy == ExecPolicy::Parallel);
}

GrowthRecord growth_observer(const VorticityField& f, const BoxGeometry& box,
                             const HyperParams& hp) {
    return growth_observer_impl(f, make_velocity_bundle(f), box, hp, true);
}

namespace serial {
GrowthRecord growth_observer(const VorticityField& f, const VelocityBundle& b,
                             const BoxGeometry& box, const HyperParams& hp) {
    return growth_observer_impl(f, b, box, hp, false);
}
} // namespace serial

// --- level-set measure -----------------------------------------------------------

HyperbolicityCriterion measure_m(const VorticityField& f0, double level_tolerance) {
    const TorusGrid& g = f0.grid();
    const int n = g.n, o = g.origin_index();
    double vmax = 0.0, vmin = 0.0;
    for (int j = 0; j < n / 2; ++j)
        for (int i = 0; i < n / 2; ++i) {
            double v = f0.value(o + i, o + j);
            vmax = std::max(vmax, v);
            vmin = std::min(vmin, v);
        }
    double scale = std::max(1.0, f0.max_abs());
    if (vmin < -1e-10 * scale)
        throw PreconditionFailed("measure_m: w0 must be nonnegative on [0,1]^2");
    if (vmax <= 0.0) throw DegenerateField("measure_m: w0 vanishes on [0,1]^2");

    long count = 0;
    for (int j = 0; j < n / 2; ++j)
        for (int i = 0; i < n / 2; ++i)
            if (f0.value(o + i, o + j) >= vmax - level_tolerance) ++count;

    HyperbolicityCriterion crit;
    crit.m = static_cast<double>(count) * g.h * g.h;
    return crit;
}

// --- inequality fits ---------------------------------------------------------------

namespace {

// M_Dhat by dense bicubic sampling of the spectral gradient (keeps the
// refinement sweep meaningful when the box spans only a few cells)
double m_dhat_dense(const VelocityBundle& b, const BoxGeometry& box, int samples = 256) {
    double m = 0.0;
    const double w = box.delta1 + box.delta3;
    for (int j = 1; j <= samples; ++j)
        for (int i = 1; i <= samples; ++i) {
            Vec2 p{i * w / samples, j * box.delta2 / samples};
            m = std::max(m, std::max(std::pow(p.x, box.alpha) * std::abs(b.interp(b.gw1, p)),
                                     std::pow(p.y, box.alpha) * std::abs(b.interp(b.gw2, p))));
        }
    return m;
}

InequalityFit finish_fit(std::string name, const std::vector<double>& ratios) {
    InequalityFit fit;
    fit.name = std::move(name);
    fit.sample_count = static_cast<int>(ratios.size());
    double c_full = 0.0, c_half = 0.0;
    for (size_t k = 0; k < ratios.size(); ++k) {
        c_full = std::max(c_full, ratios[k]);
        if (k < ratios.size() / 2) c_half = std::max(c_half, ratios[k]);
    }
    fit.constant = c_full;
    if (c_full <= 0.0) {
        fit.degenerate = true;
        fit.stability_ratio = 1.0;
    } else {
        fit.stability_ratio = c_half / c_full;
    }
    fit.pass = fit.degenerate || (fit.stability_ratio >= 0.5 && fit.stability_ratio <= 2.0);
    return fit;
}

} // namespace

InequalityFit check_q_upper_bound(const VorticityField& f, const VelocityBundle& b,
                                  const BoxGeometry& box, const std::vector<Vec2>& points) {
    box.validate();
    const double winf = f.max_abs();
    const double M = m_dhat_dense(b, box);
    const double dnorm = std::pow(box.delta1 * box.delta1 + box.delta2 * box.delta2,
                                  0.5 * (1.0 - box.alpha));
    std::vector<double> ratios;
    ratios.reserve(points.size());
    for (Vec2 x : points) {
        if (!box.in_D(x)) throw InvalidArgument("check_q_upper_bound: sample point outside D");
        FlowSample s = flow_sample_from_bundle(b, x);
        double d = box.top_distance(x);
        double rhs = winf * (1.0 + std::abs(std::log(d))) + M * dnorm;
        ratios.push_back(std::max(std::abs(s.q1), std::abs(s.q2)) / rhs);
    }
    return finish_fit("lemUpperboundQ", ratios);
}

std::vector<InequalityFit> check_coefficient_bounds(const VorticityField&, const VelocityBundle& b,
                                                    const BoxGeometry& box,
                                                    const std::vector<Vec2>& points,
                                                    const GammaChoice& gm) {
    box.validate();
    if (!(gm.gamma > 0.0 && gm.gamma < 1.0) || !(gm.gamma1 > 0.0 && gm.gamma1 < 1.0) ||
        !(gm.gamma2 > 0.0 && gm.gamma2 < 1.0) || std::abs(gm.gamma1 + gm.gamma2 - 1.0) > 1e-12)
        throw InvalidArgument("check_coefficient_bounds: need gamma in (0,1), gamma1+gamma2 = 1");

    const double M = m_dhat_dense(b, box);
    const double al = box.alpha;
    std::vector<double> rc, rb, rq;
    for (Vec2 x : points) {
        if (!box.in_D(x))
            throw InvalidArgument("check_coefficient_bounds: sample point outside D");
        FlowSample s = flow_sample_from_bundle(b, x);
        double d = box.top_distance(x);
        double logd = 1.0 + std::abs(std::log(d));

        double rhs_c = M * std::pow(x.y, 1.0 - al) +
                       std::pow(x.y, 1.0 - gm.gamma1 - gm.gamma2) * std::pow(x.x, gm.gamma2) *
                           std::pow(d, -1.0 + gm.gamma1 + gm.gamma2);
        rc.push_back(std::abs(s.c) / rhs_c);

        double rhs_b = M * std::pow(x.x, 1.0 - al) * logd +
                       std::pow(x.x, 1.0 - gm.gamma) * std::pow(d, -1.0 + gm.gamma);
        rb.push_back(std::abs(s.b) / rhs_b);

        double xdq1 = s.a1 - s.q1; // x1 dQ1/dx1
        double xdq2 = s.a2 - s.q2; // x2 dQ2/dx2
        double rhs_q1 = M * std::pow(x.x, 1.0 - al) * logd +
                        std::pow(x.x, 1.0 - gm.gamma) * std::pow(d, -1.0 + gm.gamma);
        double rhs_q2 = M * std::pow(x.y, 1.0 - al) * logd +
                        std::pow(x.y, 1.0 - gm.gamma) * std::pow(d, -1.0 + gm.gamma);
        rq.push_back(std::max(std::abs(xdq1) / rhs_q1, std::abs(xdq2) / rhs_q2));
    }
    return {finish_fit("estc", rc), finish_fit("estb", rb), finish_fit("estxdQ", rq)};
}

// --- envelope fit -------------------------------------------------------------------

EnvelopeFit exponential_envelope_fit(const std::vector<double>& t, const std::vector<double>& g) {
    if (t.size() != g.size() || t.size() < 4)
        throw InvalidArgument("exponential_envelope_fit: need matched series, >= 4 records");
    EnvelopeFit fit;
    std::vector<double> tt, yy;
    for (size_t k = 0; k < t.size(); ++k) {
        if (g[k] > 0.0) {
            tt.push_back(t[k]);
            yy.push_back(std::log(g[k]));
        } else {
            ++fit.excluded;
        }
    }
    if (tt.size() < 4) throw InvalidArgument("exponential_envelope_fit: too few positive samples");

    Ols full = ols_fit(tt, yy);
    fit.C2 = full.slope;
    fit.C1 = std::exp(full.intercept);
    for (size_t k = 0; k < tt.size(); ++k) {
        double r = yy[k] - (full.intercept + full.slope * tt[k]);
        fit.max_positive_residual = std::max(fit.max_positive_residual, r);
    }

    // split-sample trend: envelope from the first half, residual slope on the
    // second half must not be significantly positive
    size_t half = tt.size() / 2;
    Ols head = ols_fit({tt.begin(), tt.begin() + half}, {yy.begin(), yy.begin() + half});
    std::vector<double> t2(tt.begin() + half, tt.end());
    std::vector<double> r2(t2.size());
    for (size_t k = 0; k < t2.size(); ++k)
        r2[k] = yy[half + k] - (head.intercept + head.slope * t2[k]);
    Ols trend = ols_fit(t2, r2);
    fit.trend_slope = trend.slope;
    fit.trend_slope_bound = t95(trend.n - 2) * trend.slope_se;
    // a slope that would move log g by under 1e-6 across the window is noise
    double window = tt.back() - tt.front();
    double floor = (window > 0.0) ? 1e-6 / window : 0.0;
    fit.no_upward_trend = fit.trend_slope <= fit.trend_slope_bound + floor;
    return fit;
}

EnvelopeFit exponential_envelope_fit(const std::vector<GrowthRecord>& records) {
    if (records.size() < 20)
        throw InvalidArgument("exponential_envelope_fit: need >= 20 records");
    std::vector<double> t, g;
    for (const auto& r : records) {
        t.push_back(r.t);
        g.push_back(r.sup_grad);
    }
    return exponential_envelope_fit(t, g);
}

// --- feeding monitor ------------------------------------------------------------------

FeedingReport feeding_monitor(const VorticityField& f, const VelocityBundle& b,
                              const BoxGeometry& box, double R) {
    if (R < 0.0) throw InvalidArgument("feeding_monitor: R must be >= 0");
    box.validate();
    const TorusGrid& g = f.grid();
    FeedingReport rep;
    NodeRegion Fz = region_indices(g, box.delta1, box.delta1 + box.delta3, 0.0, box.delta2);
    Fz.i_lo = static_cast<int>(std::ceil((box.delta1 + 1.0) / g.h - 1e-12));
    for (int j = Fz.j_lo; j <= Fz.j_hi; ++j)
        for (int i = Fz.i_lo; i <= Fz.i_hi; ++i) {
            size_t idx = static_cast<size_t>(j) * g.n + i;
            double x2 = g.node(j);
            double lhs1 = std::abs(b.gw1[idx]);
            double lhs2 = std::abs(b.gw2[idx]);
            double ratio;
            if (R == 0.0) {
                ratio = (lhs1 == 0.0 && lhs2 == 0.0) ? 0.0 : 1e300;
            } else {
                ratio = std::max(lhs1 / (R * std::pow(x2, 1.0 - box.alpha)), lhs2 / R);
            }
            if (ratio > rep.worst_ratio) {
                rep.worst_ratio = ratio;
                rep.worst_point = {g.node(i), x2};
            }
        }
    rep.pass = rep.worst_ratio <= 1.0 + 1e-9;
    return rep;
}

LowerBoundReport q_lower_bound_check(const std::vector<GrowthRecord>& records) {
    LowerBoundReport rep;
    rep.min_margin = 1e300;
    for (const auto& r : records) {
        rep.margin_series.push_back(r.hyper_margin);
        rep.min_margin = std::min(rep.min_margin, r.hyper_margin);
    }
    rep.pass = rep.min_margin >= 0.0;
    return rep;
}

// --- composite trajectory check ----------------------------------------------------------

TrajectoryLemmaReport trajectory_lemma_report(const Trajectory& traj, const BoxGeometry& box) {
    TrajectoryLemmaReport rep;
    if (!traj.entered || traj.coeffs.size() < 2) return rep;
    rep.representation_residual = verify_representation(traj);
    rep.phi_violation = phi_distance_violation(traj, box);
    rep.key_lemma_violation = key_lemma_violation(traj, box);

    CoefficientPath p = sample_coefficients(traj);
    rep.trace_defect = p.trace_defect;
    GradientState xi0{traj.coeffs.front().gw1, traj.coeffs.front().gw2};
    auto xi = integrate_exact(p, xi0);
    GronwallData gd = xi_bounds(p, xi0);

    // align field-gradient samples with the deduplicated path grid
    std::vector<double> gw1, gw2;
    {
        size_t kk = 0;
        for (const auto& s : traj.coeffs) {
            if (kk < p.t.size() && std::abs(s.t - p.t[kk]) < 1e-13) {
                gw1.push_back(s.gw1);
                gw2.push_back(s.gw2);
                ++kk;
            }
        }
    }

    double grad_scale = 1e-300;
    for (size_t k = 0; k < gw1.size(); ++k)
        grad_scale = std::max(grad_scale, std::hypot(gw1[k], gw2[k]));
    rep.grad_scale = grad_scale;

    for (size_t k = 0; k < p.t.size(); ++k) {
        double s1 = std::max(1.0, std::abs(gd.bound_xi1[k]));
        double s2 = std::max(1.0, std::abs(gd.bound_xi2[k]));
        rep.xi1_violation = std::max(rep.xi1_violation,
                                     (std::abs(xi[k].xi1) - gd.bound_xi1[k]) / s1);
        rep.xi2_violation = std::max(rep.xi2_violation,
                                     (std::abs(xi[k].xi2) - gd.bound_xi2[k]) / s2);
        if (k < gw1.size()) {
            double denom = std::max(std::hypot(gw1[k], gw2[k]), 1e-3 * grad_scale);
            double gap = std::hypot(xi[k].xi1 - gw1[k], xi[k].xi2 - gw2[k]) / denom;
            rep.grad_consistency = std::max(rep.grad_consistency, gap);
        }
    }
    return rep;
}

// --- CSV ------------------------------------------------------------------------------

void write_diagnostics_csv(const std::string& path, const std::vector<GrowthRecord>& records) {
    std::ofstream os(path);
    if (!os) throw FileError("write_diagnostics_csv: cannot open " + path);
    os << "t,M_D,M_Dhat,sup_grad,hyper_margin,feeding_residual,q_min_D\n";
    char buf[512];
    for (const auto& r : records) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.t, r.M_D,
                      r.M_Dhat, r.sup_grad, r.hyper_margin, r.feeding_residual, r.q_min_D);
        os << buf;
    }
}

std::vector<GrowthRecord> read_diagnostics_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw FileError("read_diagnostics_csv: cannot open " + path);
    std::string line;
    std::getline(is, line); // header
    std::vector<GrowthRecord> out;
    while (std::getline(is, line)) {
        GrowthRecord r;
        if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf,%lf,%lf", &r.t, &r.M_D, &r.M_Dhat,
                        &r.sup_grad, &r.hyper_margin, &r.feeding_residual, &r.q_min_D) == 7)
            out.push_back(r);
    }
    return out;
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
    std::ofstream os(path);
    if (!os) throw FileError("write_trajectory_csv: cannot open " + path);
    os << "t,X1,X2,Q1,Q2,a,b,c\n";
    char buf[512];
    for (const auto& s : traj.coeffs) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", s.t,
                      s.x1, s.x2, s.q1, s.q2, s.a1, s.b, s.c);
        os << buf;
    }
}

void write_gronwall_csv(const std::string& path, const CoefficientPath& p, const GronwallData& gd,
                        const std::vector<GradientState>& xi) {
    std::ofstream os(path);
    if (!os) throw FileError("write_gronwall_csv: cannot open " + path);
    os << "t,f0,f1,f2,v1,v2,Hf0,bound_xi1,bound_xi2,abs_xi1,abs_xi2\n";
    char buf[768];
    for (size_t k = 0; k < p.t.size(); ++k) {
        std::snprintf(buf, sizeof buf,
                      "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                      p.t[k], gd.f0[k], gd.f1[k], gd.f2[k], gd.v1[k], gd.v2[k], gd.Hf0[k],
                      gd.bound_xi1[k], gd.bound_xi2[k], std::abs(xi[k].xi1), std::abs(xi[k].xi2));
        os << buf;
    }
}

} // namespace hypflow
