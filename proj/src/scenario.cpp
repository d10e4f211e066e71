#include "hypflow/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace hypflow {

namespace {
constexpr double kPi = std::numbers::pi;

bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

// quintic smoothstep on [0,1]
double sstep(double t) {
    t = std::clamp(t, 0.0, 1.0);
    return t * t * t * (t * (6.0 * t - 15.0) + 10.0);
}
} // namespace

void ScenarioConfig::validate() const {
    if (n < 8 || !power_of_two(n)) throw InvalidArgument("config: n must be a power of two >= 8");
    if (scheme != "rk4" && scheme != "sl") throw InvalidArgument("config: scheme must be rk4|sl");
    if (!(dt > 0.0)) throw InvalidArgument("config: dt must be positive");
    if (!(t_end >= 0.0)) throw InvalidArgument("config: t_end must be >= 0");
    if (datum != "eigenfunction" && datum != "bump" && datum != "file")
        throw InvalidArgument("config: datum must be eigenfunction|bump|file");
    if (datum == "bump" && !(m_target > 0.0 && m_target < 1.0))
        throw InvalidArgument("config: bump m_target must lie in (0,1)");
    if (datum == "file" && datum_file.empty())
        throw InvalidArgument("config: datum=file needs datum_file");
    box().validate();
    if (tracer_count < 1) throw InvalidArgument("config: tracer_count must be >= 1");
    if (observe_every < 1) throw InvalidArgument("config: observe_every must be >= 1");
    if (images < 1) throw InvalidArgument("config: images must be >= 1");
    if (tracer_layout != "grid" && tracer_layout != "feeding-edge" && tracer_layout != "mixed")
        throw InvalidArgument("config: tracer_layout must be grid|feeding-edge|mixed");
}

StepperConfig ScenarioConfig::stepper() const {
    StepperConfig sc;
    sc.dt = dt;
    sc.t_end = t_end;
    sc.scheme = (scheme == "sl") ? Scheme::SemiLagrangian : Scheme::Rk4Spectral;
    return sc;
}

namespace {

const std::map<std::string, int>& config_keys() {
    static const std::map<std::string, int> keys = {
        {"n", 0},       {"scheme", 1},        {"dt", 0},           {"t_end", 0},
        {"datum", 1},   {"datum_file", 1},    {"m_target", 0},     {"bump_smoothing", 0},
        {"delta1", 0},  {"delta2", 0},        {"delta3", 0},       {"alpha", 0},
        {"hyper_A", 0}, {"beta0", 0},         {"rho", 0},          {"feeding_R", 0},
        {"tracer_layout", 1}, {"tracer_count", 0}, {"observe_every", 0},
        {"checkpoint_every", 0}, {"out_dir", 1}, {"seed", 0},       {"images", 0},
        {"level_tolerance", 0}};
    return keys;
}

} // namespace

ScenarioConfig parse_config_map(const std::map<std::string, std::string>& kv) {
    ScenarioConfig c;
    for (const auto& [key, val] : kv) {
        if (!config_keys().count(key)) throw InvalidArgument("config: unknown key '" + key + "'");
        if (key == "n") c.n = std::stoi(val);
        else if (key == "scheme") c.scheme = val;
        else if (key == "dt") c.dt = std::stod(val);
        else if (key == "t_end") c.t_end = std::stod(val);
        else if (key == "datum") c.datum = val;
        else if (key == "datum_file") c.datum_file = val;
        else if (key == "m_target") c.m_target = std::stod(val);
        else if (key == "bump_smoothing") c.bump_smoothing = std::stod(val);
        else if (key == "delta1") c.delta1 = std::stod(val);
        else if (key == "delta2") c.delta2 = std::stod(val);
        else if (key == "delta3") c.delta3 = std::stod(val);
        else if (key == "alpha") c.alpha = std::stod(val);
        else if (key == "hyper_A") c.hyper_A = std::stod(val);
        else if (key == "beta0") c.beta0 = std::stod(val);
        else if (key == "rho") c.rho = std::stod(val);
        else if (key == "feeding_R") c.feeding_R = std::stod(val);
        else if (key == "tracer_layout") c.tracer_layout = val;
        else if (key == "tracer_count") c.tracer_count = std::stoi(val);
        else if (key == "observe_every") c.observe_every = std::stoi(val);
        else if (key == "checkpoint_every") c.checkpoint_every = std::stoi(val);
        else if (key == "out_dir") c.out_dir = val;
        else if (key == "seed") c.seed = std::stoul(val);
        else if (key == "images") c.images = std::stoi(val);
        else if (key == "level_tolerance") c.level_tolerance = std::stod(val);
    }
    return c;
}

ScenarioConfig parse_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw FileError("parse_config_file: cannot open " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(is, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            size_t a = s.find_first_not_of(" \t\r");
            size_t b = s.find_last_not_of(" \t\r");
            return (a == std::string::npos) ? std::string() : s.substr(a, b - a + 1);
        };
        std::string key = trim(line.substr(0, eq)), val = trim(line.substr(eq + 1));
        if (!key.empty()) kv[key] = val;
    }
    return parse_config_map(kv);
}

VorticityField build_initial(const ScenarioConfig& cfg) {
    TorusGrid g(cfg.n);
    if (cfg.datum == "file") {
        VorticityField f = load_field(cfg.datum_file);
        if (!is_double_odd(f, 1e-9 * std::max(1.0, f.max_abs())))
            throw InvalidField("build_initial: stored field is not double-odd");
        return f;
    }
    VorticityField f(g, 0.0);
    if (cfg.datum == "eigenfunction") {
        for (int j = 0; j < g.n; ++j)
            for (int i = 0; i < g.n; ++i)
                f.value(i, j) = std::sin(kPi * g.node(i)) * std::sin(kPi * g.node(j));
        return symmetrize(f);
    }
    // bump: plateau square of side s = sqrt(m_target) centered in [0,1]^2,
    // quintic C2 collar, extended double-odd by sign factors
    const double side = std::sqrt(cfg.m_target);
    const double a = 0.5 * (1.0 - side), b = 1.0 - a;
    double w = cfg.bump_smoothing > 0.0 ? cfg.bump_smoothing : std::min(0.8 * a, 0.1);
    if (w >= a) throw InvalidArgument("build_initial: smoothing collar exceeds plateau margin");
    auto profile = [&](double u) {
        if (u <= a - w || u >= b + w) return 0.0;
        if (u < a) return sstep((u - (a - w)) / w);
        if (u <= b) return 1.0;
        return 1.0 - sstep((u - b) / w);
    };
    for (int j = 0; j < g.n; ++j)
        for (int i = 0; i < g.n; ++i) {
            double x1 = g.node(i), x2 = g.node(j);
            double s1 = (x1 >= 0.0) ? 1.0 : -1.0, s2 = (x2 >= 0.0) ? 1.0 : -1.0;
            f.value(i, j) = s1 * s2 * profile(std::abs(x1)) * profile(std::abs(x2));
        }
    return symmetrize(f);
}

// --- the run pipeline -----------------------------------------------------------

namespace {

std::vector<Vec2> sample_points_in_D(const BoxGeometry& box, int count, unsigned long seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u1(0.02, 0.98);
    std::vector<Vec2> pts;
    pts.reserve(count);
    for (int k = 0; k < count; ++k)
        pts.push_back({u1(rng) * box.delta1, u1(rng) * box.delta2});
    return pts;
}

void append_check(RunOutputs& out, std::string name, bool pass, double value,
                  std::string detail = {}, bool gating = true) {
    out.checks.push_back({std::move(name), pass, value, std::move(detail)});
    if (gating && !pass) out.all_pass = false;
}

std::string fmt_count(int used, size_t total) {
    return std::to_string(used) + " of " + std::to_string(total) +
           " trajectories carry resolvable gradients";
}

void write_fits_json(const std::string& path, const std::vector<InequalityFit>& fits) {
    json j = json::array();
    for (const auto& f : fits)
        j.push_back({{"name", f.name},
                     {"samples", f.sample_count},
                     {"constant", f.constant},
                     {"stability_ratio", f.stability_ratio},
                     {"degenerate", f.degenerate},
                     {"pass", f.pass}});
    std::ofstream os(path);
    os << j.dump(2) << "\n";
}

json config_json(const ScenarioConfig& c) {
    return {{"n", c.n},
            {"scheme", c.scheme},
            {"dt", c.dt},
            {"t_end", c.t_end},
            {"datum", c.datum},
            {"datum_file", c.datum_file},
            {"m_target", c.m_target},
            {"bump_smoothing", c.bump_smoothing},
            {"delta1", c.delta1},
            {"delta2", c.delta2},
            {"delta3", c.delta3},
            {"alpha", c.alpha},
            {"hyper_A", c.hyper_A},
            {"beta0", c.beta0},
            {"rho", c.rho},
            {"feeding_R", c.feeding_R},
            {"tracer_layout", c.tracer_layout},
            {"tracer_count", c.tracer_count},
            {"observe_every", c.observe_every},
            {"checkpoint_every", c.checkpoint_every},
            {"out_dir", c.out_dir},
            {"seed", c.seed},
            {"images", c.images},
            {"level_tolerance", c.level_tolerance}};
}

} // namespace

RunOutputs run_scenario(const ScenarioConfig& cfg) {
    cfg.validate();
    fs::create_directories(cfg.out_dir);

    RunOutputs out;
    out.cfg = cfg;

    VorticityField f = build_initial(cfg);
    const BoxGeometry box = cfg.box();
    const HyperParams hp = cfg.hyper();

    try {
        out.m_measured = measure_m(f, cfg.level_tolerance).m;
    } catch (const Error&) {
        out.m_measured = -1.0; // not defined for this datum
    }

    TracerLayout layout = (cfg.tracer_layout == "grid")   ? TracerLayout::Grid
                          : (cfg.tracer_layout == "mixed") ? TracerLayout::Mixed
                                                           : TracerLayout::FeedingEdge;
    std::vector<Vec2> starts = seed_tracers(box, layout, cfg.tracer_count);
    std::vector<TracerIntegrator> tracers;
    tracers.reserve(starts.size());
    TraceOptions topts;
    for (Vec2 s : starts) tracers.emplace_back(box, s, 0.0, topts);

    StepperConfig sc = cfg.stepper();

    std::vector<RunObserver> observers;
    observers.push_back(
        {cfg.observe_every, [&](const VorticityField& fld, const VelocityBundle& b, int) {
             out.records.push_back(growth_observer(fld, b, box, hp));
         }});
    if (cfg.checkpoint_every > 0)
        observers.push_back(
            {cfg.checkpoint_every, [&](const VorticityField& fld, const VelocityBundle&, int k) {
                 save_field(fld, cfg.out_dir + "/field_" + std::to_string(k) + ".bin");
             }});

    FrameHook hook = [&](const VelocityBundle& prev, const VelocityBundle& cur) {
        BundleWindowProbe probe(&prev, &cur);
        for (auto& tr : tracers)
            if (!tr.done()) tr.advance_through(probe, cur.t);
    };

    out.stats = run(f, sc, observers, hook);

    for (auto& tr : tracers)
        if (!tr.done()) tr.finish_open(out.stats.t_final);

    save_field(f, cfg.out_dir + "/field_final.bin");
    write_diagnostics_csv(cfg.out_dir + "/diagnostics.csv", out.records);

    // measured beta: minimum of min(Q1, Q2) over D nodes through the run and
    // over every trajectory sample
    double beta = 1e300;
    for (const auto& r : out.records) beta = std::min(beta, r.q_min_D);
    for (const auto& tr : tracers)
        for (const auto& s : tr.trajectory().coeffs)
            beta = std::min(beta, std::min(s.q1, s.q2));
    out.beta_measured = (beta == 1e300) ? 0.0 : beta;

    // feeding parameter
    double max_residual = 0.0;
    for (const auto& r : out.records) max_residual = std::max(max_residual, r.feeding_residual);
    out.feeding_R_used = (cfg.feeding_R >= 0.0) ? cfg.feeding_R : max_residual;

    // per-trajectory analysis and artifacts
    int idx = 0;
    for (auto& tr : tracers) {
        const Trajectory& traj = tr.trajectory();
        write_trajectory_csv(cfg.out_dir + "/trajectory_" + std::to_string(idx) + ".csv", traj);
        if (traj.entered && traj.coeffs.size() >= 4) {
            TrajectoryLemmaReport rep = trajectory_lemma_report(traj, box);
            out.lemma_reports.push_back(rep);
            CoefficientPath p = sample_coefficients(traj);
            GradientState xi0{traj.coeffs.front().gw1, traj.coeffs.front().gw2};
            auto xi = integrate_exact(p, xi0);
            GronwallData gd = xi_bounds(p, xi0);
            write_gronwall_csv(cfg.out_dir + "/gronwall_" + std::to_string(idx) + ".csv", p, gd,
                               xi);
        }
        out.trajectories.push_back(traj);
        ++idx;
    }

    // inequality fits on the final field
    VelocityBundle fb = make_velocity_bundle(f);
    auto pts = sample_points_in_D(box, 200, cfg.seed);
    out.fits.push_back(check_q_upper_bound(f, fb, box, pts));
    for (auto& fit : check_coefficient_bounds(f, fb, box, pts, {}))
        out.fits.push_back(fit);
    write_fits_json(cfg.out_dir + "/fits.json", out.fits);

    // ---- checks -----------------------------------------------------------
    append_check(out, "symmetry_exact", symmetry_defect(f) == 0.0, symmetry_defect(f));

    bool mono = true;
    for (const auto& r : out.records)
        if (r.M_D > r.M_Dhat + 1e-14) mono = false;
    append_check(out, "M_D_le_M_Dhat", mono, 0.0);

    double feed_ratio =
        (out.feeding_R_used > 0.0) ? max_residual / out.feeding_R_used
                                   : (max_residual == 0.0 ? 0.0 : 1e300);
    append_check(out, "feeding", feed_ratio <= 1.0 + 1e-9, feed_ratio,
                 cfg.feeding_R >= 0.0 ? "explicit R" : "R = measured residual (auto)");

    LowerBoundReport lb = q_lower_bound_check(out.records);
    append_check(out, "q_lower_bound", lb.pass, lb.min_margin,
                 "report-only: theorem prediction, not asserted", /*gating=*/false);

    double sup_grad_run = 0.0;
    for (const auto& r : out.records) sup_grad_run = std::max(sup_grad_run, r.sup_grad);

    double worst_rep = 0.0, worst_phi = -1e300, worst_key = -1e300, worst_xi = -1e300;
    double worst_grad = 0.0, worst_trace = 0.0;
    int grad_checked = 0;
    for (const auto& rep : out.lemma_reports) {
        worst_phi = std::max(worst_phi, rep.phi_violation);
        worst_key = std::max(worst_key, rep.key_lemma_violation);
        worst_xi = std::max(worst_xi, std::max(rep.xi1_violation, rep.xi2_violation));
        worst_trace = std::max(worst_trace, rep.trace_defect);
        // gradient-route consistency is meaningful only on trajectories that
        // carry a resolvable gradient; material fluid from an exactly-zero
        // region of the datum compares noise against noise
        if (rep.grad_scale >= 0.05 * sup_grad_run) {
            ++grad_checked;
            worst_grad = std::max(worst_grad, rep.grad_consistency);
        }
    }
    for (size_t k = 0; k < out.trajectories.size(); ++k)
        if (out.trajectories[k].closed)
            worst_rep = std::max(worst_rep, verify_representation(out.trajectories[k]));

    bool have_traj = !out.lemma_reports.empty();
    append_check(out, "representation_residual", worst_rep < 1e-5, worst_rep);
    if (have_traj) {
        append_check(out, "phi_estimate", worst_phi <= 1e-6, worst_phi);
        append_check(out, "key_lemma", worst_key <= 1e-6, worst_key);
        append_check(out, "xi_dominance", worst_xi <= 1e-6, worst_xi);
        append_check(out, "gradient_consistency", worst_grad < 1e-2, worst_grad,
                     fmt_count(grad_checked, out.lemma_reports.size()));
        append_check(out, "trace_zero", worst_trace < 1e-6, worst_trace);
    }

    if (out.beta_measured > 0.0) {
        bool ok = true;
        double worst = 0.0;
        for (const auto& traj : out.trajectories) {
            if (!traj.entered) continue;
            ExitTimeReport rep = exit_time_bound_check(traj, box, out.beta_measured, true, cfg.dt);
            if (rep.t1_exists) worst = std::max(worst, rep.te_minus_t1 - rep.bound);
            if (!rep.bound_ok || !rep.dichotomy_ok) ok = false;
        }
        append_check(out, "exit_time_bound", ok, worst);
    } else {
        append_check(out, "exit_time_bound", true, out.beta_measured,
                     "report-only: flow not hyperbolic (beta <= 0)", /*gating=*/false);
    }

    if (out.records.size() >= 20) {
        out.envelope = exponential_envelope_fit(out.records);
        out.envelope_valid = true;
        append_check(out, "envelope_no_upward_trend", out.envelope.no_upward_trend,
                     out.envelope.trend_slope);
    }

    bool fits_ok = true;
    for (const auto& fit : out.fits)
        if (!fit.pass) fits_ok = false;
    append_check(out, "fits_stable", fits_ok, 0.0);

    write_manifest(cfg.out_dir + "/manifest.json", out);
    return out;
}

void write_manifest(const std::string& path, const RunOutputs& out) {
    json j;
    j["config"] = config_json(out.cfg);
    j["grid"] = {{"n", out.cfg.n}, {"h", 2.0 / out.cfg.n}};
    j["stats"] = {{"steps", out.stats.steps},
                  {"rejected", out.stats.rejected},
                  {"dt_final", out.stats.dt_final},
                  {"t_final", out.stats.t_final}};
    j["m_measured"] = out.m_measured;
    j["beta_measured"] = out.beta_measured;
    j["feeding_R_used"] = out.feeding_R_used;
    if (out.envelope_valid)
        j["envelope"] = {{"C1", out.envelope.C1},
                         {"C2", out.envelope.C2},
                         {"max_positive_residual", out.envelope.max_positive_residual},
                         {"trend_slope", out.envelope.trend_slope},
                         {"trend_slope_bound", out.envelope.trend_slope_bound},
                         {"no_upward_trend", out.envelope.no_upward_trend}};
    json tr = json::array();
    for (size_t k = 0; k < out.trajectories.size(); ++k) {
        const Trajectory& t = out.trajectories[k];
        tr.push_back({{"id", k},
                      {"start", {t.start.x, t.start.y}},
                      {"entered", t.entered},
                      {"T0", t.T0},
                      {"T1", t.T1 ? json(*t.T1) : json()},
                      {"Te", t.Te},
                      {"closed", t.closed},
                      {"exit_side", t.exit_side},
                      {"file", "trajectory_" + std::to_string(k) + ".csv"}});
    }
    j["tracers"] = tr;
    json ck = json::array();
    for (const auto& c : out.checks)
        ck.push_back({{"name", c.name}, {"pass", c.pass}, {"value", c.value}, {"detail", c.detail}});
    j["checks"] = ck;
    j["all_pass"] = out.all_pass;
    std::ofstream os(path);
    if (!os) throw FileError("write_manifest: cannot open " + path);
    os << j.dump(2) << "\n";
}

ScenarioConfig config_from_manifest(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw FileError("config_from_manifest: cannot open " + path);
    json j;
    is >> j;
    const json& c = j.at("config");
    std::map<std::string, std::string> kv;
    for (auto it = c.begin(); it != c.end(); ++it) {
        if (it.value().is_string())
            kv[it.key()] = it.value().get<std::string>();
        else {
            std::ostringstream ss;
            ss.precision(17);
            if (it.value().is_number_float())
                ss << it.value().get<double>();
            else
                ss << it.value().dump();
            kv[it.key()] = ss.str();
        }
    }
    return parse_config_map(kv);
}

// --- stored-output checks ---------------------------------------------------------

CheckOutcome check_outputs(const std::string& out_dir) {
    CheckOutcome res;
    auto add = [&](std::string name, bool pass, double value, std::string detail = {}) {
        res.checks.push_back({std::move(name), pass, value, std::move(detail)});
        if (!pass) res.all_pass = false;
    };

    ScenarioConfig cfg = config_from_manifest(out_dir + "/manifest.json");
    auto records = read_diagnostics_csv(out_dir + "/diagnostics.csv");

    bool mono = true;
    for (const auto& r : records)
        if (r.M_D > r.M_Dhat + 1e-14) mono = false;
    add("M_D_le_M_Dhat", mono, 0.0);

    if (records.size() >= 20) {
        EnvelopeFit e = exponential_envelope_fit(records);
        add("envelope_no_upward_trend", e.no_upward_trend, e.trend_slope);
    }

    // fits.json stability
    {
        std::ifstream is(out_dir + "/fits.json");
        if (is) {
            json j;
            is >> j;
            bool ok = true;
            for (const auto& f : j)
                if (!f.at("pass").get<bool>()) ok = false;
            add("fits_stable", ok, 0.0);
        }
    }

    // trajectory representation residuals from stored columns
    double worst_rep = 0.0;
    for (int k = 0;; ++k) {
        std::string path = out_dir + "/trajectory_" + std::to_string(k) + ".csv";
        std::ifstream is(path);
        if (!is) break;
        std::string line;
        std::getline(is, line);
        std::vector<double> t, x1, x2, q1, q2;
        while (std::getline(is, line)) {
            double a[8];
            if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf", &a[0], &a[1], &a[2],
                            &a[3], &a[4], &a[5], &a[6], &a[7]) == 8) {
                t.push_back(a[0]);
                x1.push_back(a[1]);
                x2.push_back(a[2]);
                q1.push_back(a[3]);
                q2.push_back(a[4]);
            }
        }
        if (t.size() < 3) continue;
        double I1 = 0.0, I2 = 0.0;
        for (size_t m = 1; m < t.size(); ++m) {
            I1 += 0.5 * (t[m] - t[m - 1]) * (q1[m] + q1[m - 1]);
            I2 += 0.5 * (t[m] - t[m - 1]) * (q2[m] + q2[m - 1]);
            worst_rep = std::max(worst_rep, std::abs(x1[m] - x1[0] * std::exp(-I1)) /
                                                std::max(std::abs(x1[m]), 1e-300));
            worst_rep = std::max(worst_rep, std::abs(x2[m] - x2[0] * std::exp(I2)) /
                                                std::max(std::abs(x2[m]), 1e-300));
        }
    }
    add("representation_residual", worst_rep < 1e-5, worst_rep);

    // gronwall dominance from stored columns
    double worst_dom = -1e300;
    bool any_gron = false;
    for (int k = 0;; ++k) {
        std::string path = out_dir + "/gronwall_" + std::to_string(k) + ".csv";
        std::ifstream is(path);
        if (!is) {
            if (k > static_cast<int>(cfg.tracer_count)) break;
            continue;
        }
        any_gron = true;
        std::string line;
        std::getline(is, line);
        while (std::getline(is, line)) {
            double a[11];
            if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf", &a[0],
                            &a[1], &a[2], &a[3], &a[4], &a[5], &a[6], &a[7], &a[8], &a[9],
                            &a[10]) == 11) {
                worst_dom = std::max(worst_dom, (a[9] - a[7]) / std::max(1.0, a[7]));
                worst_dom = std::max(worst_dom, (a[10] - a[8]) / std::max(1.0, a[8]));
            }
        }
    }
    if (any_gron) add("xi_dominance", worst_dom <= 1e-6, worst_dom);

    return res;
}

// --- refinement sweep ----------------------------------------------------------------

SweepResult sweep_refinement(const ScenarioConfig& cfg, const std::vector<double>& delta2s) {
    if (delta2s.size() < 2) throw InvalidArgument("sweep_refinement: need >= 2 refinement levels");
    VorticityField f = build_initial(cfg);
    VelocityBundle b = make_velocity_bundle(f);

    SweepResult res;
    res.delta2s = delta2s;
    for (double d2 : delta2s) {
        BoxGeometry box{d2 * d2, d2, cfg.delta3, cfg.alpha};
        box.validate();
        auto pts = sample_points_in_D(box, 1000, cfg.seed);
        std::vector<InequalityFit> fits;
        fits.push_back(check_q_upper_bound(f, b, box, pts));
        for (auto& fit : check_coefficient_bounds(f, b, box, pts, {})) fits.push_back(fit);
        res.fits_per_level.push_back(std::move(fits));
    }
    // stability = every level's half-vs-full sampling ratio in [0.5, 2] and no
    // systematic growth of any constant across refinements.  The sharp fitted
    // constants of the |b|, |c| estimates decay as the box shrinks (the
    // inequalities turn slack in the benign direction), so only growth is a
    // failure.
    for (const auto& level : res.fits_per_level)
        for (const auto& fit : level)
            if (!fit.pass) res.stable = false;
    for (size_t lvl = 1; lvl < res.fits_per_level.size(); ++lvl) {
        for (size_t k = 0; k < res.fits_per_level[lvl].size(); ++k) {
            const auto& prev = res.fits_per_level[lvl - 1][k];
            const auto& cur = res.fits_per_level[lvl][k];
            if (prev.degenerate || cur.degenerate) continue;
            if (cur.constant > 2.0 * prev.constant) res.stable = false;
        }
    }
    return res;
}

} // namespace hypflow
