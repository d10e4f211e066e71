// Scenario runner CLI: run / check / sweep.

#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hypflow/scenario.hpp"

namespace {

void apply_overrides(hypflow::ScenarioConfig& cfg, const std::map<std::string, std::string>& kv) {
    using hypflow::parse_config_map;
    if (kv.empty()) return;
    // round-trip through the parser so overrides share its validation
    std::map<std::string, std::string> merged = kv;
    cfg = [&] {
        hypflow::ScenarioConfig base = cfg;
        hypflow::ScenarioConfig delta = parse_config_map(merged);
        // parse_config_map starts from defaults; copy only the overridden keys
        for (const auto& [key, val] : merged) {
            (void)val;
            if (key == "n") base.n = delta.n;
            else if (key == "scheme") base.scheme = delta.scheme;
            else if (key == "dt") base.dt = delta.dt;
            else if (key == "t_end") base.t_end = delta.t_end;
            else if (key == "datum") base.datum = delta.datum;
            else if (key == "datum_file") base.datum_file = delta.datum_file;
            else if (key == "m_target") base.m_target = delta.m_target;
            else if (key == "bump_smoothing") base.bump_smoothing = delta.bump_smoothing;
            else if (key == "delta1") base.delta1 = delta.delta1;
            else if (key == "delta2") base.delta2 = delta.delta2;
            else if (key == "delta3") base.delta3 = delta.delta3;
            else if (key == "alpha") base.alpha = delta.alpha;
            else if (key == "hyper_A") base.hyper_A = delta.hyper_A;
            else if (key == "beta0") base.beta0 = delta.beta0;
            else if (key == "rho") base.rho = delta.rho;
            else if (key == "feeding_R") base.feeding_R = delta.feeding_R;
            else if (key == "tracer_layout") base.tracer_layout = delta.tracer_layout;
            else if (key == "tracer_count") base.tracer_count = delta.tracer_count;
            else if (key == "observe_every") base.observe_every = delta.observe_every;
            else if (key == "checkpoint_every") base.checkpoint_every = delta.checkpoint_every;
            else if (key == "out_dir") base.out_dir = delta.out_dir;
            else if (key == "seed") base.seed = delta.seed;
            else if (key == "images") base.images = delta.images;
            else if (key == "level_tolerance") base.level_tolerance = delta.level_tolerance;
        }
        return base;
    }();
}

std::map<std::string, std::string> split_overrides(const std::vector<std::string>& sets) {
    std::map<std::string, std::string> kv;
    for (const std::string& s : sets) {
        auto eq = s.find('=');
        if (eq == std::string::npos)
            throw hypflow::InvalidArgument("--set expects key=value, got '" + s + "'");
        kv[s.substr(0, eq)] = s.substr(eq + 1);
    }
    return kv;
}

void print_checks(const std::vector<hypflow::CheckResult>& checks) {
    for (const auto& c : checks)
        std::printf("[%s] %-28s value=%.6g %s\n", c.pass ? "PASS" : "FAIL", c.name.c_str(),
                    c.value, c.detail.c_str());
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"hyperbolic-flow scenario lab"};
    app.require_subcommand(1);

    std::string config_path, manifest_path, out_dir_arg, check_dir;
    std::vector<std::string> sets;
    std::vector<double> delta2s{0.04, 0.02, 0.01};

    auto* run_cmd = app.add_subcommand("run", "run a scenario");
    run_cmd->add_option("--config", config_path, "key = value config file");
    run_cmd->add_option("--from-manifest", manifest_path, "re-run the config echoed in a manifest");
    run_cmd->add_option("--set", sets, "override config entries (key=value, repeatable)");
    run_cmd->add_option("--out", out_dir_arg, "output directory (overrides config)");

    auto* check_cmd = app.add_subcommand("check", "re-run checks on stored outputs");
    check_cmd->add_option("dir", check_dir, "output directory of a previous run")->required();

    auto* sweep_cmd = app.add_subcommand("sweep", "delta-refinement series of the inequality fits");
    sweep_cmd->add_option("--config", config_path, "key = value config file");
    sweep_cmd->add_option("--set", sets, "override config entries");
    sweep_cmd->add_option("--delta2", delta2s, "refinement levels (decreasing)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) {
            hypflow::ScenarioConfig cfg;
            if (!manifest_path.empty())
                cfg = hypflow::config_from_manifest(manifest_path);
            else if (!config_path.empty())
                cfg = hypflow::parse_config_file(config_path);
            apply_overrides(cfg, split_overrides(sets));
            if (!out_dir_arg.empty()) cfg.out_dir = out_dir_arg;
            hypflow::RunOutputs out = hypflow::run_scenario(cfg);
            print_checks(out.checks);
            std::printf("m=%.4g beta=%.4g R=%.4g steps=%d -> %s\n", out.m_measured,
                        out.beta_measured, out.feeding_R_used, out.stats.steps,
                        out.all_pass ? "PASS" : "FAIL");
            return out.all_pass ? 0 : 1;
        }
        if (check_cmd->parsed()) {
            hypflow::CheckOutcome res = hypflow::check_outputs(check_dir);
            print_checks(res.checks);
            return res.all_pass ? 0 : 1;
        }
        if (sweep_cmd->parsed()) {
            hypflow::ScenarioConfig cfg;
            if (!config_path.empty()) cfg = hypflow::parse_config_file(config_path);
            if (cfg.datum == "eigenfunction") cfg.datum = "bump"; // sweep wants plateau data
            apply_overrides(cfg, split_overrides(sets));
            hypflow::SweepResult res = hypflow::sweep_refinement(cfg, delta2s);
            for (size_t lvl = 0; lvl < res.fits_per_level.size(); ++lvl)
                for (const auto& fit : res.fits_per_level[lvl])
                    std::printf("delta2=%.4g %-14s C=%.6g stability=%.3f\n", res.delta2s[lvl],
                                fit.name.c_str(), fit.constant, fit.stability_ratio);
            std::printf("refinement sweep: %s\n", res.stable ? "PASS" : "FAIL");
            return res.stable ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
