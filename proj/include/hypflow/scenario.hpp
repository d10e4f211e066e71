#pragma once

//==============================================================================
// Scenario runner: initial data -> evolve -> trace -> bound -> diagnose -> emit.
//
// Configuration is a flat key = value file (# comments).  Keys mirror
// ScenarioConfig below; all physical parameters are dimensionless.  A run
// writes into out_dir: manifest.json, diagnostics.csv, fits.json, one
// trajectory_<k>.csv and gronwall_<k>.csv per tracer, and optional field
// checkpoints.  Runs are deterministic for a fixed seed and thread count.
//==============================================================================

#include <map>
#include <string>
#include <vector>

#include "hypflow/diagnostics.hpp"
#include "hypflow/evolution.hpp"

namespace hypflow {

struct ScenarioConfig {
    int n = 256;
    std::string scheme = "rk4"; // rk4 | sl
    double dt = 1e-3;
    double t_end = 1.0;
    std::string datum = "eigenfunction"; // eigenfunction | bump | file
    std::string datum_file;
    double m_target = 0.8;
    double bump_smoothing = -1.0; // auto when negative
    double delta1 = 0.02, delta2 = 0.04, delta3 = 0.05;
    double alpha = 0.2;
    double hyper_A = 1.0, beta0 = 0.4, rho = 0.1;
    double feeding_R = -1.0; // auto (measured residual) when negative
    std::string tracer_layout = "feeding-edge"; // feeding-edge | grid
    int tracer_count = 8;
    int observe_every = 10;
    int checkpoint_every = 0; // off
    std::string out_dir = "out";
    unsigned long seed = 12345;
    int images = 6;
    double level_tolerance = 1e-3;

    void validate() const;
    BoxGeometry box() const { return {delta1, delta2, delta3, alpha}; }
    HyperParams hyper() const { return {hyper_A, beta0, rho}; }
    StepperConfig stepper() const;
};

ScenarioConfig parse_config_file(const std::string& path);
ScenarioConfig parse_config_map(const std::map<std::string, std::string>& kv);

// Initial datum per the config: the product-sine eigenfunction, a C2
// mollified plateau bump on [0,1]^2 extended double-odd, or a stored field.
VorticityField build_initial(const ScenarioConfig& cfg);

struct CheckResult {
    std::string name;
    bool pass = true;
    double value = 0.0; // the measured quantity the check gates on
    std::string detail;
};

struct RunOutputs {
    ScenarioConfig cfg;
    RunStats stats;
    std::vector<GrowthRecord> records;
    std::vector<Trajectory> trajectories;
    std::vector<TrajectoryLemmaReport> lemma_reports;
    std::vector<InequalityFit> fits;
    double m_measured = 0.0;
    double beta_measured = 0.0; // min over D and the run of min(Q1,Q2)
    double feeding_R_used = 0.0;
    EnvelopeFit envelope;
    bool envelope_valid = false;
    std::vector<CheckResult> checks;
    bool all_pass = true;
};

// Full pipeline; writes artifacts into cfg.out_dir and returns everything in
// memory for callers (the acceptance suite reuses this directly).
RunOutputs run_scenario(const ScenarioConfig& cfg);

// Re-evaluate the checks computable from a run's stored outputs.
struct CheckOutcome {
    std::vector<CheckResult> checks;
    bool all_pass = true;
};
CheckOutcome check_outputs(const std::string& out_dir);

// delta-refinement series: for each delta2, delta1 = delta2^2 and the
// inequality fits are recomputed on the configured datum; pass when every
// fitted constant moves by a factor in [0.5, 2] between refinements.
struct SweepResult {
    std::vector<double> delta2s;
    std::vector<std::vector<InequalityFit>> fits_per_level;
    bool stable = true;
};
SweepResult sweep_refinement(const ScenarioConfig& cfg, const std::vector<double>& delta2s);

// manifest helpers
void write_manifest(const std::string& path, const RunOutputs& out);
ScenarioConfig config_from_manifest(const std::string& path);

} // namespace hypflow
