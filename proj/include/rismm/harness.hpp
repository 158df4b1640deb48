// SPDX-License-Identifier: Apache-2.0
//
// Scenario configuration, Monte Carlo orchestration, the conventional
// baseline and the experiment runners behind the CLI.

#pragma once

#include "rismm/beamsearch.hpp"
#include "rismm/channel.hpp"
#include "rismm/estimation.hpp"
#include "rismm/io.hpp"
#include "rismm/ris_control.hpp"
#include "rismm/tracking.hpp"
#include "rismm/types.hpp"

#include <map>
#include <string>
#include <vector>

namespace rismm {

enum class ScenarioMode { nmse_sweep, beam_pattern, tracking, full_pipeline };

enum class AnglePlacement { beam_grid, uniform };

struct ScenarioConfig {
    double f_c = 28e9;          // carrier, Hz
    int l_g = 5;                // BS-RIS paths
    int l_h = 1;                // RIS-UE paths
    int n_bs = 16;              // BS elements per side (M_BS = 256)
    int n_ue = 2;               // UE elements per side (M_UE = 4)
    int n_ris = 16;             // RIS elements per side for single-size modes
    std::vector<int> n_ris_sweep{4, 8, 16}; // sweep sizes (M_RIS 16/64/256)
    double spacing_over_lambda = 0.5;
    int codebook_tau = 5;
    int codebook_k = 10;
    int secondary_rotations = 4;
    int symbols_per_measurement = 8; // Z pilot symbols averaged per beam measurement
    int u_p = 0;                // pilots; 0 -> M_RIS / 2
    int u_slots = 0;            // combiner slots; 0 -> M_UE
    double epsilon = 1e-8;
    std::vector<double> snr_db{0.0, 5.0, 10.0, 15.0};
    int trials = 100;
    std::uint64_t master_seed = 1;
    ScenarioMode mode = ScenarioMode::nmse_sweep;
    bool baseline = true;
    AnglePlacement angle_placement = AnglePlacement::beam_grid;
    int threads = 0;            // 0 -> hardware concurrency
    bool verbose = false;
    std::string out_dir = "out";

    // Deployment geometry and path-loss inputs.
    double d_g = 50.0;
    double d_h = 10.0;
    double bs_departure_el = kPi / 6.0;  // fixed BS->RIS line of sight
    double bs_departure_az = 1.1 * kPi;
    double nlos_gain_variance = 0.05;    // per NLoS path of G in the pipeline

    // Beam-pattern experiment.
    double pattern_desired_el_deg = 45.0;
    double pattern_desired_az_deg = 60.0;
    int pattern_draws = 50;
    double pattern_nlos_variance = 1.0;  // per NLoS path (beam-shift demo)
    int rich_paths = 64;

    // Tracking experiment.
    int track_steps = 200;
    double track_rate_deg = 0.1;       // azimuth rate per step
    double track_snr_db = 20.0;
    int track_trials = 20;
    double track_rho = 0.995;
    double track_q_gain = 1e-4;
    double track_q_angle_deg = 0.05;   // process-noise std dev per step, degrees

    double wavelength() const { return 299792458.0 / f_c; }
    int m_bs() const { return n_bs * n_bs; }
    int m_ue() const { return n_ue * n_ue; }
    int pilots_for(int n_ris_side) const {
        return u_p > 0 ? u_p : (n_ris_side * n_ris_side) / 2;
    }
    int slots() const { return u_slots > 0 ? u_slots : m_ue(); }

    void validate() const;
};

ScenarioConfig config_from_kv(const std::map<std::string, std::string>& kv);
ScenarioConfig load_config(const std::string& path);
std::string config_to_text(const ScenarioConfig& cfg);

/// One end-to-end pipeline trial at a given RIS size and SNR.
struct TrialResult {
    int trial = 0;
    std::uint64_t seed = 0;
    int n_ris = 0;
    double snr_db = 0.0;
    double nmse_proposed = 0.0;
    double nmse_baseline = -1.0; // <0 when the baseline is disabled
    double angle_error_rad = 0.0;
    int measurements = 0;
    bool search_hit = false;    // recovered direction within half a beam spacing
    bool estimator_converged = false;
    double wall_ms = 0.0;
};

TrialResult run_pipeline_trial(const ScenarioConfig& cfg, int n_ris_side, double snr_db,
                               std::uint64_t trial_index);

struct SweepPoint {
    int n_ris = 0;
    double snr_db = 0.0;
    int trials = 0;
    double nmse_proposed_mean = 0.0;
    double nmse_baseline_mean = -1.0;
    double hit_rate = 0.0;
    double mean_measurements = 0.0;
};

struct SweepResult {
    std::vector<SweepPoint> points;
    std::vector<TrialResult> trials;
};

SweepResult run_nmse_sweep(const ScenarioConfig& cfg);

struct BeamPatternDraw {
    int draw = 0;
    double sparse_displacement_rad = 0.0;
    bool compensated_within_cell = false;
    double compensated_peak_delta_db = 0.0;
    double rich_peak_fraction = 0.0;
};

struct BeamPatternResult {
    // Grids are elevation-major (el rows x az cols) power values for draw 0.
    int n_elevation = 0;
    int n_azimuth = 0;
    std::vector<double> ideal, sparse, rich, compensated;
    AnglePair desired;
    double hpbw_rad = 0.0;
    std::vector<BeamPatternDraw> draws;
};

BeamPatternResult run_beam_pattern(const ScenarioConfig& cfg);

struct TrackingScenarioResult {
    // Per-step means across trials.
    std::vector<double> nmse_proposed;     // three-state scenario
    std::vector<double> nmse_baseline;
    std::vector<double> angle_mse[4];      // constant-rate run, per tracked angle
    std::vector<double> gain_mse;
    double hpbw_rad = 0.0;
    int first_event_step_min = -1;         // earliest re-estimation over trials
    double initial_nmse = 0.0;
    double post_nmse = 0.0;
    double baseline_terminal_nmse = 0.0;
    std::vector<int> scenario_phase;       // 0 static, 1 moving per step
};

TrackingScenarioResult run_tracking_scenario(const ScenarioConfig& cfg);

/// Write the mode's result tables under cfg.out_dir. Returns written paths.
std::vector<std::string> emit_sweep(const ScenarioConfig& cfg, const SweepResult& r);
std::vector<std::string> emit_beam_pattern(const ScenarioConfig& cfg,
                                           const BeamPatternResult& r);
std::vector<std::string> emit_tracking(const ScenarioConfig& cfg,
                                       const TrackingScenarioResult& r);
std::vector<std::string> emit_full_pipeline(const ScenarioConfig& cfg,
                                            const SweepResult& r);

} // namespace rismm
