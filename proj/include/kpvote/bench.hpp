#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "kpvote/mean_shift.hpp"
#include "kpvote/synth.hpp"

namespace kpvote {

// Experiment harness: runs the closed-form voter and the MeanShift baseline
// on identical synthetic scenes, times the voting step in isolation, fits
// poses, computes metrics, and emits machine-readable reports.

enum class Algorithm { wvwv, meanshift };

std::string algorithm_name(Algorithm a);
Algorithm algorithm_from_name(const std::string& name);

/// MeanShift hyperparameters expressed relative to the object diameter so
/// the baseline stays fair across object sizes.
struct MeanShiftSettings {
  double bandwidth_scale = 0.05;     ///< bandwidth = scale * diameter
  Kernel kernel = Kernel::gaussian;
  int max_iterations = 100;
  double shift_tolerance = 1e-5;     ///< meters
  double merge_radius_factor = 0.5;  ///< merge_radius = factor * bandwidth

  MeanShiftConfig resolve(double diameter) const;
};

struct ExperimentConfig {
  SceneConfig scene;  ///< per-trial seed is derived, scene.seed is ignored
  std::vector<Algorithm> algorithms = {Algorithm::wvwv, Algorithm::meanshift};
  int trials = 1;
  int timing_repetitions = 5;  ///< >= 3, median is reported
  std::uint64_t master_seed = 0;
  MeanShiftSettings meanshift;
  double auc_max_threshold_m = 0.10;
  double rank_tolerance = 1e-9;
  bool pose_weight_by_vote_mass = false;  ///< default unweighted fit
  std::string output_csv;
  std::string output_json;

  void validate() const;

  /// Hash of the result-affecting fields only (output paths and thread
  /// count excluded), hex-printed in every report for provenance.
  std::uint64_t fingerprint() const;
};

struct TrialReport {
  int trial = 0;
  Algorithm algorithm = Algorithm::wvwv;
  double kp_rmse_m = 0.0;
  std::vector<double> per_keypoint_error_m;
  double add_m = 0.0;
  double adds_m = 0.0;
  std::int64_t vote_time_ns = 0;
  std::int64_t fit_time_ns = 0;
  std::vector<int> ranks;  ///< per-keypoint normal-system rank (wvwv only)
  bool degenerate = false;
  std::string degenerate_reason;
};

/// Thread count: VOTE_BENCH_THREADS when set, machine default otherwise.
unsigned bench_thread_count();

/// Runs every trial (possibly in parallel; results are independent of
/// scheduling), executing each configured algorithm on bit-identical scene
/// inputs. Timed regions never overlap and contain no scene-sized
/// allocations. Degenerate trials are recorded, not fatal.
std::vector<TrialReport> run_experiment(const ExperimentConfig& config);

// CSV: one metadata comment line carrying the config fingerprint, the
// trial-0 model diameter, and the AUC ceiling; then a fixed header
// trial,algorithm,kp_rmse_m,add_m,adds_m,vote_time_ns,fit_time_ns,rank_flags
// and one row per report. Numeric fields use 17 significant digits, so a
// parse round-trips losslessly.
void write_csv(const std::vector<TrialReport>& reports,
               const ExperimentConfig& config, double diameter_m,
               std::ostream& out);

struct ParsedCsv {
  std::uint64_t fingerprint = 0;
  double diameter_m = 0.0;
  double auc_max_m = 0.0;
  std::vector<TrialReport> reports;
};
ParsedCsv read_csv(std::istream& in);
ParsedCsv read_csv_file(const std::string& path);

/// Structured report: config echo plus per-keypoint detail per trial.
void write_json(const std::vector<TrialReport>& reports,
                const ExperimentConfig& config, double diameter_m,
                std::ostream& out);

struct AlgorithmSummary {
  Algorithm algorithm = Algorithm::wvwv;
  int trials = 0;
  int degenerate = 0;
  double mean_kp_rmse_m = 0.0;
  double median_kp_rmse_m = 0.0;
  double add_auc = 0.0;
  double add_0_1d = 0.0;
  double median_vote_time_ns = 0.0;
  double median_fit_time_ns = 0.0;
};

struct Summary {
  std::vector<AlgorithmSummary> per_algorithm;
  std::optional<double> speedup_vs_meanshift;  ///< present when both ran
  bool all_degenerate = false;
};

/// Aggregates reports; throws InvalidInput on an empty list. diameter_m and
/// auc_max_m come from the run config or the CSV metadata.
Summary summarize(const std::vector<TrialReport>& reports, double diameter_m,
                  double auc_max_m);

std::string format_summary_table(const Summary& summary);

// Config (de)serialization for the CLI: a JSON document whose keys mirror
// ExperimentConfig; see the README for the schema.
ExperimentConfig load_experiment_config(const std::string& path);
std::string experiment_config_to_json(const ExperimentConfig& config);
ExperimentConfig experiment_config_from_json_text(const std::string& text);

}  // namespace kpvote
