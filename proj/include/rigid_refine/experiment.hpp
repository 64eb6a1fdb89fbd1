#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rigid_refine/config.hpp"
#include "rigid_refine/kernels.hpp"

namespace rigid_refine {

/// One CSV row. Empty optionals are written as `NA`.
struct TrialRecord {
  std::uint64_t seed = 0;
  Method method = Method::kabsch;
  std::optional<double> iso_rot_deg;
  std::optional<double> aniso_z_deg;
  std::optional<double> aniso_y_deg;
  std::optional<double> aniso_x_deg;
  std::optional<double> trans_l1;
  std::optional<double> trans_l2;
  std::optional<double> chamfer;
  std::optional<double> mean_point_dist;
  std::optional<double> augmented_loss;
  std::optional<double> divergence;
  std::optional<double> max_col_distance;
  std::optional<double> max_col_angle_deg;
  std::optional<double> det_g_normalized;
  std::optional<double> fallback_count;
  std::string status = "ok";  // "ok" or the error kind that ended the trial
};

inline constexpr const char* kCsvVersion = "# rigid-refine trials v1";

/// Column names in row order.
const std::vector<std::string>& csv_columns();

/// Runs a single trial on the problem drawn from `seed`.
TrialRecord run_trial(const ExperimentConfig& config, std::uint64_t seed);

/// Trial i uses seed problem.seed + i. Trials run on the worker pool when
/// exec is parallel; the returned order is always trial order. Errors of a
/// trial end up in its status field and never abort the batch.
std::vector<TrialRecord> run_experiment(const ExperimentConfig& config,
                                        Execution exec = Execution::parallel);

struct ColumnStats {
  std::size_t count = 0;  // rows with a value
  double mean = 0.0;
  double rmse = 0.0;
  double mae = 0.0;
  double stddev = 0.0;  // population
};

/// Per numeric column, over the rows where the value is present.
std::vector<ColumnStats> aggregate(const std::vector<TrialRecord>& records);

struct AnisoRmse {
  double z = 0.0, y = 0.0, x = 0.0;
  double per_axis_mean = 0.0;  // mean of the three per-axis RMSEs
  double pooled = 0.0;         // RMSE over all angles of all trials
};
std::optional<AnisoRmse> aniso_rmse(const std::vector<TrialRecord>& records);

/// Version line, header, one row per record, then `#agg,` rows.
void write_csv(std::ostream& out, const std::vector<TrialRecord>& records);

/// `%.9g`, or NA when empty or non-finite.
std::string format_value(const std::optional<double>& v);

struct SignTest {
  std::size_t wins = 0;  // challenger strictly smaller
  std::size_t losses = 0;
  std::size_t ties = 0;
  double p_value = 1.0;  // two-sided exact binomial over wins + losses
};

SignTest sign_test(const std::vector<double>& baseline, const std::vector<double>& challenger);

struct Comparison {
  std::vector<std::string> labels;                  // one per config
  std::vector<std::vector<TrialRecord>> records;    // [config][trial]
  std::vector<std::string> metrics;                 // compared columns
  // summaries[metric][k - 1]: config k against config 0.
  std::vector<std::vector<SignTest>> summaries;

  /// Paired difference (config k minus config 0) for one trial and metric;
  /// empty when either side is NA.
  std::optional<double> difference(std::size_t metric, std::size_t k, std::size_t trial) const;
};

/// Throws MismatchedSpecs unless every config shares the problem spec and
/// trial count.
Comparison compare_methods(const std::vector<ExperimentConfig>& configs,
                           Execution exec = Execution::parallel);

void write_comparison_csv(std::ostream& out, const Comparison& cmp);

/// Linear upper envelope D <= alpha * max_col_distance + beta.
struct DivergenceEnvelope {
  double alpha = 0.0;
  double beta = 0.0;
  std::uint64_t seed = 0;
  int trials = 0;
  bool bounds(double distance, double divergence) const {
    return divergence <= alpha * distance + beta;
  }
};

/// Minimal normalized det(G) for a trial to count as well conditioned.
inline constexpr double kWellConditionedDetG = 1e-2;

/// Runs `config` (method forced to refined, diagnostics on), keeps the
/// well-conditioned trials and fits alpha as the least-squares slope of D
/// on max_col_distance (clamped at 0), then beta as twice the largest
/// residual above that line, so every calibration trial lies inside.
DivergenceEnvelope calibrate_envelope(ExperimentConfig config, Execution exec = Execution::parallel);

void write_envelope(std::ostream& out, const DivergenceEnvelope& env);
DivergenceEnvelope read_envelope(std::istream& in);

}  // namespace rigid_refine
