#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rigid_refine/config.hpp"
#include "rigid_refine/errors.hpp"
#include "rigid_refine/experiment.hpp"
#include "rigid_refine/gradcheck.hpp"
#include "rigid_refine/kernels.hpp"

namespace rr = rigid_refine;

namespace {

constexpr double kGradcheckTolerance = 1e-5;

void apply_thread_cap() {
  const char* env = std::getenv("RIGID_REFINE_THREADS");
  if (env == nullptr || *env == '\0') return;
  char* end = nullptr;
  const long n = std::strtol(env, &end, 10);
  if (*end != '\0' || n < 0) {
    throw rr::ConfigError(std::string("RIGID_REFINE_THREADS must be a non-negative integer, got '") +
                          env + "'");
  }
  rr::kernels::set_max_threads(static_cast<int>(n));
}

// Writes to path, or stdout when path is empty.
void emit(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw rr::ConfigError("cannot write " + path);
  out << text;
  if (!out.flush()) throw rr::ConfigError("write failed for " + path);
}

int cmd_run(const std::string& config_path, const std::string& out_path, int trials,
            long long seed) {
  rr::ExperimentConfig config = rr::load_config(config_path);
  if (trials > 0) config.trials = trials;
  if (seed >= 0) config.problem.seed = static_cast<std::uint64_t>(seed);
  if (!out_path.empty()) config.output_path = out_path;
  config.validate();

  const std::vector<rr::TrialRecord> records = rr::run_experiment(config);
  std::ostringstream csv;
  rr::write_csv(csv, records);
  emit(config.output_path, csv.str());

  std::size_t failed = 0;
  for (const auto& r : records) failed += r.status != "ok";
  std::cerr << records.size() << " trials, " << failed << " ended with an error status\n";
  return 0;
}

int cmd_compare(const std::vector<std::string>& config_paths, const std::string& out_path) {
  std::vector<rr::ExperimentConfig> configs;
  for (const auto& p : config_paths) configs.push_back(rr::load_config(p));
  const rr::Comparison cmp = rr::compare_methods(configs);
  std::ostringstream csv;
  rr::write_comparison_csv(csv, cmp);
  emit(out_path, csv.str());
  return 0;
}

int cmd_gradcheck(long long seed, int n_points, int seeds) {
  double worst = 0.0;
  for (int k = 0; k < seeds; ++k) {
    const auto s = static_cast<std::uint64_t>(seed + k);
    const rr::GradcheckReport rep = rr::run_gradcheck(s, n_points);
    std::printf("seed %llu  n_points %d  max_relative_error %.3e  (row %ld, col %ld)\n",
                static_cast<unsigned long long>(s), n_points, rep.comparison.max_relative_error,
                static_cast<long>(rep.comparison.row), static_cast<long>(rep.comparison.col));
    worst = std::max(worst, rep.comparison.max_relative_error);
  }
  std::printf("max_relative_error = %.3e (tolerance %.0e) %s\n", worst, kGradcheckTolerance,
              worst <= kGradcheckTolerance ? "PASS" : "FAIL");
  return worst <= kGradcheckTolerance ? 0 : 1;
}

int cmd_calibrate(const std::string& config_path, const std::string& out_path) {
  const rr::ExperimentConfig config = rr::load_config(config_path);
  const rr::DivergenceEnvelope env = rr::calibrate_envelope(config);
  std::ostringstream text;
  text << "# Divergence envelope D <= alpha * max_col_distance + beta, fitted by\n"
       << "# rigid-refine calibrate-envelope on the well-conditioned trials of:\n";
  std::ostringstream cfg;
  rr::write_config(cfg, config);
  std::istringstream lines(cfg.str());
  for (std::string line; std::getline(lines, line);) text << "#   " << line << '\n';
  rr::write_envelope(text, env);
  emit(out_path, text.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rigid registration with linearized-constraint refinement"};
  app.require_subcommand(1);

  std::string config_path, out_path;
  int trials = 0;
  long long seed = -1;
  auto* run = app.add_subcommand("run", "Run an experiment and write the trial CSV");
  run->add_option("--config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_path, "Output CSV (default: output_path from the config, else stdout)");
  run->add_option("--trials", trials, "Override the trial count")->check(CLI::PositiveNumber);
  run->add_option("--seed", seed, "Override problem.seed")->check(CLI::NonNegativeNumber);

  std::vector<std::string> compare_paths;
  std::string compare_out;
  auto* compare = app.add_subcommand("compare", "Paired per-seed comparison of several configs");
  compare->add_option("--config", compare_paths, "Config file (repeat)")
      ->required()
      ->check(CLI::ExistingFile);
  compare->add_option("--out", compare_out, "Output CSV (default stdout)");

  long long gc_seed = 0;
  int gc_points = 16, gc_seeds = 1;
  auto* gradcheck = app.add_subcommand("gradcheck", "Analytical vs finite-difference Jacobian");
  gradcheck->add_option("--seed", gc_seed, "First seed")->check(CLI::NonNegativeNumber);
  gradcheck->add_option("--n-points", gc_points, "Correspondences per problem")
      ->check(CLI::Range(3, 100000));
  gradcheck->add_option("--seeds", gc_seeds, "Number of consecutive seeds")
      ->check(CLI::PositiveNumber);

  std::string cal_config, cal_out;
  auto* calibrate = app.add_subcommand("calibrate-envelope", "Fit the divergence envelope");
  calibrate->add_option("--config", cal_config, "Calibration config")
      ->required()
      ->check(CLI::ExistingFile);
  calibrate->add_option("--out", cal_out, "Envelope file (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    apply_thread_cap();
    if (*run) return cmd_run(config_path, out_path, trials, seed);
    if (*compare) return cmd_compare(compare_paths, compare_out);
    if (*gradcheck) return cmd_gradcheck(gc_seed, gc_points, gc_seeds);
    if (*calibrate) return cmd_calibrate(cal_config, cal_out);
  } catch (const rr::Error& e) {
    std::cerr << "rigid-refine: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
