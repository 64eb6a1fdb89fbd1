#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "rigid_refine/refiner.hpp"
#include "rigid_refine/synth.hpp"

namespace rigid_refine {

enum class Method { kabsch, refined, icp };

std::string_view method_name(Method m);
Method parse_method(std::string_view s);

struct ExperimentConfig {
  ProblemSpec problem;
  Method method = Method::refined;
  int refinements = kDefaultRefinements;
  int trials = 1;
  std::string output_path;
  bool report_diagnostics = true;
  int icp_max_iters = 50;
  double icp_tol = 1e-10;

  /// Throws ConfigError; also rejects an invalid problem spec.
  void validate() const;
};

/// Flat `key = value` text with dotted keys. `#` starts a comment, blank
/// lines are ignored, unknown or repeated keys are errors. Ranges are
/// written `lo, hi`; `problem.rot_range_deg` and `problem.trans_range` set
/// all three axes, `.z/.y/.x` (resp. `.x/.y/.z`) suffixes set one.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Writes every key, so that parse_config(write_config(c)) == c.
void write_config(std::ostream& out, const ExperimentConfig& config);

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);

}  // namespace rigid_refine
