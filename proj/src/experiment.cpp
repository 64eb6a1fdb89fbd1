#include "rigid_refine/experiment.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "rigid_refine/diagnostics.hpp"
#include "rigid_refine/errors.hpp"
#include "rigid_refine/kabsch.hpp"
#include "rigid_refine/metrics.hpp"
#include "rigid_refine/refiner.hpp"
#include "rigid_refine/synth.hpp"

namespace rigid_refine {

namespace {

using Field = std::optional<double> TrialRecord::*;

constexpr std::array<Field, 14> kNumericFields = {
    &TrialRecord::iso_rot_deg,     &TrialRecord::aniso_z_deg,      &TrialRecord::aniso_y_deg,
    &TrialRecord::aniso_x_deg,     &TrialRecord::trans_l1,         &TrialRecord::trans_l2,
    &TrialRecord::chamfer,         &TrialRecord::mean_point_dist,  &TrialRecord::augmented_loss,
    &TrialRecord::divergence,      &TrialRecord::max_col_distance, &TrialRecord::max_col_angle_deg,
    &TrialRecord::det_g_normalized, &TrialRecord::fallback_count,
};

constexpr std::array<const char*, 14> kNumericNames = {
    "iso_rot_deg",      "aniso_z_deg",       "aniso_y_deg",      "aniso_x_deg",
    "trans_l1",         "trans_l2",          "chamfer",          "mean_point_dist",
    "augmented_loss",   "divergence",        "max_col_distance", "max_col_angle_deg",
    "det_g_normalized", "fallback_count",
};

std::string status_of(const std::exception& e) {
  if (dynamic_cast<const DegenerateGeometry*>(&e)) return "degenerate_geometry";
  if (dynamic_cast<const SingularSystem*>(&e)) return "singular_system";
  if (dynamic_cast<const CollinearColumns*>(&e)) return "collinear_columns";
  if (dynamic_cast<const InsufficientPoints*>(&e)) return "insufficient_points";
  if (dynamic_cast<const IllConditioned*>(&e)) return "ill_conditioned";
  if (dynamic_cast<const InvalidArgument*>(&e)) return "invalid_argument";
  return "error";
}

Field field_by_name(const std::string& name) {
  for (std::size_t i = 0; i < kNumericNames.size(); ++i) {
    if (name == kNumericNames[i]) return kNumericFields[i];
  }
  throw InvalidArgument("unknown column " + name);
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols = [] {
    std::vector<std::string> c{"seed", "method"};
    c.insert(c.end(), kNumericNames.begin(), kNumericNames.end());
    c.emplace_back("status");
    return c;
  }();
  return cols;
}

std::string format_value(const std::optional<double>& v) {
  if (!v || !std::isfinite(*v)) return "NA";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", *v);
  return buf;
}

TrialRecord run_trial(const ExperimentConfig& config, std::uint64_t seed) {
  TrialRecord rec;
  rec.seed = seed;
  rec.method = config.method;
  try {
    ProblemSpec spec = config.problem;
    spec.seed = seed;
    const LabeledProblem prob = make_problem(spec);
    const CorrespondenceSet& corr = prob.correspondences;

    RefinementTrace trace;
    std::optional<RigidTransform> kabsch_pose;
    switch (config.method) {
      case Method::kabsch:
        kabsch_pose = estimate_pose_kabsch(corr);
        trace.poses.push_back(*kabsch_pose);
        break;
      case Method::refined:
        kabsch_pose = estimate_pose_kabsch(corr);
        trace = refine(corr, *kabsch_pose, config.refinements);
        break;
      case Method::icp:
        trace.poses.push_back(icp_baseline(prob.source_cloud, prob.target_cloud,
                                           RigidTransform::identity(), config.icp_max_iters,
                                           config.icp_tol)
                                  .pose);
        break;
    }
    const RigidTransform& est = trace.poses.back();

    const RotationError re = rotation_error(est.rotation, prob.gt.rotation);
    rec.iso_rot_deg = re.iso_deg;
    rec.aniso_z_deg = re.aniso_deg.z;
    rec.aniso_y_deg = re.aniso_deg.y;
    rec.aniso_x_deg = re.aniso_deg.x;
    rec.trans_l1 = translation_error(est.translation, prob.gt.translation, NormOrder::l1);
    rec.trans_l2 = translation_error(est.translation, prob.gt.translation, NormOrder::l2);
    rec.chamfer = chamfer_distance(est.apply(prob.source_cloud), prob.target_cloud);
    rec.mean_point_dist = mean_point_distance(prob.source_cloud, est, prob.gt);
    rec.augmented_loss = augmented_loss(trace, prob.gt);
    rec.fallback_count = static_cast<double>(trace.fallback_count());

    if (config.report_diagnostics) {
      const CenteredCorrespondences cc = center(corr);
      try {
        if (!kabsch_pose) kabsch_pose = estimate_pose_kabsch(corr);
        RefinementTrace kabsch_only;
        kabsch_only.poses.push_back(*kabsch_pose);
        const RefinementTrace& diag_trace = config.method == Method::refined ? trace : kabsch_only;
        const DivergenceReport rep = divergence_report(diag_trace, *kabsch_pose, cc);
        if (config.method == Method::refined) rec.divergence = rep.divergence;
        rec.max_col_distance = rep.max_col_distance;
        rec.max_col_angle_deg = rep.max_col_angle_deg;
        rec.det_g_normalized = rep.det_g_normalized;
      } catch (const DegenerateGeometry&) {
        // ICP can succeed where Kabsch on the raw pairs cannot; the
        // conditioning of G is still meaningful.
        rec.det_g_normalized = unconstrained_solution(cc).det_g_normalized;
      }
    }
  } catch (const Error& e) {
    TrialRecord failed;
    failed.seed = seed;
    failed.method = config.method;
    failed.status = status_of(e);
    return failed;
  }
  return rec;
}

std::vector<TrialRecord> run_experiment(const ExperimentConfig& config, Execution exec) {
  config.validate();
  std::vector<TrialRecord> records(static_cast<std::size_t>(config.trials));
  kernels::for_each_index(records.size(), exec, [&](std::size_t i) {
    records[i] = run_trial(config, config.problem.seed + i);
  });
  return records;
}

std::vector<ColumnStats> aggregate(const std::vector<TrialRecord>& records) {
  std::vector<ColumnStats> out(kNumericFields.size());
  for (std::size_t c = 0; c < kNumericFields.size(); ++c) {
    ColumnStats& s = out[c];
    double sum = 0.0, sum_sq = 0.0, sum_abs = 0.0;
    for (const TrialRecord& r : records) {
      const std::optional<double>& v = r.*kNumericFields[c];
      if (!v || !std::isfinite(*v)) continue;
      ++s.count;
      sum += *v;
      sum_sq += *v * *v;
      sum_abs += std::abs(*v);
    }
    if (s.count == 0) continue;
    const double n = static_cast<double>(s.count);
    s.mean = sum / n;
    s.rmse = std::sqrt(sum_sq / n);
    s.mae = sum_abs / n;
    double var = 0.0;
    for (const TrialRecord& r : records) {
      const std::optional<double>& v = r.*kNumericFields[c];
      if (!v || !std::isfinite(*v)) continue;
      var += (*v - s.mean) * (*v - s.mean);
    }
    s.stddev = std::sqrt(var / n);
  }
  return out;
}

std::optional<AnisoRmse> aniso_rmse(const std::vector<TrialRecord>& records) {
  double sz = 0.0, sy = 0.0, sx = 0.0;
  std::size_t n = 0;
  for (const TrialRecord& r : records) {
    if (!r.aniso_z_deg || !r.aniso_y_deg || !r.aniso_x_deg) continue;
    sz += *r.aniso_z_deg * *r.aniso_z_deg;
    sy += *r.aniso_y_deg * *r.aniso_y_deg;
    sx += *r.aniso_x_deg * *r.aniso_x_deg;
    ++n;
  }
  if (n == 0) return std::nullopt;
  const double dn = static_cast<double>(n);
  AnisoRmse out;
  out.z = std::sqrt(sz / dn);
  out.y = std::sqrt(sy / dn);
  out.x = std::sqrt(sx / dn);
  out.per_axis_mean = (out.z + out.y + out.x) / 3.0;
  out.pooled = std::sqrt((sz + sy + sx) / (3.0 * dn));
  return out;
}

void write_csv(std::ostream& out, const std::vector<TrialRecord>& records) {
  out << kCsvVersion << '\n';
  const auto& cols = csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  std::size_t ok = 0;
  for (const TrialRecord& r : records) {
    out << r.seed << ',' << method_name(r.method);
    for (Field f : kNumericFields) out << ',' << format_value(r.*f);
    out << ',' << r.status << '\n';
    ok += r.status == "ok";
  }

  const std::vector<ColumnStats> stats = aggregate(records);
  const std::pair<const char*, double ColumnStats::*> rows[] = {
      {"mean", &ColumnStats::mean},
      {"rmse", &ColumnStats::rmse},
      {"mae", &ColumnStats::mae},
      {"stddev", &ColumnStats::stddev},
  };
  for (const auto& [name, member] : rows) {
    out << "#agg," << name;
    for (const ColumnStats& s : stats) {
      out << ',' << format_value(s.count ? std::optional<double>(s.*member) : std::nullopt);
    }
    out << ",n_ok=" << ok << '\n';
  }
  const std::optional<AnisoRmse> a = aniso_rmse(records);
  out << "#agg,aniso_rmse_per_axis," << format_value(a ? std::optional(a->per_axis_mean) : std::nullopt)
      << ',' << format_value(a ? std::optional(a->z) : std::nullopt) << ','
      << format_value(a ? std::optional(a->y) : std::nullopt) << ','
      << format_value(a ? std::optional(a->x) : std::nullopt) << '\n';
  out << "#agg,aniso_rmse_pooled," << format_value(a ? std::optional(a->pooled) : std::nullopt)
      << '\n';
}

SignTest sign_test(const std::vector<double>& baseline, const std::vector<double>& challenger) {
  if (baseline.size() != challenger.size()) throw InvalidArgument("sign test needs paired samples");
  SignTest t;
  for (std::size_t i = 0; i < baseline.size(); ++i) {
    if (challenger[i] < baseline[i]) {
      ++t.wins;
    } else if (challenger[i] > baseline[i]) {
      ++t.losses;
    } else {
      ++t.ties;
    }
  }
  const std::size_t n = t.wins + t.losses;
  if (n == 0) return t;
  const std::size_t k = std::min(t.wins, t.losses);
  // Two-sided exact binomial tail under p = 1/2, summed in log space.
  const double dn = static_cast<double>(n);
  double tail = 0.0;
  for (std::size_t i = 0; i <= k; ++i) {
    const double di = static_cast<double>(i);
    tail += std::exp(std::lgamma(dn + 1) - std::lgamma(di + 1) - std::lgamma(dn - di + 1) -
                     dn * std::log(2.0));
  }
  t.p_value = std::min(1.0, 2.0 * tail);
  return t;
}

std::optional<double> Comparison::difference(std::size_t metric, std::size_t k,
                                             std::size_t trial) const {
  const Field f = field_by_name(metrics.at(metric));
  const std::optional<double>& a = records.at(0).at(trial).*f;
  const std::optional<double>& b = records.at(k).at(trial).*f;
  if (!a || !b) return std::nullopt;
  return *b - *a;
}

Comparison compare_methods(const std::vector<ExperimentConfig>& configs, Execution exec) {
  if (configs.size() < 2) throw InvalidArgument("comparison needs at least two configs");
  for (const ExperimentConfig& c : configs) {
    if (!(c.problem == configs.front().problem) || c.trials != configs.front().trials) {
      throw MismatchedSpecs("compared configs must share the problem spec and trial count");
    }
  }
  Comparison cmp;
  cmp.metrics = {"iso_rot_deg", "trans_l2", "mean_point_dist", "chamfer"};
  for (std::size_t k = 0; k < configs.size(); ++k) {
    std::string label(method_name(configs[k].method));
    const auto same = std::count_if(configs.begin(), configs.end(), [&](const ExperimentConfig& c) {
      return c.method == configs[k].method;
    });
    if (same > 1) label += "_" + std::to_string(k + 1);
    cmp.labels.push_back(label);
    cmp.records.push_back(run_experiment(configs[k], exec));
  }
  for (const std::string& m : cmp.metrics) {
    const Field f = field_by_name(m);
    std::vector<SignTest> per_pair;
    for (std::size_t k = 1; k < configs.size(); ++k) {
      std::vector<double> base, chal;
      for (std::size_t i = 0; i < cmp.records[0].size(); ++i) {
        const auto& a = cmp.records[0][i].*f;
        const auto& b = cmp.records[k][i].*f;
        if (a && b) {
          base.push_back(*a);
          chal.push_back(*b);
        }
      }
      per_pair.push_back(sign_test(base, chal));
    }
    cmp.summaries.push_back(std::move(per_pair));
  }
  return cmp;
}

void write_comparison_csv(std::ostream& out, const Comparison& cmp) {
  out << "# rigid-refine comparison v1\n";
  out << "seed,metric";
  for (const std::string& l : cmp.labels) out << ',' << l;
  for (std::size_t k = 1; k < cmp.labels.size(); ++k) {
    out << ",diff_" << cmp.labels[k] << "_minus_" << cmp.labels[0];
  }
  out << '\n';
  const std::size_t trials = cmp.records.front().size();
  for (std::size_t i = 0; i < trials; ++i) {
    for (std::size_t m = 0; m < cmp.metrics.size(); ++m) {
      const Field f = field_by_name(cmp.metrics[m]);
      out << cmp.records[0][i].seed << ',' << cmp.metrics[m];
      for (const auto& recs : cmp.records) out << ',' << format_value(recs[i].*f);
      for (std::size_t k = 1; k < cmp.labels.size(); ++k) {
        out << ',' << format_value(cmp.difference(m, k, i));
      }
      out << '\n';
    }
  }
  out << "#sign,metric,pair,wins,losses,ties,p_value\n";
  for (std::size_t m = 0; m < cmp.metrics.size(); ++m) {
    for (std::size_t k = 1; k < cmp.labels.size(); ++k) {
      const SignTest& t = cmp.summaries[m][k - 1];
      out << "#sign," << cmp.metrics[m] << ',' << cmp.labels[k] << "_vs_" << cmp.labels[0] << ','
          << t.wins << ',' << t.losses << ',' << t.ties << ',' << format_value(t.p_value) << '\n';
    }
  }
}

DivergenceEnvelope calibrate_envelope(ExperimentConfig config, Execution exec) {
  config.method = Method::refined;
  config.report_diagnostics = true;
  const std::vector<TrialRecord> records = run_experiment(config, exec);
  std::vector<double> xs, ds;
  for (const TrialRecord& r : records) {
    if (r.status != "ok" || !r.divergence || !r.max_col_distance || !r.det_g_normalized) continue;
    if (*r.det_g_normalized < kWellConditionedDetG) continue;
    xs.push_back(*r.max_col_distance);
    ds.push_back(*r.divergence);
  }
  if (xs.empty()) throw InvalidArgument("no well-conditioned calibration trial");

  const double n = static_cast<double>(xs.size());
  double mx = 0.0, md = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    md += ds[i];
  }
  mx /= n;
  md /= n;
  double sxx = 0.0, sxd = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxd += (xs[i] - mx) * (ds[i] - md);
  }
  DivergenceEnvelope env;
  env.alpha = sxx > 0.0 ? std::max(0.0, sxd / sxx) : 0.0;
  double worst = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) worst = std::max(worst, ds[i] - env.alpha * xs[i]);
  env.beta = 2.0 * worst;
  env.seed = config.problem.seed;
  env.trials = config.trials;
  return env;
}

void write_envelope(std::ostream& out, const DivergenceEnvelope& env) {
  out << "alpha = " << fmt17(env.alpha) << '\n'
      << "beta = " << fmt17(env.beta) << '\n'
      << "seed = " << env.seed << '\n'
      << "trials = " << env.trials << '\n';
}

DivergenceEnvelope read_envelope(std::istream& in) {
  DivergenceEnvelope env;
  bool have_alpha = false, have_beta = false;
  std::string line;
  while (std::getline(in, line)) {
    line = line.substr(0, line.find('#'));
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::istringstream key_in(line.substr(0, eq)), value_in(line.substr(eq + 1));
    std::string key;
    key_in >> key;
    if (key == "alpha") {
      have_alpha = static_cast<bool>(value_in >> env.alpha);
    } else if (key == "beta") {
      have_beta = static_cast<bool>(value_in >> env.beta);
    } else if (key == "seed") {
      value_in >> env.seed;
    } else if (key == "trials") {
      value_in >> env.trials;
    }
  }
  if (!have_alpha || !have_beta) throw ConfigError("envelope file lacks alpha or beta");
  return env;
}

}  // namespace rigid_refine
