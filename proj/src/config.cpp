#include "rigid_refine/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <string>

#include "rigid_refine/errors.hpp"

namespace rigid_refine {

std::string_view method_name(Method m) {
  switch (m) {
    case Method::kabsch:
      return "kabsch";
    case Method::refined:
      return "refined";
    case Method::icp:
      return "icp";
  }
  return "?";
}

Method parse_method(std::string_view s) {
  if (s == "kabsch") return Method::kabsch;
  if (s == "refined") return Method::refined;
  if (s == "icp") return Method::icp;
  throw ConfigError("unknown method '" + std::string(s) + "' (expected kabsch, refined or icp)");
}

void ExperimentConfig::validate() const {
  if (trials < 1) throw ConfigError("trials must be at least 1");
  if (method == Method::refined && refinements < 1) {
    throw ConfigError("refinements must be at least 1 for the refined method");
  }
  if (method == Method::icp && icp_max_iters < 1) throw ConfigError("icp.max_iters must be >= 1");
  if (!(icp_tol >= 0.0)) throw ConfigError("icp.tol must be non-negative");
  try {
    problem.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("invalid problem: ") + e.what());
  }
}

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
  return a.problem == b.problem && a.method == b.method && a.refinements == b.refinements &&
         a.trials == b.trials && a.output_path == b.output_path &&
         a.report_diagnostics == b.report_diagnostics && a.icp_max_iters == b.icp_max_iters &&
         a.icp_tol == b.icp_tol;
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <class T>
T parse_number(const std::string& key, const std::string& v) {
  T out{};
  const char* first = v.data();
  const char* last = v.data() + v.size();
  if (!v.empty() && v.front() == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last) {
    throw ConfigError("key '" + key + "': cannot parse '" + v + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("key '" + key + "': expected true or false, got '" + v + "'");
}

Range parse_range(const std::string& key, const std::string& v) {
  const auto comma = v.find(',');
  if (comma == std::string::npos) throw ConfigError("key '" + key + "': expected 'lo, hi'");
  return {parse_number<double>(key, trim(v.substr(0, comma))),
          parse_number<double>(key, trim(v.substr(comma + 1)))};
}

CloudKind parse_cloud(const std::string& key, const std::string& v) {
  if (v == "ball") return CloudKind::ball;
  if (v == "sphere") return CloudKind::sphere;
  if (v == "slab") return CloudKind::slab;
  throw ConfigError("key '" + key + "': unknown cloud '" + v + "'");
}

std::string_view cloud_name(CloudKind k) {
  switch (k) {
    case CloudKind::ball:
      return "ball";
    case CloudKind::sphere:
      return "sphere";
    case CloudKind::slab:
      return "slab";
  }
  return "?";
}

NoiseTarget parse_noise_target(const std::string& key, const std::string& v) {
  if (v == "source") return NoiseTarget::source;
  if (v == "target") return NoiseTarget::target;
  if (v == "both") return NoiseTarget::both;
  throw ConfigError("key '" + key + "': expected source, target or both");
}

std::string_view noise_target_name(NoiseTarget t) {
  switch (t) {
    case NoiseTarget::source:
      return "source";
    case NoiseTarget::target:
      return "target";
    case NoiseTarget::both:
      return "both";
  }
  return "?";
}

using Setter = std::function<void(ExperimentConfig&, const std::string& key, const std::string& v)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = [] {
    std::map<std::string, Setter, std::less<>> t;
    t["method"] = [](ExperimentConfig& c, auto&, auto& v) { c.method = parse_method(v); };
    t["refinements"] = [](ExperimentConfig& c, auto& k, auto& v) {
      c.refinements = parse_number<int>(k, v);
    };
    t["trials"] = [](ExperimentConfig& c, auto& k, auto& v) { c.trials = parse_number<int>(k, v); };
    t["output_path"] = [](ExperimentConfig& c, auto&, auto& v) { c.output_path = v; };
    t["report_diagnostics"] = [](ExperimentConfig& c, auto& k, auto& v) {
      c.report_diagnostics = parse_bool(k, v);
    };
    t["icp.max_iters"] = [](ExperimentConfig& c, auto& k, auto& v) {
      c.icp_max_iters = parse_number<int>(k, v);
    };
    t["icp.tol"] = [](ExperimentConfig& c, auto& k, auto& v) {
      c.icp_tol = parse_number<double>(k, v);
    };
    t["problem.n_points"] = [](ExperimentConfig& c, auto& k, auto& v) {
      c.problem.n_points = parse_number<int>(k, v);
    };
    t["problem.base_points"] = [](ExperimentConfig& c, auto& k, auto& v) {
      c.problem.base_points = parse_number<int>(k, v);
    };
    t["problem.cloud"] = [](ExperimentConfig& c, auto& k, auto& v) {
      c.problem.cloud = parse_cloud(k, v);
    };
    t["problem.slab_thickness"] = [](ExperimentConfig& c, auto& k, auto& v) {
      c.problem.slab_thickness = parse_number<double>(k, v);
    };
    t["problem.rot_range_deg"] = [](ExperimentConfig& c, auto& k, auto& v) {
      c.problem.rot_range_deg.fill(parse_range(k, v));
    };
    t["problem.trans_range"] = [](ExperimentConfig& c, auto& k, auto& v) {
      c.problem.trans_range.fill(parse_range(k, v));
    };
    // rot_range_deg is stored z, y, x; trans_range x, y, z.
    const char* rot_axes[] = {"z", "y", "x"};
    const char* trans_axes[] = {"x", "y", "z"};
    for (std::size_t a = 0; a < 3; ++a) {
      t[std::string("problem.rot_range_deg.") + rot_axes[a]] =
          [a](ExperimentConfig& c, auto& k, auto& v) { c.problem.rot_range_deg[a] = parse_range(k, v); };
      t[std::string("problem.trans_range.") + trans_axes[a]] =
          [a](ExperimentConfig& c, auto& k, auto& v) { c.problem.trans_range[a] = parse_range(k, v); };
    }
    t["problem.noise_sigma"] = [](ExperimentConfig& c, auto& k, auto& v) {
      c.problem.noise_sigma = parse_number<double>(k, v);
    };
    t["problem.noise_clamp"] = [](ExperimentConfig& c, auto& k, auto& v) {
      c.problem.noise_clamp = parse_number<double>(k, v);
    };
    t["problem.noise_on"] = [](ExperimentConfig& c, auto& k, auto& v) {
      c.problem.noise_on = parse_noise_target(k, v);
    };
    t["problem.crop_keep_fraction"] = [](ExperimentConfig& c, auto& k, auto& v) {
      c.problem.crop_keep_fraction = parse_number<double>(k, v);
    };
    t["problem.independent_resample"] = [](ExperimentConfig& c, auto& k, auto& v) {
      c.problem.independent_resample = parse_bool(k, v);
    };
    t["problem.seed"] = [](ExperimentConfig& c, auto& k, auto& v) {
      c.problem.seed = parse_number<std::uint64_t>(k, v);
    };
    return t;
  }();
  return table;
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string range(const Range& r) { return num(r.lo) + ", " + num(r.hi); }

}  // namespace

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig config;
  std::set<std::string, std::less<>> seen;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    const std::string body = trim(std::string_view(line).substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) {
      throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    if (!seen.insert(key).second) {
      throw ConfigError("line " + std::to_string(line_no) + ": key '" + key + "' repeated");
    }
    it->second(config, key, value);
  }
  config.validate();
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  try {
    return parse_config(in);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void write_config(std::ostream& out, const ExperimentConfig& c) {
  const ProblemSpec& p = c.problem;
  out << "method = " << method_name(c.method) << '\n'
      << "refinements = " << c.refinements << '\n'
      << "trials = " << c.trials << '\n';
  if (!c.output_path.empty()) out << "output_path = " << c.output_path << '\n';
  out << "report_diagnostics = " << (c.report_diagnostics ? "true" : "false") << '\n'
      << "icp.max_iters = " << c.icp_max_iters << '\n'
      << "icp.tol = " << num(c.icp_tol) << '\n'
      << "problem.n_points = " << p.n_points << '\n'
      << "problem.base_points = " << p.base_points << '\n'
      << "problem.cloud = " << cloud_name(p.cloud) << '\n'
      << "problem.slab_thickness = " << num(p.slab_thickness) << '\n'
      << "problem.rot_range_deg.z = " << range(p.rot_range_deg[0]) << '\n'
      << "problem.rot_range_deg.y = " << range(p.rot_range_deg[1]) << '\n'
      << "problem.rot_range_deg.x = " << range(p.rot_range_deg[2]) << '\n'
      << "problem.trans_range.x = " << range(p.trans_range[0]) << '\n'
      << "problem.trans_range.y = " << range(p.trans_range[1]) << '\n'
      << "problem.trans_range.z = " << range(p.trans_range[2]) << '\n'
      << "problem.noise_sigma = " << num(p.noise_sigma) << '\n'
      << "problem.noise_clamp = " << num(p.noise_clamp) << '\n'
      << "problem.noise_on = " << noise_target_name(p.noise_on) << '\n'
      << "problem.crop_keep_fraction = " << num(p.crop_keep_fraction) << '\n'
      << "problem.independent_resample = " << (p.independent_resample ? "true" : "false") << '\n'
      << "problem.seed = " << p.seed << '\n';
}

}  // namespace rigid_refine
