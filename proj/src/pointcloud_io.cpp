#include "rigid_refine/pointcloud_io.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "rigid_refine/errors.hpp"

namespace rigid_refine {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string format_coord(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

PointCloud read_ply(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != "ply") {
    throw ConfigError("not a PLY file");
  }
  std::size_t vertex_count = 0;
  bool ascii = false;
  std::string current_element;
  std::vector<std::string> vertex_props;
  std::vector<std::pair<std::string, std::size_t>> elements;  // order of appearance
  while (std::getline(in, line)) {
    std::istringstream ss(trim(line));
    std::string word;
    ss >> word;
    if (word == "format") {
      std::string fmt;
      ss >> fmt;
      ascii = fmt == "ascii";
    } else if (word == "element") {
      std::size_t count = 0;
      ss >> current_element >> count;
      elements.emplace_back(current_element, count);
      if (current_element == "vertex") vertex_count = count;
    } else if (word == "property" && current_element == "vertex") {
      std::string type, name;
      ss >> type >> name;
      vertex_props.push_back(name);
    } else if (word == "end_header") {
      break;
    }
  }
  if (!ascii) throw ConfigError("only ASCII PLY is supported");
  int ix = -1, iy = -1, iz = -1;
  for (std::size_t i = 0; i < vertex_props.size(); ++i) {
    if (vertex_props[i] == "x") ix = static_cast<int>(i);
    if (vertex_props[i] == "y") iy = static_cast<int>(i);
    if (vertex_props[i] == "z") iz = static_cast<int>(i);
  }
  if (ix < 0 || iy < 0 || iz < 0) throw ConfigError("PLY vertex element lacks x, y, z");

  for (const auto& [name, count] : elements) {
    if (name == "vertex") break;
    for (std::size_t k = 0; k < count; ++k) std::getline(in, line);
  }
  Points pts(3, static_cast<Eigen::Index>(vertex_count));
  for (std::size_t v = 0; v < vertex_count; ++v) {
    if (!std::getline(in, line)) throw ConfigError("PLY vertex list is truncated");
    std::istringstream ss(line);
    std::vector<double> values(vertex_props.size());
    for (double& x : values) {
      if (!(ss >> x)) throw ConfigError("malformed PLY vertex line");
    }
    const auto col = static_cast<Eigen::Index>(v);
    pts(0, col) = values[static_cast<std::size_t>(ix)];
    pts(1, col) = values[static_cast<std::size_t>(iy)];
    pts(2, col) = values[static_cast<std::size_t>(iz)];
  }
  return PointCloud(std::move(pts));
}

void write_ply(std::ostream& out, const PointCloud& cloud) {
  out << "ply\nformat ascii 1.0\nelement vertex " << cloud.size()
      << "\nproperty float x\nproperty float y\nproperty float z\nend_header\n";
  const Points& m = cloud.matrix();
  for (Eigen::Index i = 0; i < m.cols(); ++i) {
    out << format_coord(m(0, i)) << ' ' << format_coord(m(1, i)) << ' ' << format_coord(m(2, i))
        << '\n';
  }
}

PointCloud read_xyz_csv(std::istream& in) {
  std::vector<Point3> pts;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    if (first && line == "x,y,z") {
      first = false;
      continue;
    }
    first = false;
    std::istringstream ss(line);
    Point3 p;
    char c1 = 0, c2 = 0;
    if (!(ss >> p.x() >> c1 >> p.y() >> c2 >> p.z()) || c1 != ',' || c2 != ',') {
      throw ConfigError("malformed CSV point line: " + line);
    }
    pts.push_back(p);
  }
  if (pts.empty()) throw ConfigError("CSV point file contains no points");
  return PointCloud(std::span<const Point3>(pts));
}

void write_xyz_csv(std::ostream& out, const PointCloud& cloud) {
  out << "x,y,z\n";
  const Points& m = cloud.matrix();
  for (Eigen::Index i = 0; i < m.cols(); ++i) {
    out << format_coord(m(0, i)) << ',' << format_coord(m(1, i)) << ',' << format_coord(m(2, i))
        << '\n';
  }
}

PointCloud load_point_cloud(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  if (path.extension() == ".ply") return read_ply(in);
  if (path.extension() == ".csv") return read_xyz_csv(in);
  throw ConfigError("unknown point cloud extension: " + path.string());
}

void save_point_cloud(const std::filesystem::path& path, const PointCloud& cloud) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  if (path.extension() == ".ply") {
    write_ply(out, cloud);
  } else if (path.extension() == ".csv") {
    write_xyz_csv(out, cloud);
  } else {
    throw ConfigError("unknown point cloud extension: " + path.string());
  }
}

}  // namespace rigid_refine
