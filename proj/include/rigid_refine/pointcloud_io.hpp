#pragma once

#include <filesystem>
#include <iosfwd>

#include "rigid_refine/core.hpp"

namespace rigid_refine {

/// ASCII PLY with a single `element vertex` carrying `property float x, y, z`
/// (other vertex properties and elements are skipped on read).
PointCloud read_ply(std::istream& in);
void write_ply(std::ostream& out, const PointCloud& cloud);

/// One `x,y,z` point per line; an optional `x,y,z` header line is accepted.
PointCloud read_xyz_csv(std::istream& in);
void write_xyz_csv(std::ostream& out, const PointCloud& cloud);

/// Dispatch on extension (.ply or .csv). Throws ConfigError on I/O failure.
PointCloud load_point_cloud(const std::filesystem::path& path);
void save_point_cloud(const std::filesystem::path& path, const PointCloud& cloud);

}  // namespace rigid_refine
