#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "rigid_refine/core.hpp"
#include "rigid_refine/rng.hpp"

namespace rigid_refine {

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

enum class CloudKind { ball, sphere, slab };
enum class NoiseTarget { source, target, both };

/// Corruption protocol for one synthetic registration problem.
struct ProblemSpec {
  int n_points = 1024;
  std::array<Range, 3> rot_range_deg{{{0.0, 45.0}, {0.0, 45.0}, {0.0, 45.0}}};  // z, y, x
  std::array<Range, 3> trans_range{{{-0.5, 0.5}, {-0.5, 0.5}, {-0.5, 0.5}}};
  double noise_sigma = 0.0;
  double noise_clamp = 0.05;
  NoiseTarget noise_on = NoiseTarget::both;
  double crop_keep_fraction = 1.0;
  bool independent_resample = false;
  std::uint64_t seed = 0;

  // Built-in base cloud the problem is drawn from.
  CloudKind cloud = CloudKind::ball;
  int base_points = 2048;
  double slab_thickness = 1e-3;

  /// Throws InvalidArgument on unordered ranges, negative clamp, fraction
  /// outside (0, 1] or non-positive counts.
  void validate() const;
};

bool operator==(const Range& a, const Range& b);
bool operator==(const ProblemSpec& a, const ProblemSpec& b);

struct LabeledProblem {
  CorrespondenceSet correspondences;  // overlapping pairs only, unit weights
  RigidTransform gt;
  std::vector<bool> overlap_mask;  // per source index: pair survives both crops
  PointCloud source_cloud;         // full (cropped) clouds, for ICP and Chamfer
  PointCloud target_cloud;
  Points source_noise;  // applied perturbations, one column per source point
  Points target_noise;
};

/// Minimal fraction of source indices whose pair must survive both crops.
inline constexpr double kMinCropOverlap = 0.3;
inline constexpr int kMaxCropAttempts = 100;

/// Euler angles z, y, x uniform per axis (composed intrinsically z -> y -> x),
/// then translation x, y, z uniform per axis. Consumes six uniform draws.
RigidTransform sample_transform(const ProblemSpec& spec, Rng& rng);

Vec3 random_unit_vector(Rng& rng);
/// Uniform on SO(3) (normalized Gaussian quaternion).
Rotation random_rotation(Rng& rng);

/// ball: uniform in the unit ball; sphere: uniform on the unit sphere;
/// slab: uniform in the unit disk (z = 0) thickened uniformly to
/// |z| <= thickness / 2.
PointCloud make_base_cloud(CloudKind kind, int n, Rng& rng, double slab_thickness = 1e-3);

/// Keeps floor(keep_fraction * N) points with the largest signed distance to
/// the plane through the cloud centroid with the given normal; ties go to
/// the lower index. Returned indices are ascending.
std::vector<std::size_t> half_space_crop(const Points& cloud, const Vec3& normal,
                                         double keep_fraction);

/// Builds a labelled problem from base_cloud. Draw order: transform, index
/// shuffle (resample only), source noise, target noise, crop normals.
/// Throws InsufficientPoints when the base cloud is too small or no crop pair
/// reaches kMinCropOverlap within kMaxCropAttempts.
LabeledProblem make_problem(const ProblemSpec& spec, const PointCloud& base_cloud, Rng& rng);

/// Base cloud and problem both drawn from Rng(spec.seed).
LabeledProblem make_problem(const ProblemSpec& spec);

struct IcpResult {
  RigidTransform pose;
  int iterations = 0;
  bool converged = false;
  std::vector<double> matching_costs;  // mean squared NN distance, per iteration
};

/// Point-to-point ICP: brute-force nearest neighbors, then Kabsch on the
/// matches, until chordal + translation change < tol or max_iters.
IcpResult icp_baseline(const PointCloud& src, const PointCloud& tgt, const RigidTransform& init,
                       int max_iters, double tol);

}  // namespace rigid_refine
