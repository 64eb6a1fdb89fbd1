#include "rigid_refine/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include <Eigen/Geometry>

#include "rigid_refine/errors.hpp"
#include "rigid_refine/kabsch.hpp"
#include "rigid_refine/kernels.hpp"
#include "rigid_refine/metrics.hpp"

namespace rigid_refine {

void ProblemSpec::validate() const {
  if (n_points < 1 || base_points < 1) {
    throw InvalidArgument("point counts must be positive");
  }
  for (const Range& r : rot_range_deg) {
    if (!(r.lo <= r.hi)) throw InvalidArgument("rotation range must satisfy lo <= hi");
  }
  for (const Range& r : trans_range) {
    if (!(r.lo <= r.hi)) throw InvalidArgument("translation range must satisfy lo <= hi");
  }
  if (!(noise_sigma >= 0.0)) throw InvalidArgument("noise sigma must be non-negative");
  if (!(noise_clamp >= 0.0)) throw InvalidArgument("noise clamp must be non-negative");
  if (!(crop_keep_fraction > 0.0 && crop_keep_fraction <= 1.0)) {
    throw InvalidArgument("crop keep fraction must lie in (0, 1]");
  }
  if (cloud == CloudKind::slab && !(slab_thickness >= 0.0)) {
    throw InvalidArgument("slab thickness must be non-negative");
  }
}

bool operator==(const Range& a, const Range& b) { return a.lo == b.lo && a.hi == b.hi; }

bool operator==(const ProblemSpec& a, const ProblemSpec& b) {
  return a.n_points == b.n_points && a.rot_range_deg == b.rot_range_deg &&
         a.trans_range == b.trans_range && a.noise_sigma == b.noise_sigma &&
         a.noise_clamp == b.noise_clamp && a.noise_on == b.noise_on &&
         a.crop_keep_fraction == b.crop_keep_fraction &&
         a.independent_resample == b.independent_resample && a.seed == b.seed &&
         a.cloud == b.cloud && a.base_points == b.base_points &&
         a.slab_thickness == b.slab_thickness;
}

RigidTransform sample_transform(const ProblemSpec& spec, Rng& rng) {
  std::array<double, 3> angles{};
  for (std::size_t a = 0; a < 3; ++a) {
    angles[a] = rng.uniform(spec.rot_range_deg[a].lo, spec.rot_range_deg[a].hi);
  }
  Vec3 t;
  for (int a = 0; a < 3; ++a) {
    const Range& r = spec.trans_range[static_cast<std::size_t>(a)];
    t[a] = rng.uniform(r.lo, r.hi);
  }
  Mat3 r = rotation_from_euler_zyx_deg(angles[0], angles[1], angles[2]);
  return {Rotation(r), t};
}

Vec3 random_unit_vector(Rng& rng) {
  for (;;) {
    const Vec3 v(rng.gaussian(), rng.gaussian(), rng.gaussian());
    const double n = v.norm();
    if (n > 1e-12) return v / n;
  }
}

Rotation random_rotation(Rng& rng) {
  for (;;) {
    Eigen::Vector4d q(rng.gaussian(), rng.gaussian(), rng.gaussian(), rng.gaussian());
    const double n = q.norm();
    if (n > 1e-12) {
      q /= n;
      return Rotation(Eigen::Quaterniond(q[0], q[1], q[2], q[3]).toRotationMatrix());
    }
  }
}

PointCloud make_base_cloud(CloudKind kind, int n, Rng& rng, double slab_thickness) {
  if (n < 1) throw InvalidArgument("base cloud needs at least one point");
  Points pts(3, n);
  for (int i = 0; i < n; ++i) {
    switch (kind) {
      case CloudKind::sphere:
        pts.col(i) = random_unit_vector(rng);
        break;
      case CloudKind::ball:
        pts.col(i) = random_unit_vector(rng) * std::cbrt(rng.uniform());
        break;
      case CloudKind::slab: {
        const double radius = std::sqrt(rng.uniform());
        const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
        const double z = rng.uniform(-0.5, 0.5) * slab_thickness;
        pts.col(i) = Vec3(radius * std::cos(phi), radius * std::sin(phi), z);
        break;
      }
    }
  }
  return PointCloud(std::move(pts));
}

std::vector<std::size_t> half_space_crop(const Points& cloud, const Vec3& normal,
                                         double keep_fraction) {
  const auto n = static_cast<std::size_t>(cloud.cols());
  const Vec3 centroid = cloud.rowwise().mean();
  const Eigen::VectorXd signed_distance =
      ((cloud.colwise() - centroid).transpose() * normal.normalized());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double da = signed_distance[static_cast<Eigen::Index>(a)];
    const double db = signed_distance[static_cast<Eigen::Index>(b)];
    return da != db ? da > db : a < b;
  });
  const auto keep = static_cast<std::size_t>(std::floor(keep_fraction * static_cast<double>(n)));
  order.resize(keep);
  std::sort(order.begin(), order.end());
  return order;
}

namespace {

Points take(const Points& pts, const std::vector<std::size_t>& idx) {
  Points out(3, static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) {
    out.col(static_cast<Eigen::Index>(k)) = pts.col(static_cast<Eigen::Index>(idx[k]));
  }
  return out;
}

Points clamped_noise(Eigen::Index n, double sigma, double clamp, Rng& rng) {
  Points noise = Points::Zero(3, n);
  if (sigma <= 0.0) return noise;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int a = 0; a < 3; ++a) {
      noise(a, i) = std::clamp(sigma * rng.gaussian(), -clamp, clamp);
    }
  }
  return noise;
}

std::vector<bool> mask_of(const std::vector<std::size_t>& kept, std::size_t n) {
  std::vector<bool> mask(n, false);
  for (std::size_t i : kept) mask[i] = true;
  return mask;
}

}  // namespace

LabeledProblem make_problem(const ProblemSpec& spec, const PointCloud& base_cloud, Rng& rng) {
  spec.validate();
  const auto n = static_cast<std::size_t>(spec.n_points);
  const std::size_t needed = spec.independent_resample ? 2 * n : n;
  if (base_cloud.size() < needed) {
    throw InsufficientPoints("base cloud has " + std::to_string(base_cloud.size()) +
                             " points, problem needs " + std::to_string(needed));
  }

  RigidTransform gt = sample_transform(spec, rng);

  std::vector<std::size_t> source_idx(n), target_idx(n);
  if (spec.independent_resample) {
    std::vector<std::size_t> perm(base_cloud.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t i = perm.size() - 1; i > 0; --i) {
      std::swap(perm[i], perm[static_cast<std::size_t>(rng.below(i + 1))]);
    }
    std::copy_n(perm.begin(), n, source_idx.begin());
    std::copy_n(perm.begin() + static_cast<std::ptrdiff_t>(n), n, target_idx.begin());
  } else {
    std::iota(source_idx.begin(), source_idx.end(), std::size_t{0});
    target_idx = source_idx;
  }
  const Points source_clean = take(base_cloud.matrix(), source_idx);
  const Points target_clean = take(base_cloud.matrix(), target_idx);

  // Pair each source point with the target sample nearest to it before the
  // transform; without resampling this is the identity pairing.
  std::vector<Eigen::Index> match(n);
  if (spec.independent_resample) {
    match = kernels::nearest_neighbors(source_clean, target_clean).index;
  } else {
    std::iota(match.begin(), match.end(), Eigen::Index{0});
  }

  const auto cols = static_cast<Eigen::Index>(n);
  const bool noisy_source = spec.noise_on != NoiseTarget::target;
  const bool noisy_target = spec.noise_on != NoiseTarget::source;
  Points source_noise = noisy_source ? clamped_noise(cols, spec.noise_sigma, spec.noise_clamp, rng)
                                     : Points::Zero(3, cols);
  Points target_noise = noisy_target ? clamped_noise(cols, spec.noise_sigma, spec.noise_clamp, rng)
                                     : Points::Zero(3, cols);

  const Points source_pts = source_clean + source_noise;
  const Points target_pts =
      ((gt.rotation.matrix() * target_clean).colwise() + gt.translation) + target_noise;

  std::vector<std::size_t> keep_source(n), keep_target(n);
  std::iota(keep_source.begin(), keep_source.end(), std::size_t{0});
  std::iota(keep_target.begin(), keep_target.end(), std::size_t{0});
  std::vector<bool> overlap(n, true);
  if (spec.crop_keep_fraction < 1.0) {
    const auto min_overlap =
        static_cast<std::size_t>(std::ceil(kMinCropOverlap * static_cast<double>(n)));
    bool accepted = false;
    for (int attempt = 0; attempt < kMaxCropAttempts && !accepted; ++attempt) {
      // Both planes are drawn in the untransformed frame.
      const Vec3 source_normal = random_unit_vector(rng);
      const Vec3 target_normal = random_unit_vector(rng);
      keep_source = half_space_crop(source_clean, source_normal, spec.crop_keep_fraction);
      keep_target = half_space_crop(target_clean, target_normal, spec.crop_keep_fraction);
      const std::vector<bool> in_source = mask_of(keep_source, n);
      const std::vector<bool> in_target = mask_of(keep_target, n);
      std::size_t shared = 0;
      for (std::size_t i = 0; i < n; ++i) {
        overlap[i] = in_source[i] && in_target[static_cast<std::size_t>(match[i])];
        shared += overlap[i];
      }
      accepted = shared >= std::max<std::size_t>(min_overlap, 3);
    }
    if (!accepted) {
      throw InsufficientPoints("no crop pair reached the minimum overlap");
    }
  }

  std::vector<std::size_t> pair_source, pair_target;
  for (std::size_t i = 0; i < n; ++i) {
    if (overlap[i]) {
      pair_source.push_back(i);
      pair_target.push_back(static_cast<std::size_t>(match[i]));
    }
  }
  return LabeledProblem{
      CorrespondenceSet(PointCloud(take(source_pts, pair_source)),
                        PointCloud(take(target_pts, pair_target))),
      std::move(gt),
      std::move(overlap),
      PointCloud(take(source_pts, keep_source)),
      PointCloud(take(target_pts, keep_target)),
      std::move(source_noise),
      std::move(target_noise),
  };
}

LabeledProblem make_problem(const ProblemSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const int base_n = std::max(spec.base_points,
                              spec.independent_resample ? 2 * spec.n_points : spec.n_points);
  const PointCloud base = make_base_cloud(spec.cloud, base_n, rng, spec.slab_thickness);
  return make_problem(spec, base, rng);
}

IcpResult icp_baseline(const PointCloud& src, const PointCloud& tgt, const RigidTransform& init,
                       int max_iters, double tol) {
  IcpResult out{init, 0, false, {}};
  for (int it = 1; it <= max_iters; ++it) {
    const Points moved = (out.pose.rotation.matrix() * src.matrix()).colwise() +
                         out.pose.translation;
    const kernels::NeighborResult nn = kernels::nearest_neighbors(moved, tgt.matrix());
    out.matching_costs.push_back(nn.squared_distance.mean());

    Points matched(3, src.matrix().cols());
    for (Eigen::Index i = 0; i < matched.cols(); ++i) {
      matched.col(i) = tgt.matrix().col(nn.index[static_cast<std::size_t>(i)]);
    }
    RigidTransform next = estimate_pose_kabsch(CorrespondenceSet(src, PointCloud(std::move(matched))));
    const double change = chordal_distance(next.rotation, out.pose.rotation) +
                          (next.translation - out.pose.translation).norm();
    out.pose = std::move(next);
    out.iterations = it;
    if (change < tol) {
      out.converged = true;
      break;
    }
  }
  return out;
}

}  // namespace rigid_refine
