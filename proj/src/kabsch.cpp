#include "rigid_refine/kabsch.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>

#include "rigid_refine/errors.hpp"

namespace rigid_refine {

CrossCovariance cross_covariance(const CenteredCorrespondences& cc) {
  const Points& ps = cc.source_centered.matrix();
  const Points& pt = cc.target_centered.matrix();
  return {pt * cc.weights.asDiagonal() * ps.transpose()};
}

Rotation kabsch_rotation(const CrossCovariance& cov) {
  const Mat3& h = cov.h;
  const double scale = h.norm();
  Eigen::JacobiSVD<Mat3> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec3 s = svd.singularValues();
  if (!(scale > 0.0) || s[1] < kKabschDegeneracyThreshold * scale) {
    throw DegenerateGeometry("cross-covariance has two vanishing singular values");
  }
  const Mat3& u = svd.matrixU();
  const Mat3& v = svd.matrixV();
  Vec3 d(1.0, 1.0, (u * v.transpose()).determinant() < 0.0 ? -1.0 : 1.0);
  return Rotation(u * d.asDiagonal() * v.transpose());
}

RigidTransform estimate_pose_kabsch(const CorrespondenceSet& c) {
  Rotation r = kabsch_rotation(cross_covariance(center(c)));
  Vec3 t = optimal_translation(r, c);
  return {std::move(r), t};
}

}  // namespace rigid_refine
