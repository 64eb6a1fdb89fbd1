#include "rigid_refine/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Geometry>
#include <Eigen/LU>
#include <Eigen/SVD>

#include "rigid_refine/errors.hpp"

namespace rigid_refine {

const Mat3& UnconstrainedSolution::require() const {
  if (!r_u) {
    throw NearSingularG("G is near-singular; unconstrained solution unavailable");
  }
  return *r_u;
}

UnconstrainedSolution unconstrained_solution(const CenteredCorrespondences& cc) {
  const Points& ps = cc.source_centered.matrix();
  const Points& pt = cc.target_centered.matrix();
  UnconstrainedSolution out;
  out.g = pt * cc.weights.asDiagonal() * pt.transpose();
  out.g = 0.5 * (out.g + out.g.transpose());
  out.f = pt * cc.weights.asDiagonal() * ps.transpose();
  out.det_g = out.g.determinant();
  const double scale = out.g.norm();
  out.det_g_normalized = scale > 0.0 ? out.det_g / (scale * scale * scale) : 0.0;
  if (out.det_g_normalized > kNearSingularG) {
    Eigen::FullPivLU<Mat3> lu(out.g);
    Mat3 r_u;
    for (int j = 0; j < 3; ++j) {
      r_u.col(j) = lu.solve(Vec3(out.f.col(j)));
    }
    out.r_u = r_u;
  }
  return out;
}

DivergenceReport divergence_report(const RefinementTrace& trace, const RigidTransform& kabsch_pose,
                                   const CenteredCorrespondences& cc) {
  if (trace.poses.empty()) {
    throw InvalidArgument("refinement trace is empty");
  }
  DivergenceReport out;
  for (std::size_t i = 1; i < trace.poses.size(); ++i) {
    const double d = chordal_distance(trace.poses[i].rotation, kabsch_pose.rotation);
    out.per_iteration.push_back(d);
    out.divergence += d;
  }
  const UnconstrainedSolution unc = unconstrained_solution(cc);
  out.det_g = unc.det_g;
  out.det_g_normalized = unc.det_g_normalized;
  if (unc.r_u) {
    const Mat3& ru = *unc.r_u;
    const Mat3& rk = kabsch_pose.rotation.matrix();
    double max_dist = 0.0;
    double max_angle = 0.0;
    for (int i = 0; i < 3; ++i) {
      max_dist = std::max(max_dist, (ru.col(i) - rk.col(i)).norm());
      const double cosine =
          std::abs(ru.col(i).normalized().dot(rk.col(i).normalized()));
      max_angle = std::max(max_angle, std::acos(std::min(1.0, cosine)) * 180.0 / std::numbers::pi);
    }
    out.max_col_distance = max_dist;
    out.max_col_angle_deg = max_angle;
  }
  return out;
}

Eigen::Matrix<double, 9, 6> constraint_gradients(const Mat3& r_prev) {
  const Vec3 r1 = r_prev.col(0), r2 = r_prev.col(1), r3 = r_prev.col(2);
  const Vec3 z = Vec3::Zero();
  Eigen::Matrix<double, 9, 6> c;
  c.col(0) << 2.0 * r1, z, z;
  c.col(1) << z, 2.0 * r2, z;
  c.col(2) << z, z, 2.0 * r3;
  c.col(3) << r2, r1, z;
  c.col(4) << r3, z, r1;
  c.col(5) << z, r3, r2;
  return c;
}

int constraint_gradient_rank(const Mat3& r_prev) {
  const Eigen::VectorXd s = Eigen::JacobiSVD<Eigen::MatrixXd>(constraint_gradients(r_prev)).singularValues();
  if (!(s[0] > 0.0)) return 0;
  return static_cast<int>((s.array() > kLicqRankTolerance * s[0]).count());
}

int licq_check(const Rotation& r_prev) { return constraint_gradient_rank(r_prev.matrix()); }

double determinant_redundancy_residual(const Mat3& r, const Mat3& r_prev) {
  const Vec3 p1 = r_prev.col(0), p2 = r_prev.col(1), p3 = r_prev.col(2);
  // Gradients of det = r1 . (r2 x r3) at r_prev, one cyclic form per column.
  const Vec3 g1 = p2.cross(p3);
  const Vec3 g2 = p3.cross(p1);
  const Vec3 g3 = p1.cross(p2);
  const double det_prev = p1.dot(p2.cross(p3));
  const double det_linear = (det_prev - 1.0) + g1.dot(r.col(0) - p1) + g2.dot(r.col(1) - p2) +
                            g3.dot(r.col(2) - p3);
  double norm_sum = 0.0;
  for (int i = 0; i < 3; ++i) {
    const Vec3 p = r_prev.col(i);
    norm_sum += (p.squaredNorm() - 1.0) + 2.0 * p.dot(r.col(i) - p);
  }
  return std::abs(det_linear - 0.5 * norm_sum);
}

SingularityMargin singularity_margin(const CandidateMatrix& c) {
  SingularityMargin out;
  out.min_col_norm = c.m.colwise().norm().minCoeff();
  const Vec3 c1 = c.m.col(0), c2 = c.m.col(1);
  const double n1 = c1.norm(), n2 = c2.norm();
  if (n1 > 0.0 && n2 > 0.0) {
    // atan2 of |cross| and dot stays accurate for nearly collinear columns.
    out.col12_angle_rad = std::atan2(c1.cross(c2).norm(), c1.dot(c2));
    out.col12_angle_rad = std::min(out.col12_angle_rad, std::numbers::pi - out.col12_angle_rad);
  }
  out.below_gate = out.col12_angle_rad < kAssemblerAngleGate ||
                   std::min(n1, n2) <= kAssemblerNormFloor;
  return out;
}

}  // namespace rigid_refine
