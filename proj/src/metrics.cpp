#include "rigid_refine/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Geometry>

#include "rigid_refine/errors.hpp"
#include "rigid_refine/kernels.hpp"

namespace rigid_refine {

namespace {

constexpr double kDeg = 180.0 / std::numbers::pi;
constexpr double kRad = std::numbers::pi / 180.0;
// cos(pitch) below this is treated as gimbal lock.
constexpr double kGimbalCos = 1e-12;

}  // namespace

EulerZyx euler_zyx_deg(const Mat3& r) {
  EulerZyx out;
  const double sp = std::clamp(-r(2, 0), -1.0, 1.0);
  const double cp = std::hypot(r(0, 0), r(1, 0));
  out.y = std::atan2(sp, cp) * kDeg;
  if (cp < kGimbalCos) {
    out.gimbal_lock = true;
    out.z = std::atan2(-r(0, 1), r(1, 1)) * kDeg;
    out.x = 0.0;
  } else {
    out.z = std::atan2(r(1, 0), r(0, 0)) * kDeg;
    out.x = std::atan2(r(2, 1), r(2, 2)) * kDeg;
  }
  return out;
}

Mat3 rotation_from_euler_zyx_deg(double z, double y, double x) {
  using Eigen::AngleAxisd;
  return (AngleAxisd(z * kRad, Vec3::UnitZ()) * AngleAxisd(y * kRad, Vec3::UnitY()) *
          AngleAxisd(x * kRad, Vec3::UnitX()))
      .toRotationMatrix();
}

RotationError rotation_error(const Rotation& est, const Rotation& gt) {
  const Mat3 delta = est.matrix().transpose() * gt.matrix();
  RotationError out;
  // Same angle as arccos((tr - 1) / 2), but atan2 keeps full precision near
  // zero where the arccos of a rounded trace is off by ~1e-6 degrees.
  const Vec3 axis(delta(2, 1) - delta(1, 2), delta(0, 2) - delta(2, 0), delta(1, 0) - delta(0, 1));
  out.iso_deg = std::atan2(axis.norm(), delta.trace() - 1.0) * kDeg;
  out.aniso_deg = euler_zyx_deg(delta);
  return out;
}

double translation_error(const Vec3& est, const Vec3& gt, NormOrder p) {
  const Vec3 d = est - gt;
  switch (p) {
    case NormOrder::l1:
      return d.lpNorm<1>();
    case NormOrder::l2:
      return d.norm();
  }
  throw InvalidArgument("unsupported norm order");
}

double chamfer_distance(const PointCloud& a, const PointCloud& b) {
  return kernels::chamfer_distance(a.matrix(), b.matrix());
}

double mean_point_distance(const PointCloud& src, const RigidTransform& est,
                           const RigidTransform& gt) {
  const Mat3 dr = est.rotation.matrix() - gt.rotation.matrix();
  const Vec3 dt = est.translation - gt.translation;
  const Points diff = (dr * src.matrix()).colwise() + dt;
  return diff.colwise().norm().sum() / static_cast<double>(src.size());
}

double augmented_loss(const RefinementTrace& trace, const RigidTransform& gt) {
  if (trace.poses.empty()) {
    throw InvalidArgument("refinement trace is empty");
  }
  double rot = 0.0;
  double trans = 0.0;
  for (const RigidTransform& pose : trace.poses) {
    rot += (pose.rotation.matrix().transpose() * gt.rotation.matrix() - Mat3::Identity())
               .squaredNorm();
    trans += (pose.translation - gt.translation).squaredNorm();
  }
  const auto count = static_cast<double>(trace.poses.size());
  return rot / count + trans / count;
}

}  // namespace rigid_refine
