#include "rigid_refine/core.hpp"

#include <cmath>
#include <string>

#include <Eigen/LU>

#include "rigid_refine/errors.hpp"

namespace rigid_refine {

PointCloud::PointCloud(Points points) : points_(std::move(points)) {
  if (points_.cols() == 0) {
    throw InvalidArgument("point cloud must contain at least one point");
  }
  if (!points_.allFinite()) {
    throw InvalidArgument("point cloud contains non-finite coordinates");
  }
}

namespace {

Points to_matrix(std::span<const Point3> points) {
  Points m(3, static_cast<Eigen::Index>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) {
    m.col(static_cast<Eigen::Index>(i)) = points[i];
  }
  return m;
}

}  // namespace

PointCloud::PointCloud(std::span<const Point3> points) : PointCloud(to_matrix(points)) {}

double PointCloud::radius() const { return points_.colwise().norm().maxCoeff(); }

CorrespondenceSet::CorrespondenceSet(PointCloud source, PointCloud target,
                                     Eigen::VectorXd weights)
    : source_(std::move(source)), target_(std::move(target)), weights_(std::move(weights)) {
  if (source_.size() != target_.size()) {
    throw InvalidArgument("source and target differ in size (" +
                          std::to_string(source_.size()) + " vs " +
                          std::to_string(target_.size()) + ")");
  }
  if (static_cast<std::size_t>(weights_.size()) != source_.size()) {
    throw InvalidArgument("weight count does not match correspondence count");
  }
  for (Eigen::Index i = 0; i < weights_.size(); ++i) {
    if (!std::isfinite(weights_[i]) || !(weights_[i] > 0.0)) {
      throw InvalidArgument("weights must be finite and strictly positive");
    }
  }
}

CorrespondenceSet::CorrespondenceSet(PointCloud source, PointCloud target)
    : CorrespondenceSet(source, target,
                        Eigen::VectorXd::Ones(static_cast<Eigen::Index>(source.size()))) {}

bool Rotation::is_valid(const Mat3& m) {
  if (!m.allFinite()) return false;
  const double orth = (m.transpose() * m - Mat3::Identity()).norm();
  const double det = m.determinant();
  return orth <= kTolerance && std::abs(det - 1.0) <= kTolerance;
}

Rotation::Rotation(const Mat3& m) : m_(m) {
  if (!is_valid(m)) {
    throw InvalidArgument("matrix is not a proper rotation within tolerance");
  }
}

RigidTransform::RigidTransform(Rotation r, Vec3 t) : rotation(std::move(r)), translation(t) {
  if (!translation.allFinite()) {
    throw InvalidArgument("translation must be finite");
  }
}

PointCloud RigidTransform::apply(const PointCloud& cloud) const {
  Points out = (rotation.matrix() * cloud.matrix()).colwise() + translation;
  return PointCloud(std::move(out));
}

Vec3 weighted_mean(const Points& points, const Eigen::VectorXd& weights) {
  return (points * weights) / weights.sum();
}

CenteredCorrespondences center(const CorrespondenceSet& c) {
  const Vec3 ms = weighted_mean(c.source().matrix(), c.weights());
  const Vec3 mt = weighted_mean(c.target().matrix(), c.weights());
  return CenteredCorrespondences{
      PointCloud(Points(c.source().matrix().colwise() - ms)),
      PointCloud(Points(c.target().matrix().colwise() - mt)),
      ms,
      mt,
      c.weights(),
  };
}

Vec3 optimal_translation(const Rotation& rotation, const CorrespondenceSet& c) {
  const Vec3 ms = weighted_mean(c.source().matrix(), c.weights());
  const Vec3 mt = weighted_mean(c.target().matrix(), c.weights());
  return mt - rotation.matrix() * ms;
}

double weighted_cost(const Mat3& r, const Vec3& t, const CorrespondenceSet& c) {
  const Points residual = (c.target().matrix() - r * c.source().matrix()).colwise() - t;
  return residual.colwise().squaredNorm().dot(c.weights().transpose());
}

double centered_cost(const Mat3& r, const CenteredCorrespondences& cc) {
  const Points residual = cc.target_centered.matrix() - r * cc.source_centered.matrix();
  return residual.colwise().squaredNorm().dot(cc.weights.transpose());
}

double chordal_distance(const Rotation& a, const Rotation& b) {
  return (a.matrix() - b.matrix()).norm();
}

}  // namespace rigid_refine
