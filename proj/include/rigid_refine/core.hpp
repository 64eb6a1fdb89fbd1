#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace rigid_refine {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Point3 = Eigen::Vector3d;
using Points = Eigen::Matrix3Xd;  // one point per column

/// Ordered, nonempty set of finite 3D points stored column-wise.
class PointCloud {
 public:
  explicit PointCloud(Points points);
  explicit PointCloud(std::span<const Point3> points);

  std::size_t size() const { return static_cast<std::size_t>(points_.cols()); }
  Point3 point(std::size_t i) const { return points_.col(static_cast<Eigen::Index>(i)); }
  const Points& matrix() const { return points_; }

  /// Largest distance of a point from the origin.
  double radius() const;

 private:
  Points points_;
};

/// Paired source/target points with strictly positive weights.
class CorrespondenceSet {
 public:
  CorrespondenceSet(PointCloud source, PointCloud target, Eigen::VectorXd weights);
  /// Unit weights.
  CorrespondenceSet(PointCloud source, PointCloud target);

  const PointCloud& source() const { return source_; }
  const PointCloud& target() const { return target_; }
  const Eigen::VectorXd& weights() const { return weights_; }
  std::size_t size() const { return source_.size(); }
  double weight_sum() const { return weights_.sum(); }

 private:
  PointCloud source_;
  PointCloud target_;
  Eigen::VectorXd weights_;
};

/// Proper rotation matrix. Construction rejects any matrix with
/// ||m^T m - I||_F > kTolerance or |det(m) - 1| > kTolerance.
class Rotation {
 public:
  static constexpr double kTolerance = 1e-9;

  explicit Rotation(const Mat3& m);
  static Rotation identity() { return Rotation(Mat3::Identity()); }
  static bool is_valid(const Mat3& m);

  const Mat3& matrix() const { return m_; }
  Vec3 operator*(const Vec3& v) const { return m_ * v; }

 private:
  Mat3 m_;
};

struct RigidTransform {
  RigidTransform(Rotation rotation, Vec3 translation);
  static RigidTransform identity() { return {Rotation::identity(), Vec3::Zero()}; }

  Vec3 apply(const Vec3& p) const { return rotation.matrix() * p + translation; }
  PointCloud apply(const PointCloud& cloud) const;

  Rotation rotation;
  Vec3 translation;
};

/// Mean-subtracted correspondences together with the weighted means.
struct CenteredCorrespondences {
  PointCloud source_centered;
  PointCloud target_centered;
  Vec3 source_mean;
  Vec3 target_mean;
  Eigen::VectorXd weights;

  std::size_t size() const { return source_centered.size(); }
};

Vec3 weighted_mean(const Points& points, const Eigen::VectorXd& weights);

/// Weighted means and mean-subtracted clouds; weights are carried unchanged.
CenteredCorrespondences center(const CorrespondenceSet& c);

/// Closed-form translation minimizing the weighted cost for a fixed rotation:
/// mean_t - R mean_s.
Vec3 optimal_translation(const Rotation& rotation, const CorrespondenceSet& c);

/// sum_i w_i ||p_t,i - R p_s,i - t||^2
double weighted_cost(const Mat3& r, const Vec3& t, const CorrespondenceSet& c);

/// sum_i w_i ||p~_t,i - R p~_s,i||^2 (translation factored out)
double centered_cost(const Mat3& r, const CenteredCorrespondences& cc);

/// Frobenius distance between rotation matrices.
double chordal_distance(const Rotation& a, const Rotation& b);

}  // namespace rigid_refine
