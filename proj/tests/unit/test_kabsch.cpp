#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "oracles.hpp"
#include "rigid_refine/errors.hpp"
#include "rigid_refine/kabsch.hpp"

using namespace rigid_refine;

namespace {

CenteredCorrespondences centered(const Points& s, const Points& t, const Eigen::VectorXd& w) {
  return center(CorrespondenceSet(PointCloud(s), PointCloud(t), w));
}

double mean_sq_error(const Mat3& r, const CenteredCorrespondences& cc) {
  return (cc.target_centered.matrix() - r * cc.source_centered.matrix()).colwise().squaredNorm().mean();
}

}  // namespace

TEST_CASE("cross covariance of a single pair is one outer product") {
  CenteredCorrespondences cc{PointCloud(Points(Vec3(1, 0, 0))), PointCloud(Points(Vec3(0, 1, 0))),
                             Vec3::Zero(), Vec3::Zero(), Eigen::VectorXd::Ones(1)};
  Mat3 expected = Mat3::Zero();
  expected(1, 0) = 1.0;
  CHECK(cross_covariance(cc).h == expected);
}

TEST_CASE("cross covariance of identical clouds is symmetric positive semidefinite") {
  oracle::Gen g(2);
  const Points p = oracle::random_points(g, 20);
  const Mat3 h = cross_covariance(centered(p, p, Eigen::VectorXd::Ones(20))).h;
  CHECK((h - h.transpose()).norm() <= 1e-14);
  CHECK(Eigen::SelfAdjointEigenSolver<Mat3>(h).eigenvalues().minCoeff() >= -1e-14);
}

TEST_CASE("cross covariance is linear in the weights") {
  oracle::Gen g(4);
  const Points s = oracle::random_points(g, 12), t = oracle::random_points(g, 12);
  const Eigen::VectorXd w = oracle::random_weights(g, 12);
  const Mat3 h1 = cross_covariance(centered(s, t, w)).h;
  const Mat3 h2 = cross_covariance(centered(s, t, 2.0 * w)).h;
  CHECK((h2 - 2.0 * h1).norm() <= 1e-14 * h1.norm());
}

TEST_CASE("kabsch of the identity covariance is the identity") {
  CHECK((kabsch_rotation({Mat3::Identity()}).matrix() - Mat3::Identity()).norm() <= 1e-15);
}

TEST_CASE("kabsch recovers a z rotation of a random cloud") {
  oracle::Gen g(30);
  const Points p = oracle::random_points(g, 50);
  const Mat3 r = oracle::rz(30);
  const Mat3 est = kabsch_rotation(cross_covariance(centered(p, r * p, Eigen::VectorXd::Ones(50)))).matrix();
  CHECK(oracle::angle_between_deg(est, r) <= 1e-9);
}

TEST_CASE("reflection in H still yields a proper rotation that maximizes the trace") {
  const Mat3 h = Vec3(1, 1, -1).asDiagonal();
  const Mat3 r = kabsch_rotation({h}).matrix();
  CHECK(r.determinant() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK((r.transpose() * r - Mat3::Identity()).norm() <= 1e-12);
  // Minimizing the cost is maximizing tr(R^T H); grid over SO(3).
  oracle::Gen g(99);
  double best = -1e9;
  for (int s = 0; s < 10000; ++s) best = std::max(best, (oracle::random_rotation(g).transpose() * h).trace());
  const double got = (r.transpose() * h).trace();
  CHECK(got >= best - 1e-12);
  CHECK(got <= 1.0 + 1e-12);
}

TEST_CASE("kabsch output is a proper rotation when det(H) < 0") {
  oracle::Gen g(8);
  for (int trial = 0; trial < 50; ++trial) {
    const Points s = oracle::random_points(g, 10);
    // Mirror the target so the best orthogonal map is a reflection.
    const Points t = Mat3(Vec3(1, 1, -1).asDiagonal()) * oracle::random_rotation(g) * s;
    const CenteredCorrespondences cc = centered(s, t, Eigen::VectorXd::Ones(10));
    REQUIRE(cross_covariance(cc).h.determinant() < 0);
    const Mat3 r = kabsch_rotation(cross_covariance(cc)).matrix();
    CHECK(Rotation::is_valid(r));
  }
}

TEST_CASE("kabsch is globally optimal on small instances") {
  oracle::Gen g(123);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 3 + trial % 2;
    const Points s = oracle::random_points(g, n), t = oracle::random_points(g, n);
    const Eigen::VectorXd w = oracle::random_weights(g, n);
    const RigidTransform pose = estimate_pose_kabsch(CorrespondenceSet(PointCloud(s), PointCloud(t), w));
    const double kabsch = oracle::cost(pose.rotation.matrix(), pose.translation, s, t, w);
    const double brute = oracle::brute_force_min_cost(s, t, w, 20000, g);
    CHECK(kabsch <= brute + 1e-6);
  }
}

TEST_CASE("estimate_pose_kabsch on identical clouds is the identity") {
  oracle::Gen g(1);
  const Points p = oracle::random_points(g, 15);
  const RigidTransform pose = estimate_pose_kabsch(CorrespondenceSet(PointCloud(p), PointCloud(p)));
  CHECK((pose.rotation.matrix() - Mat3::Identity()).norm() <= 1e-12);
  CHECK(pose.translation.norm() <= 1e-12);
}

TEST_CASE("estimate_pose_kabsch recovers a forward-constructed pose") {
  oracle::Gen g(6);
  for (int trial = 0; trial < 50; ++trial) {
    const Mat3 r = oracle::random_rotation(g);
    const Vec3 t(oracle::uniform(g, -1, 1), oracle::uniform(g, -1, 1), oracle::uniform(g, -1, 1));
    const Points s = oracle::random_points(g, 20);
    const Eigen::VectorXd w = oracle::random_weights(g, 20);
    const RigidTransform pose = estimate_pose_kabsch(
        CorrespondenceSet(PointCloud(s), PointCloud(Points((r * s).colwise() + t)), w));
    CHECK((pose.rotation.matrix() - r).norm() <= 1e-9);
    CHECK((pose.translation - t).norm() <= 1e-9);
  }
}

TEST_CASE("scaling the target leaves the rotation unchanged and inflates the error") {
  oracle::Gen g(77);
  for (int trial = 0; trial < 30; ++trial) {
    const Points s = oracle::random_points(g, 25);
    const Points t = oracle::random_rotation(g) * s + 0.05 * oracle::random_points(g, 25);
    const Eigen::VectorXd w = oracle::random_weights(g, 25);
    const CenteredCorrespondences cc = centered(s, t, w);
    const Mat3 r = kabsch_rotation(cross_covariance(cc)).matrix();
    for (double a : {0.1, 3.0, 10.0}) {
      CenteredCorrespondences scaled = cc;
      scaled.target_centered = PointCloud(Points(a * cc.target_centered.matrix()));
      const Mat3 ra = kabsch_rotation(cross_covariance(scaled)).matrix();
      CHECK((ra - r).norm() <= 1e-9);
      if (a == 10.0) CHECK(mean_sq_error(ra, scaled) > mean_sq_error(r, cc));
    }
    // Through the full pipeline the translation changes but the rotation does not.
    const RigidTransform p1 = estimate_pose_kabsch(CorrespondenceSet(PointCloud(s), PointCloud(t), w));
    const RigidTransform p3 =
        estimate_pose_kabsch(CorrespondenceSet(PointCloud(s), PointCloud(Points(3.0 * t)), w));
    CHECK((p1.rotation.matrix() - p3.rotation.matrix()).norm() <= 1e-9);
  }
}

TEST_CASE("collinear correspondences are degenerate") {
  Points s(3, 4);
  s << 0, 1, 2, 3, 0, 0, 0, 0, 0, 0, 0, 0;
  CHECK_THROWS_AS(estimate_pose_kabsch(CorrespondenceSet(PointCloud(s), PointCloud(s))),
                  DegenerateGeometry);
  CHECK_THROWS_AS(kabsch_rotation({Mat3::Zero()}), DegenerateGeometry);
}
