#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "rigid_refine/errors.hpp"
#include "rigid_refine/metrics.hpp"

using namespace rigid_refine;

namespace {

PointCloud cloud(std::initializer_list<Vec3> pts) {
  std::vector<Point3> v(pts);
  return PointCloud(std::span<const Point3>(v));
}

RefinementTrace trace_of(std::initializer_list<RigidTransform> poses) {
  RefinementTrace t;
  t.poses.assign(poses.begin(), poses.end());
  return t;
}

}  // namespace

TEST_CASE("rotation error of equal rotations is zero") {
  oracle::Gen g(60);
  const Rotation r(oracle::random_rotation(g));
  const RotationError e = rotation_error(r, r);
  CHECK(e.iso_deg <= 1e-6);
  CHECK(std::abs(e.aniso_deg.z) <= 1e-12);
  CHECK(std::abs(e.aniso_deg.y) <= 1e-12);
  CHECK(std::abs(e.aniso_deg.x) <= 1e-12);
}

TEST_CASE("rotation error against a 30 degree z rotation") {
  const RotationError e = rotation_error(Rotation::identity(), Rotation(oracle::rz(30)));
  CHECK(std::abs(e.iso_deg - 30.0) <= 1e-9);
  CHECK(std::abs(e.aniso_deg.z - 30.0) <= 1e-9);
  CHECK(std::abs(e.aniso_deg.y) <= 1e-9);
  CHECK(std::abs(e.aniso_deg.x) <= 1e-9);
  CHECK_FALSE(e.aniso_deg.gimbal_lock);
}

TEST_CASE("anisotropic error decomposes an intrinsic z-y-x composition") {
  const Mat3 gt = oracle::rz(10) * oracle::ry(20) * oracle::rx(30);
  const RotationError e = rotation_error(Rotation::identity(), Rotation(gt));
  CHECK(e.aniso_deg.z == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(e.aniso_deg.y == doctest::Approx(20.0).epsilon(1e-12));
  CHECK(e.aniso_deg.x == doctest::Approx(30.0).epsilon(1e-12));
  CHECK(std::abs(e.iso_deg - oracle::angle_between_deg(Mat3::Identity(), gt)) <= 1e-9);
  const Mat3 recomposed = oracle::rz(e.aniso_deg.z) * oracle::ry(e.aniso_deg.y) * oracle::rx(e.aniso_deg.x);
  CHECK((recomposed - gt).norm() <= 1e-12);
}

TEST_CASE("isotropic error is symmetric and matches the quaternion angle") {
  oracle::Gen g(61);
  for (int trial = 0; trial < 500; ++trial) {
    const Mat3 a = oracle::random_rotation(g), b = oracle::random_rotation(g);
    const double ab = rotation_error(Rotation(a), Rotation(b)).iso_deg;
    const double ba = rotation_error(Rotation(b), Rotation(a)).iso_deg;
    CHECK(std::abs(ab - ba) <= 1e-9);
    CHECK(ab >= 0.0);
    CHECK(ab <= 180.0);
    CHECK(std::abs(ab - oracle::angle_between_deg(a, b)) <= 1e-6);
  }
}

TEST_CASE("Euler decomposition round-trips away from gimbal lock") {
  oracle::Gen g(62);
  for (int trial = 0; trial < 1000; ++trial) {
    const double z = oracle::uniform(g, -179.9, 179.9);
    const double y = oracle::uniform(g, -89.0, 89.0);
    const double x = oracle::uniform(g, -179.9, 179.9);
    const Mat3 r = oracle::rz(z) * oracle::ry(y) * oracle::rx(x);
    const EulerZyx e = euler_zyx_deg(r);
    CHECK_FALSE(e.gimbal_lock);
    CHECK((rotation_from_euler_zyx_deg(e.z, e.y, e.x) - r).norm() <= 1e-9);
    CHECK(e.y == doctest::Approx(y).epsilon(1e-9).scale(1.0));
  }
  CHECK((rotation_from_euler_zyx_deg(10, 20, 30) - oracle::rz(10) * oracle::ry(20) * oracle::rx(30)).norm() <=
        1e-14);
}

TEST_CASE("gimbal lock puts the whole in-plane angle on z") {
  const Mat3 r = oracle::rz(25) * oracle::ry(90) * oracle::rx(0);
  const EulerZyx e = euler_zyx_deg(r);
  CHECK(e.gimbal_lock);
  CHECK(e.x == 0.0);
  CHECK(e.y == doctest::Approx(90.0).epsilon(1e-9));
  CHECK((rotation_from_euler_zyx_deg(e.z, e.y, e.x) - r).norm() <= 1e-9);
  // Only z - x is observable at +90 pitch; the convention folds it into z.
  const EulerZyx e2 = euler_zyx_deg(oracle::rz(40) * oracle::ry(90) * oracle::rx(15));
  CHECK(e2.gimbal_lock);
  CHECK(e2.z == doctest::Approx(25.0).epsilon(1e-9));
}

TEST_CASE("translation error in both norms") {
  CHECK(translation_error(Vec3(1, 2, 3), Vec3(1, 2, 3), NormOrder::l2) == 0.0);
  CHECK(translation_error(Vec3(3, 4, 0), Vec3::Zero(), NormOrder::l2) == 5.0);
  CHECK(translation_error(Vec3(2, -1, 4), Vec3(1, 1, 1), NormOrder::l1) == 6.0);
}

TEST_CASE("chamfer hand cases") {
  const PointCloud a = cloud({{0, 0, 0}, {2, 0, 0}});
  CHECK(chamfer_distance(a, a) == 0.0);
  CHECK(chamfer_distance(cloud({{0, 0, 0}}), cloud({{1, 0, 0}})) == 2.0);
  CHECK(chamfer_distance(a, cloud({{0, 0, 0}})) == 2.0);
}

TEST_CASE("chamfer is symmetric and agrees with the brute-force oracle") {
  oracle::Gen g(63);
  for (int trial = 0; trial < 20; ++trial) {
    const Points a = oracle::random_points(g, 5 + trial), b = oracle::random_points(g, 40 - trial);
    const double ab = chamfer_distance(PointCloud(a), PointCloud(b));
    CHECK(ab == chamfer_distance(PointCloud(b), PointCloud(a)));
    CHECK(ab == doctest::Approx(oracle::chamfer(a, b)).epsilon(1e-13));
  }
}

TEST_CASE("mean point distance hand cases") {
  oracle::Gen g(64);
  const PointCloud src(oracle::random_points(g, 50));
  const RigidTransform gt(Rotation(oracle::random_rotation(g)), Vec3(0.2, -0.1, 0.4));
  CHECK(mean_point_distance(src, gt, gt) == 0.0);
  const RigidTransform shifted(gt.rotation, gt.translation + Vec3(0, 0, 0.1));
  CHECK(mean_point_distance(src, shifted, gt) == doctest::Approx(0.1).epsilon(1e-14));
}

TEST_CASE("mean point distance for a small extra rotation matches a direct sum") {
  oracle::Gen g(65);
  Points p(3, 200);
  for (int i = 0; i < 200; ++i) {
    p.col(i) = Vec3(oracle::normal(g), oracle::normal(g), oracle::normal(g)).normalized();
  }
  const Mat3 rgt = oracle::random_rotation(g);
  const double eps_deg = 0.01;
  const RigidTransform gt(Rotation(rgt), Vec3::Zero());
  const RigidTransform est(Rotation(Mat3(rgt * oracle::rz(eps_deg))), Vec3::Zero());
  double direct = 0.0, radial = 0.0;
  for (int i = 0; i < 200; ++i) {
    direct += ((est.rotation.matrix() - rgt) * p.col(i)).norm();
    radial += p.col(i).head<2>().norm();
  }
  direct /= 200.0;
  radial /= 200.0;
  const double got = mean_point_distance(PointCloud(p), est, gt);
  CHECK(got == doctest::Approx(direct).epsilon(1e-12));
  const double eps = eps_deg * std::numbers::pi / 180.0;
  CHECK(got == doctest::Approx(eps * radial).epsilon(1e-5));
}

TEST_CASE("augmented loss hand cases") {
  oracle::Gen g(66);
  const RigidTransform gt(Rotation(oracle::random_rotation(g)), Vec3(1, 2, 3));
  CHECK(augmented_loss(trace_of({gt, gt, gt}), gt) <= 1e-28);
  const RigidTransform off(gt.rotation, gt.translation + Vec3(1, 0, 0));
  CHECK(augmented_loss(trace_of({off}), gt) == 1.0);
  const RigidTransform rot(Rotation(oracle::random_rotation(g)), Vec3(0, 1, 0));
  CHECK(augmented_loss(trace_of({rot, rot}), gt) == doctest::Approx(augmented_loss(trace_of({rot}), gt)).epsilon(1e-15));
  // Mean over poses of the rotation and translation terms.
  const double expected =
      0.5 * ((rot.rotation.matrix().transpose() * gt.rotation.matrix() - Mat3::Identity()).squaredNorm() +
             (rot.translation - gt.translation).squaredNorm() + 1.0);
  CHECK(augmented_loss(trace_of({rot, off}), gt) == doctest::Approx(expected).epsilon(1e-14));
  CHECK_THROWS_AS(augmented_loss(RefinementTrace{}, gt), InvalidArgument);
}

TEST_CASE("augmented loss vanishes only when every pose is the ground truth") {
  oracle::Gen g(67);
  const RigidTransform gt(Rotation(oracle::random_rotation(g)), Vec3(0.1, 0, 0));
  for (int trial = 0; trial < 50; ++trial) {
    const RigidTransform off(Rotation(Mat3(gt.rotation.matrix() * oracle::rx(oracle::uniform(g, 1e-3, 5)))),
                             gt.translation);
    CHECK(augmented_loss(trace_of({gt, off, gt}), gt) > 0.0);
  }
}
