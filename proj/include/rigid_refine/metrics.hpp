#pragma once

#include "rigid_refine/core.hpp"
#include "rigid_refine/refiner.hpp"

namespace rigid_refine {

/// Intrinsic z -> y -> x Euler angles in degrees: R = Rz(z) Ry(y) Rx(x).
struct EulerZyx {
  double z = 0.0;
  double y = 0.0;
  double x = 0.0;
  /// |pitch| at 90 degrees: z carries the whole in-plane angle and x is 0.
  bool gimbal_lock = false;
};

EulerZyx euler_zyx_deg(const Mat3& r);
Mat3 rotation_from_euler_zyx_deg(double z, double y, double x);

struct RotationError {
  double iso_deg = 0.0;
  EulerZyx aniso_deg;
};

/// dR = est^T gt; isotropic angle of dR (the arccos-of-trace angle,
/// evaluated through atan2) and the z->y->x Euler decomposition of dR.
RotationError rotation_error(const Rotation& est, const Rotation& gt);

enum class NormOrder { l1 = 1, l2 = 2 };

double translation_error(const Vec3& est, const Vec3& gt, NormOrder p);

/// Mean squared nearest-neighbor distance a->b plus b->a (brute force).
double chamfer_distance(const PointCloud& a, const PointCloud& b);

/// (1/N) sum_i ||(R - R_gt) p_s,i + t - t_gt||
double mean_point_distance(const PointCloud& src, const RigidTransform& est,
                           const RigidTransform& gt);

/// Mean over all poses of ||R_i^T R_gt - I||_F^2 plus mean of ||t_i - t_gt||^2.
double augmented_loss(const RefinementTrace& trace, const RigidTransform& gt);

}  // namespace rigid_refine
