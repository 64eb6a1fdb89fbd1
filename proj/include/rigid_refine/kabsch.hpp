#pragma once

#include "rigid_refine/core.hpp"

namespace rigid_refine {

/// H = sum_i w_i p~_t,i p~_s,i^T
struct CrossCovariance {
  Mat3 h;
};

/// Singular values below this fraction of ||H||_F count as vanishing.
inline constexpr double kKabschDegeneracyThreshold = 1e-12;

CrossCovariance cross_covariance(const CenteredCorrespondences& cc);

/// Globally optimal rotation U diag(1, 1, det(U V^T)) V^T.
/// Throws DegenerateGeometry when the two smallest singular values of H both
/// vanish, leaving the rotation about the remaining axis unobservable.
Rotation kabsch_rotation(const CrossCovariance& h);

/// Kabsch rotation followed by the closed-form translation.
RigidTransform estimate_pose_kabsch(const CorrespondenceSet& c);

}  // namespace rigid_refine
