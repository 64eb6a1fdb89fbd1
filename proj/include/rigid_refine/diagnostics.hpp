#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "rigid_refine/core.hpp"
#include "rigid_refine/refiner.hpp"

namespace rigid_refine {

/// det(G) / ||G||_F^3 at or below this marks G as near-singular.
inline constexpr double kNearSingularG = 1e-10;
/// Singular values above this fraction of the largest count toward rank.
inline constexpr double kLicqRankTolerance = 1e-9;

/// Minimizer of the correspondence cost with no rotation constraint.
/// Column j of r_u solves G r_j = f_j, with G = sum w p~_t p~_t^T and
/// F = sum w p~_t p~_s^T. Columns share the frame of the Kabsch rotation:
/// with exact correspondences p~_t = R p~_s, r_u == R.
struct UnconstrainedSolution {
  std::optional<Mat3> r_u;  // empty when G is near-singular
  Mat3 g;
  Mat3 f;
  double det_g = 0.0;
  double det_g_normalized = 0.0;  // det(G) / ||G||_F^3

  bool near_singular() const { return !r_u.has_value(); }
  /// r_u or NearSingularG.
  const Mat3& require() const;
};

UnconstrainedSolution unconstrained_solution(const CenteredCorrespondences& cc);

struct DivergenceReport {
  double divergence = 0.0;                  // D, summed over refinements 1..n_r
  std::vector<double> per_iteration;        // ||R_i - R_Kabsch||_F
  std::optional<double> max_col_distance;   // max_i ||r_u,i - r_K,i||
  std::optional<double> max_col_angle_deg;  // max_i acos(|r_u,i . r_K,i|) in degrees
  double det_g = 0.0;
  double det_g_normalized = 0.0;
};

/// Distance predictors are left empty when G is near-singular; D is always
/// computed. Index 0 of the trace (the initialization) is not counted.
DivergenceReport divergence_report(const RefinementTrace& trace, const RigidTransform& kabsch_pose,
                                   const CenteredCorrespondences& cc);

/// 9x6 matrix of linearized orthogonality-constraint gradients, columns
/// ordered (n1, n2, n3, o12, o13, o23).
Eigen::Matrix<double, 9, 6> constraint_gradients(const Mat3& r_prev);

/// Numerical rank of constraint_gradients(r_prev). Accepts any matrix so
/// that degenerate linearization points can be examined.
int constraint_gradient_rank(const Mat3& r_prev);

/// LICQ check at a rotation; 6 for every valid rotation.
int licq_check(const Rotation& r_prev);

/// |c_d^(1) - 1/2 sum_i c_ni^(1)| with the determinant constraint linearized
/// through scalar triple products of the columns of r_prev.
double determinant_redundancy_residual(const Mat3& r, const Mat3& r_prev);

struct SingularityMargin {
  double min_col_norm = 0.0;
  double col12_angle_rad = 0.0;
  bool below_gate = false;  // angle < kAssemblerAngleGate or norm <= kAssemblerNormFloor
};

SingularityMargin singularity_margin(const CandidateMatrix& c);

}  // namespace rigid_refine
