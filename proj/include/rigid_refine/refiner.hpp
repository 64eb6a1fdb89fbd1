#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "rigid_refine/core.hpp"

namespace rigid_refine {

using Vec6 = Eigen::Matrix<double, 6, 1>;
using Vec9 = Eigen::Matrix<double, 9, 1>;
using Mat9 = Eigen::Matrix<double, 9, 9>;
using Mat96 = Eigen::Matrix<double, 9, 6>;
using Mat15 = Eigen::Matrix<double, 15, 15>;
using Vec15 = Eigen::Matrix<double, 15, 1>;

inline constexpr int kNumConstraints = 6;
inline constexpr int kDefaultRefinements = 5;
/// 1-norm condition number of the KKT matrix above which the system counts
/// as singular.
inline constexpr double kKktConditionLimit = 1e12;
/// Denominator floor of the rotation assembler.
inline constexpr double kAssemblerNormFloor = 1e-9;
/// Minimum angle between the first two candidate columns (radians).
inline constexpr double kAssemblerAngleGate = 1e-7;

/// Zero-based (row, col) pair of the upper-triangular constraint k in
/// {0..5}; order (1,1), (1,2), (2,2), (1,3), (2,3), (3,3).
struct ConstraintIndex {
  int i;
  int j;
};
ConstraintIndex constraint_index(int k);

/// Column-major position of (m, n) in vec(M): m + 3 n.
constexpr int vec_index(int m, int n) { return m + 3 * n; }

/// E^S_k = e_i e_j^T + e_j e_i^T
Mat3 symmetric_basis(int k);

/// Column-wise vectorization.
Vec9 vec(const Mat3& m);
Mat3 unvec(const Vec9& v);

/// c(R) = R^T R - I entry of constraint k.
double orthogonality_residual(int k, const Mat3& r);

/// First-order expansion of constraint k around r_prev evaluated at r.
double linearized_constraint(int k, const Mat3& r, const Mat3& r_prev);
double linearized_constraint(int k, const Mat3& r, const Rotation& r_prev);

/// [[A, B], [B^T, 0]] [vec(R); lambda] = [d_r; d_lambda]
struct KktSystem {
  Mat9 a;
  Mat96 b;
  Vec9 d_r;
  Vec6 d_lambda;

  Mat15 matrix() const;
  Vec15 rhs() const;
};

KktSystem assemble_kkt(const CenteredCorrespondences& cc, const Rotation& r_prev);

/// Output of the linear solve; not necessarily a rotation.
struct CandidateMatrix {
  Mat3 m;
};

struct KktSolution {
  CandidateMatrix candidate;
  Vec6 lambda;
  double relative_residual = 0.0;
  double condition = 0.0;  // exact 1-norm condition number
};

/// Dense LU with partial pivoting on the full 15x15 matrix.
/// Throws SingularSystem when the 1-norm condition number exceeds kKktConditionLimit.
KktSolution solve_kkt(const KktSystem& sys);

/// Gram-Schmidt assembly from the first two columns; the third column of the
/// input is ignored. Throws CollinearColumns if a denominator is at or below
/// kAssemblerNormFloor.
Rotation assemble_rotation(const CandidateMatrix& c);

enum class StepStatus { ok, singular_system, collinear_columns };

struct RefinementTrace {
  std::vector<RigidTransform> poses;       // n_r + 1, index 0 = initialization
  std::vector<Vec6> lambdas;               // n_r
  std::vector<double> kkt_residuals;       // n_r; NaN on fallback
  std::vector<CandidateMatrix> candidates;  // n_r
  std::vector<StepStatus> status;          // n_r

  std::size_t refinements() const { return lambdas.size(); }
  std::size_t fallback_count() const;
};

/// Runs n_r linearized-constraint refinement steps from init. A step whose
/// KKT system is singular or whose candidate cannot be assembled repeats the
/// previous pose and records the failure in the trace.
RefinementTrace refine(const CorrespondenceSet& c, const RigidTransform& init,
                       int n_r = kDefaultRefinements);

}  // namespace rigid_refine
