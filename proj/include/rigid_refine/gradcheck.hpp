#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

#include <Eigen/Core>

#include "rigid_refine/core.hpp"
#include "rigid_refine/kernels.hpp"

namespace rigid_refine {

using PoseVector = Eigen::Matrix<double, 12, 1>;

/// vec(R) (column-major, 9 entries) followed by t (3 entries).
PoseVector pose_vector(const RigidTransform& pose);

/// d(pose) / d(inputs).
/// Rows: vec(R) column-major (0..8), translation (9..11).
/// Columns: source coordinates point-major (0..3N-1), target coordinates
/// (3N..6N-1), weights (6N..7N-1).
struct Jacobian {
  Eigen::MatrixXd matrix;
  std::size_t n_points = 0;

  static Eigen::Index source_column(std::size_t i, int axis) {
    return static_cast<Eigen::Index>(3 * i) + axis;
  }
  Eigen::Index target_column(std::size_t i, int axis) const {
    return static_cast<Eigen::Index>(3 * n_points + 3 * i) + axis;
  }
  Eigen::Index weight_column(std::size_t i) const {
    return static_cast<Eigen::Index>(6 * n_points + i);
  }
};

inline constexpr double kFiniteDifferenceStep = 1e-6;
/// Relative singular-value gap below which the Kabsch SVD gradient is refused.
inline constexpr double kKabschGapGate = 1e-6;

/// One refinement step on raw correspondences: center, assemble and solve the
/// KKT system at r_prev, assemble the rotation, recover the translation.
RigidTransform refine_step(const CorrespondenceSet& c, const Rotation& r_prev);

/// Analytical Jacobian of refine_step: implicit differentiation of the KKT
/// system (one LU factorization, one solve per input), then the chain rule
/// through the Gram-Schmidt assembler and the translation formula.
/// Throws SingularSystem like solve_kkt.
Jacobian jacobian_refine_step(const CorrespondenceSet& c, const Rotation& r_prev);
Jacobian jacobian_refine_step(const CenteredCorrespondences& cc, const Rotation& r_prev);

using PoseFunction = std::function<PoseVector(const CorrespondenceSet&)>;

/// Central differences of f over every input coordinate and weight. Probes
/// are independent and may run in parallel; each writes its own column.
Jacobian finite_difference_jacobian(const PoseFunction& f, const CorrespondenceSet& c,
                                    double step = kFiniteDifferenceStep,
                                    Execution exec = Execution::parallel);

/// Finite-difference Jacobian of estimate_pose_kabsch. There is deliberately
/// no analytical counterpart. Throws IllConditioned when adjacent singular
/// values of H are closer than kKabschGapGate relative to the largest.
Jacobian jacobian_kabsch(const CenteredCorrespondences& cc, double step = kFiniteDifferenceStep,
                         Execution exec = Execution::parallel);

/// Smallest gap between adjacent singular values of H divided by the largest.
double kabsch_relative_gap(const CenteredCorrespondences& cc);

struct JacobianComparison {
  double max_relative_error = 0.0;
  Eigen::Index row = 0;
  Eigen::Index col = 0;
};

/// Entry-wise comparison. An entry with |a - b| <= abs_floor contributes
/// zero error; otherwise it contributes |a - b| / |b|.
JacobianComparison compare_jacobians(const Jacobian& analytic, const Jacobian& reference,
                                     double abs_floor = 1e-8);

CorrespondenceSet uncenter(const CenteredCorrespondences& cc);

/// A generic refinement step: noisy weighted correspondences in the unit
/// ball and a linearization point a few degrees away from the Kabsch
/// rotation, so that the step actually moves.
struct GradcheckCase {
  CorrespondenceSet correspondences;
  Rotation r_prev;
};
GradcheckCase make_gradcheck_case(std::uint64_t seed, int n_points);

struct GradcheckReport {
  JacobianComparison comparison;
  std::size_t n_points = 0;
};
/// Analytical refine_step Jacobian against central differences.
GradcheckReport run_gradcheck(std::uint64_t seed, int n_points,
                              Execution exec = Execution::parallel);

}  // namespace rigid_refine
