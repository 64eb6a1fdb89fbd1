#include "rigid_refine/refiner.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Geometry>
#include <Eigen/LU>

#include "rigid_refine/errors.hpp"

namespace rigid_refine {

namespace {

constexpr std::array<ConstraintIndex, kNumConstraints> kConstraintPairs{{
    {0, 0}, {0, 1}, {1, 1}, {0, 2}, {1, 2}, {2, 2},
}};

}  // namespace

ConstraintIndex constraint_index(int k) {
  if (k < 0 || k >= kNumConstraints) {
    throw InvalidArgument("constraint index out of range");
  }
  return kConstraintPairs[static_cast<std::size_t>(k)];
}

Mat3 symmetric_basis(int k) {
  const auto [i, j] = constraint_index(k);
  Mat3 e = Mat3::Zero();
  e(i, j) += 1.0;
  e(j, i) += 1.0;
  return e;
}

Vec9 vec(const Mat3& m) { return Eigen::Map<const Vec9>(m.data()); }

Mat3 unvec(const Vec9& v) { return Eigen::Map<const Mat3>(v.data()); }

double orthogonality_residual(int k, const Mat3& r) {
  const auto [i, j] = constraint_index(k);
  return (r.transpose() * r - Mat3::Identity())(i, j);
}

double linearized_constraint(int k, const Mat3& r, const Mat3& r_prev) {
  return orthogonality_residual(k, r_prev) +
         (symmetric_basis(k) * r_prev.transpose() * (r - r_prev)).trace();
}

double linearized_constraint(int k, const Mat3& r, const Rotation& r_prev) {
  return linearized_constraint(k, r, r_prev.matrix());
}

Mat15 KktSystem::matrix() const {
  Mat15 k = Mat15::Zero();
  k.topLeftCorner<9, 9>() = a;
  k.topRightCorner<9, 6>() = b;
  k.bottomLeftCorner<6, 9>() = b.transpose();
  return k;
}

Vec15 KktSystem::rhs() const {
  Vec15 r;
  r << d_r, d_lambda;
  return r;
}

KktSystem assemble_kkt(const CenteredCorrespondences& cc, const Rotation& r_prev) {
  const Points& ps = cc.source_centered.matrix();
  const Points& pt = cc.target_centered.matrix();
  const Mat3 source_scatter = ps * cc.weights.asDiagonal() * ps.transpose();
  const Mat3 cross = pt * cc.weights.asDiagonal() * ps.transpose();

  KktSystem sys;
  // Row (m, n) of A: vec(E_mn * sum w p~_s p~_s^T)^T.
  for (int n = 0; n < 3; ++n) {
    for (int m = 0; m < 3; ++m) {
      Mat3 e_mn = Mat3::Zero();
      e_mn(m, n) = 1.0;
      sys.a.row(vec_index(m, n)) = vec(e_mn * source_scatter).transpose();
    }
  }
  const Mat3& rp = r_prev.matrix();
  for (int k = 0; k < kNumConstraints; ++k) {
    const Mat3 es = symmetric_basis(k);
    sys.b.col(k) = vec(rp * es);
    sys.d_lambda[k] = es.trace() - orthogonality_residual(k, rp);
  }
  sys.d_r = vec(cross);
  return sys;
}

KktSolution solve_kkt(const KktSystem& sys) {
  const Mat15 k = sys.matrix();
  const Vec15 rhs = sys.rhs();
  Eigen::PartialPivLU<Mat15> lu(k);
  // Exact 1-norm condition number from the factorization. The cheaper
  // rcond() estimator can miss exact singularity by many orders of magnitude
  // (it reports ~36 for a collinear source whose smallest singular value is
  // ~1e-17), and at 15x15 the explicit inverse costs next to nothing.
  const double condition =
      k.cwiseAbs().colwise().sum().maxCoeff() * lu.inverse().cwiseAbs().colwise().sum().maxCoeff();
  if (!(condition <= kKktConditionLimit)) {
    throw SingularSystem("KKT matrix condition estimate " + std::to_string(condition) +
                         " exceeds limit");
  }
  const Vec15 z = lu.solve(rhs);
  KktSolution out;
  out.candidate.m = unvec(z.head<9>());
  out.lambda = z.tail<6>();
  out.relative_residual = (k * z - rhs).norm() / rhs.norm();
  out.condition = condition;
  return out;
}

Rotation assemble_rotation(const CandidateMatrix& c) {
  const Vec3 c1 = c.m.col(0);
  const Vec3 c2 = c.m.col(1);
  const double n1 = c1.norm();
  if (!(n1 > kAssemblerNormFloor)) {
    throw CollinearColumns("first candidate column vanishes");
  }
  const Vec3 r1 = c1 / n1;
  const Vec3 rejected = c2 - r1 * r1.dot(c2);
  const double n2 = rejected.norm();
  if (!(n2 > kAssemblerNormFloor)) {
    throw CollinearColumns("candidate columns 1 and 2 are collinear");
  }
  const Vec3 r2 = rejected / n2;
  Mat3 out;
  out << r1, r2, r1.cross(r2);
  return Rotation(out);
}

std::size_t RefinementTrace::fallback_count() const {
  std::size_t n = 0;
  for (StepStatus s : status) n += s != StepStatus::ok;
  return n;
}

RefinementTrace refine(const CorrespondenceSet& c, const RigidTransform& init, int n_r) {
  if (n_r < 1) {
    throw InvalidArgument("refinement count must be at least 1");
  }
  const CenteredCorrespondences cc = center(c);
  RefinementTrace trace;
  trace.poses.reserve(static_cast<std::size_t>(n_r) + 1);
  trace.poses.push_back(init);
  for (int t = 1; t <= n_r; ++t) {
    const RigidTransform& prev = trace.poses.back();
    try {
      KktSolution sol = solve_kkt(assemble_kkt(cc, prev.rotation));
      try {
        Rotation r = assemble_rotation(sol.candidate);
        Vec3 translation = optimal_translation(r, c);
        trace.poses.emplace_back(std::move(r), translation);
        trace.status.push_back(StepStatus::ok);
      } catch (const CollinearColumns&) {
        trace.poses.push_back(prev);
        trace.status.push_back(StepStatus::collinear_columns);
      }
      trace.lambdas.push_back(sol.lambda);
      trace.kkt_residuals.push_back(sol.relative_residual);
      trace.candidates.push_back(sol.candidate);
    } catch (const SingularSystem&) {
      trace.poses.push_back(prev);
      trace.lambdas.push_back(Vec6::Zero());
      trace.kkt_residuals.push_back(std::numeric_limits<double>::quiet_NaN());
      trace.candidates.push_back(CandidateMatrix{prev.rotation.matrix()});
      trace.status.push_back(StepStatus::singular_system);
    }
  }
  return trace;
}

}  // namespace rigid_refine
