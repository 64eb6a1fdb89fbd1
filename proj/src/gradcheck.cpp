#include "rigid_refine/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Geometry>
#include <Eigen/LU>
#include <Eigen/SVD>

#include "rigid_refine/errors.hpp"
#include "rigid_refine/kabsch.hpp"
#include "rigid_refine/refiner.hpp"
#include "rigid_refine/rng.hpp"
#include "rigid_refine/synth.hpp"

namespace rigid_refine {

PoseVector pose_vector(const RigidTransform& pose) {
  PoseVector v;
  v << vec(pose.rotation.matrix()), pose.translation;
  return v;
}

CorrespondenceSet uncenter(const CenteredCorrespondences& cc) {
  return CorrespondenceSet(
      PointCloud(Points(cc.source_centered.matrix().colwise() + cc.source_mean)),
      PointCloud(Points(cc.target_centered.matrix().colwise() + cc.target_mean)), cc.weights);
}

RigidTransform refine_step(const CorrespondenceSet& c, const Rotation& r_prev) {
  const KktSolution sol = solve_kkt(assemble_kkt(center(c), r_prev));
  Rotation r = assemble_rotation(sol.candidate);
  Vec3 t = optimal_translation(r, c);
  return {std::move(r), t};
}

namespace {

// Differential of the Gram-Schmidt assembler at candidate c in direction dc.
Mat3 assembler_differential(const Mat3& c, const Mat3& dc) {
  const Vec3 c1 = c.col(0), c2 = c.col(1);
  const Vec3 dc1 = dc.col(0), dc2 = dc.col(1);
  const double n1 = c1.norm();
  const Vec3 r1 = c1 / n1;
  const Vec3 dr1 = (dc1 - r1 * r1.dot(dc1)) / n1;
  const double proj = r1.dot(c2);
  const Vec3 u = c2 - r1 * proj;
  const Vec3 du = dc2 - dr1 * proj - r1 * (dr1.dot(c2) + r1.dot(dc2));
  const double n2 = u.norm();
  const Vec3 r2 = u / n2;
  const Vec3 dr2 = (du - r2 * r2.dot(du)) / n2;
  Mat3 out;
  out << dr1, dr2, dr1.cross(r2) + r1.cross(dr2);
  return out;
}

}  // namespace

Jacobian jacobian_refine_step(const CenteredCorrespondences& cc, const Rotation& r_prev) {
  const KktSystem sys = assemble_kkt(cc, r_prev);
  const KktSolution sol = solve_kkt(sys);
  const Mat3 cand = sol.candidate.m;
  const Rotation rot = assemble_rotation(sol.candidate);
  const Mat3& r = rot.matrix();

  const Points& ps = cc.source_centered.matrix();
  const Points& pt = cc.target_centered.matrix();
  const Eigen::VectorXd& w = cc.weights;
  const double w_sum = w.sum();
  const std::size_t n = cc.size();
  const auto cols = static_cast<Eigen::Index>(7 * n);

  // Right-hand sides of the differentiated KKT system: d(rhs) - d(K) z, where
  // only A (through the source scatter S) and d_r (through H) depend on the
  // inputs, and dA z = vec(R' dS).
  Eigen::Matrix<double, 15, Eigen::Dynamic> rhs =
      Eigen::Matrix<double, 15, Eigen::Dynamic>::Zero(15, cols);
  Eigen::Matrix<double, 3, Eigen::Dynamic> d_source_mean =
      Eigen::Matrix<double, 3, Eigen::Dynamic>::Zero(3, cols);
  Eigen::Matrix<double, 3, Eigen::Dynamic> d_target_mean =
      Eigen::Matrix<double, 3, Eigen::Dynamic>::Zero(3, cols);

  Jacobian jac;
  jac.n_points = n;
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const Vec3 s = ps.col(ii);
    const Vec3 t = pt.col(ii);
    for (int a = 0; a < 3; ++a) {
      const Vec3 e = Vec3::Unit(a);
      const Mat3 d_scatter = w[ii] * (e * s.transpose() + s * e.transpose());
      Mat3 d_cross = w[ii] * t * e.transpose();
      Eigen::Index col = Jacobian::source_column(i, a);
      rhs.col(col).head<9>() = vec(d_cross - cand * d_scatter);
      d_source_mean.col(col) = e * (w[ii] / w_sum);

      d_cross = w[ii] * e * s.transpose();
      col = jac.target_column(i, a);
      rhs.col(col).head<9>() = vec(d_cross);
      d_target_mean.col(col) = e * (w[ii] / w_sum);
    }
    const Eigen::Index col = jac.weight_column(i);
    rhs.col(col).head<9>() = vec(t * s.transpose() - cand * (s * s.transpose()));
    d_source_mean.col(col) = s / w_sum;
    d_target_mean.col(col) = t / w_sum;
  }

  Eigen::PartialPivLU<Mat15> lu(sys.matrix());
  const Eigen::Matrix<double, 15, Eigen::Dynamic> dz = lu.solve(rhs);

  jac.matrix.resize(12, cols);
  for (Eigen::Index col = 0; col < cols; ++col) {
    const Mat3 dr = assembler_differential(cand, unvec(dz.col(col).head<9>()));
    jac.matrix.col(col).head<9>() = vec(dr);
    jac.matrix.col(col).tail<3>() =
        d_target_mean.col(col) - dr * cc.source_mean - r * d_source_mean.col(col);
  }
  return jac;
}

Jacobian jacobian_refine_step(const CorrespondenceSet& c, const Rotation& r_prev) {
  return jacobian_refine_step(center(c), r_prev);
}

Jacobian finite_difference_jacobian(const PoseFunction& f, const CorrespondenceSet& c,
                                    double step, Execution exec) {
  const std::size_t n = c.size();
  Jacobian jac;
  jac.n_points = n;
  jac.matrix.resize(12, static_cast<Eigen::Index>(7 * n));

  kernels::for_each_index(7 * n, exec, [&](std::size_t col) {
    Points src = c.source().matrix();
    Points tgt = c.target().matrix();
    Eigen::VectorXd w = c.weights();
    double* slot = nullptr;
    if (col < 3 * n) {
      slot = &src(static_cast<Eigen::Index>(col % 3), static_cast<Eigen::Index>(col / 3));
    } else if (col < 6 * n) {
      const std::size_t k = col - 3 * n;
      slot = &tgt(static_cast<Eigen::Index>(k % 3), static_cast<Eigen::Index>(k / 3));
    } else {
      slot = &w[static_cast<Eigen::Index>(col - 6 * n)];
    }
    const double base = *slot;
    *slot = base + step;
    const PoseVector plus = f(CorrespondenceSet(PointCloud(src), PointCloud(tgt), w));
    *slot = base - step;
    const PoseVector minus = f(CorrespondenceSet(PointCloud(src), PointCloud(tgt), w));
    jac.matrix.col(static_cast<Eigen::Index>(col)) = (plus - minus) / (2.0 * step);
  });
  return jac;
}

double kabsch_relative_gap(const CenteredCorrespondences& cc) {
  const Vec3 s = Eigen::JacobiSVD<Mat3>(cross_covariance(cc).h).singularValues();
  if (!(s[0] > 0.0)) return 0.0;
  return std::min(s[0] - s[1], s[1] - s[2]) / s[0];
}

Jacobian jacobian_kabsch(const CenteredCorrespondences& cc, double step, Execution exec) {
  const double gap = kabsch_relative_gap(cc);
  if (!(gap >= kKabschGapGate)) {
    throw IllConditioned("singular values of H are too close for an SVD gradient (relative gap " +
                         std::to_string(gap) + ")");
  }
  return finite_difference_jacobian(
      [](const CorrespondenceSet& c) { return pose_vector(estimate_pose_kabsch(c)); },
      uncenter(cc), step, exec);
}

JacobianComparison compare_jacobians(const Jacobian& analytic, const Jacobian& reference,
                                     double abs_floor) {
  if (analytic.matrix.rows() != reference.matrix.rows() ||
      analytic.matrix.cols() != reference.matrix.cols()) {
    throw InvalidArgument("Jacobian shapes differ");
  }
  JacobianComparison out;
  for (Eigen::Index c = 0; c < analytic.matrix.cols(); ++c) {
    for (Eigen::Index r = 0; r < analytic.matrix.rows(); ++r) {
      const double diff = std::abs(analytic.matrix(r, c) - reference.matrix(r, c));
      if (diff <= abs_floor) continue;
      const double rel = diff / std::abs(reference.matrix(r, c));
      if (rel > out.max_relative_error) {
        out.max_relative_error = rel;
        out.row = r;
        out.col = c;
      }
    }
  }
  return out;
}

GradcheckCase make_gradcheck_case(std::uint64_t seed, int n_points) {
  if (n_points < 3) throw InvalidArgument("gradcheck needs at least three points");
  Rng rng(seed);
  const PointCloud source = make_base_cloud(CloudKind::ball, n_points, rng);
  const Rotation gt = random_rotation(rng);
  const Vec3 t(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5));
  Points target = (gt.matrix() * source.matrix()).colwise() + t;
  Eigen::VectorXd w(n_points);
  for (int i = 0; i < n_points; ++i) {
    for (int a = 0; a < 3; ++a) target(a, i) += 0.02 * rng.gaussian();
    w[i] = rng.uniform(0.5, 1.5);
  }
  CorrespondenceSet c(source, PointCloud(std::move(target)), std::move(w));
  const Mat3 kick = Eigen::AngleAxisd(0.1, random_unit_vector(rng)).toRotationMatrix();
  Rotation r_prev(kick * estimate_pose_kabsch(c).rotation.matrix());
  return {std::move(c), std::move(r_prev)};
}

GradcheckReport run_gradcheck(std::uint64_t seed, int n_points, Execution exec) {
  const GradcheckCase gc = make_gradcheck_case(seed, n_points);
  const Jacobian analytic = jacobian_refine_step(gc.correspondences, gc.r_prev);
  const Rotation& r_prev = gc.r_prev;
  const Jacobian fd = finite_difference_jacobian(
      [&r_prev](const CorrespondenceSet& c) { return pose_vector(refine_step(c, r_prev)); },
      gc.correspondences, kFiniteDifferenceStep, exec);
  return {compare_jacobians(analytic, fd), static_cast<std::size_t>(n_points)};
}

}  // namespace rigid_refine
