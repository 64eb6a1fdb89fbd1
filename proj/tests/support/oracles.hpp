#pragma once
// Test-side oracles. Nothing here calls into the library's algorithms: the
// random stream is std::mt19937_64, rotations come from Eigen quaternions and
// every quantity is recomputed from its defining formula.

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Geometry>

#include "rigid_refine/core.hpp"

namespace oracle {

using rigid_refine::Mat3;
using rigid_refine::Points;
using rigid_refine::Vec3;

using Gen = std::mt19937_64;

inline double uniform(Gen& g, double lo = 0.0, double hi = 1.0) {
  return std::uniform_real_distribution<double>(lo, hi)(g);
}

inline double normal(Gen& g) { return std::normal_distribution<double>(0.0, 1.0)(g); }

inline Mat3 random_rotation(Gen& g) {
  Eigen::Quaterniond q(normal(g), normal(g), normal(g), normal(g));
  q.normalize();
  return q.toRotationMatrix();
}

inline Mat3 axis_angle_deg(const Vec3& axis, double deg) {
  return Eigen::AngleAxisd(deg * std::numbers::pi / 180.0, axis.normalized()).toRotationMatrix();
}

inline Mat3 rz(double deg) { return axis_angle_deg(Vec3::UnitZ(), deg); }
inline Mat3 ry(double deg) { return axis_angle_deg(Vec3::UnitY(), deg); }
inline Mat3 rx(double deg) { return axis_angle_deg(Vec3::UnitX(), deg); }

/// Gaussian blob, roughly unit-ball scale.
inline Points random_points(Gen& g, int n, double scale = 0.5) {
  Points p(3, n);
  for (int i = 0; i < n; ++i) p.col(i) = Vec3(normal(g), normal(g), normal(g)) * scale;
  return p;
}

inline Eigen::VectorXd random_weights(Gen& g, int n, double lo = 0.5, double hi = 2.0) {
  Eigen::VectorXd w(n);
  for (int i = 0; i < n; ++i) w[i] = uniform(g, lo, hi);
  return w;
}

inline Vec3 mean_of(const Points& p, const Eigen::VectorXd& w) {
  Vec3 s = Vec3::Zero();
  double ws = 0.0;
  for (Eigen::Index i = 0; i < p.cols(); ++i) {
    s += w[i] * p.col(i);
    ws += w[i];
  }
  return s / ws;
}

/// sum_i w_i ||t_i - R s_i - t||^2, written out term by term.
inline double cost(const Mat3& r, const Vec3& t, const Points& src, const Points& tgt,
                   const Eigen::VectorXd& w) {
  double c = 0.0;
  for (Eigen::Index i = 0; i < src.cols(); ++i) {
    c += w[i] * (tgt.col(i) - r * src.col(i) - t).squaredNorm();
  }
  return c;
}

/// Rotation cost with translations eliminated through the weighted means.
inline double centered_cost(const Mat3& r, const Points& src, const Points& tgt,
                            const Eigen::VectorXd& w) {
  const Vec3 ms = mean_of(src, w), mt = mean_of(tgt, w);
  return cost(r, mt - r * ms, src, tgt, w);
}

/// Best rotation cost found by random sampling of SO(3) followed by a
/// shrinking-step local polish over small axis rotations of the incumbent.
inline double brute_force_min_cost(const Points& src, const Points& tgt, const Eigen::VectorXd& w,
                                   int samples, Gen& g, Mat3* best_rotation = nullptr) {
  Mat3 best = Mat3::Identity();
  double best_cost = centered_cost(best, src, tgt, w);
  for (int s = 0; s < samples; ++s) {
    const Mat3 r = random_rotation(g);
    const double c = centered_cost(r, src, tgt, w);
    if (c < best_cost) {
      best_cost = c;
      best = r;
    }
  }
  for (double step = 0.05; step > 1e-10; step *= 0.5) {
    bool improved = true;
    while (improved) {
      improved = false;
      for (int a = 0; a < 3; ++a) {
        for (double sgn : {-1.0, 1.0}) {
          const Mat3 r = Eigen::AngleAxisd(sgn * step, Vec3::Unit(a)).toRotationMatrix() * best;
          const double c = centered_cost(r, src, tgt, w);
          if (c < best_cost) {
            best_cost = c;
            best = r;
            improved = true;
          }
        }
      }
    }
  }
  if (best_rotation) *best_rotation = best;
  return best_cost;
}

/// Upper-triangular constraint pairs in the order (1,1) (1,2) (2,2) (1,3) (2,3) (3,3).
inline std::pair<int, int> pair_of(int k) {
  static const int table[6][2] = {{0, 0}, {0, 1}, {1, 1}, {0, 2}, {1, 2}, {2, 2}};
  return {table[k][0], table[k][1]};
}

inline Mat3 sym_basis(int k) {
  const auto [i, j] = pair_of(k);
  Mat3 e = Mat3::Zero();
  e(i, j) += 1.0;
  e(j, i) += 1.0;
  return e;
}

/// c_k(R_prev) + tr(E^S_k R_prev^T (R - R_prev)), with c(R) = R^T R - I.
inline double linearized(int k, const Mat3& r, const Mat3& rp) {
  const auto [i, j] = pair_of(k);
  const double c = (rp.transpose() * rp - Mat3::Identity())(i, j);
  return c + (sym_basis(k) * rp.transpose() * (r - rp)).trace();
}

/// sum_i w_i / 2 ||p~_t - R p~_s||^2 + sum_k lambda_k c_k^(1)(R), on already
/// centered points.
inline double lagrangian(const Mat3& r, const Eigen::Matrix<double, 6, 1>& lambda,
                         const Points& ps, const Points& pt, const Eigen::VectorXd& w,
                         const Mat3& rp) {
  double l = 0.0;
  for (Eigen::Index i = 0; i < ps.cols(); ++i) {
    l += 0.5 * w[i] * (pt.col(i) - r * ps.col(i)).squaredNorm();
  }
  for (int k = 0; k < 6; ++k) l += lambda[k] * linearized(k, r, rp);
  return l;
}

/// Central-difference gradient of the Lagrangian over (vec(R) column-major, lambda).
inline Eigen::Matrix<double, 15, 1> lagrangian_gradient_fd(
    const Mat3& r, const Eigen::Matrix<double, 6, 1>& lambda, const Points& ps, const Points& pt,
    const Eigen::VectorXd& w, const Mat3& rp, double h = 1e-6) {
  Eigen::Matrix<double, 15, 1> grad;
  for (int q = 0; q < 15; ++q) {
    Mat3 r_plus = r, r_minus = r;
    Eigen::Matrix<double, 6, 1> l_plus = lambda, l_minus = lambda;
    if (q < 9) {
      r_plus(q % 3, q / 3) += h;
      r_minus(q % 3, q / 3) -= h;
    } else {
      l_plus[q - 9] += h;
      l_minus[q - 9] -= h;
    }
    grad[q] = (lagrangian(r_plus, l_plus, ps, pt, w, rp) -
               lagrangian(r_minus, l_minus, ps, pt, w, rp)) /
              (2.0 * h);
  }
  return grad;
}

/// Brute-force squared distance from p to the closest column of cloud.
inline double nearest_sq(const Vec3& p, const Points& cloud) {
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < cloud.cols(); ++j) best = std::min(best, (cloud.col(j) - p).squaredNorm());
  return best;
}

inline double chamfer(const Points& a, const Points& b) {
  double ab = 0.0, ba = 0.0;
  for (Eigen::Index i = 0; i < a.cols(); ++i) ab += nearest_sq(a.col(i), b);
  for (Eigen::Index j = 0; j < b.cols(); ++j) ba += nearest_sq(b.col(j), a);
  return ab / static_cast<double>(a.cols()) + ba / static_cast<double>(b.cols());
}

inline double deg(double rad) { return rad * 180.0 / std::numbers::pi; }

/// Relative-rotation angle from the quaternion of est^T gt (independent of
/// the trace formula).
inline double angle_between_deg(const Mat3& est, const Mat3& gt) {
  const Eigen::Quaterniond q(Mat3(est.transpose() * gt));
  return deg(2.0 * std::atan2(q.vec().norm(), std::abs(q.w())));
}

}  // namespace oracle
