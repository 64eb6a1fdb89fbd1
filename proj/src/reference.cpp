#include "rigid_refine/reference.hpp"

#include <limits>

namespace rigid_refine::reference {

std::vector<Eigen::Index> nearest_neighbors(const Points& query, const Points& reference) {
  std::vector<Eigen::Index> out;
  out.reserve(static_cast<std::size_t>(query.cols()));
  for (Eigen::Index q = 0; q < query.cols(); ++q) {
    double best = std::numeric_limits<double>::infinity();
    Eigen::Index best_j = 0;
    for (Eigen::Index j = 0; j < reference.cols(); ++j) {
      const double d = (reference.col(j) - query.col(q)).squaredNorm();
      if (d < best) {
        best = d;
        best_j = j;
      }
    }
    out.push_back(best_j);
  }
  return out;
}

namespace {

double directed(const Points& from, const Points& to) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < from.cols(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < to.cols(); ++j) {
      best = std::min(best, (from.col(i) - to.col(j)).squaredNorm());
    }
    sum += best;
  }
  return sum / static_cast<double>(from.cols());
}

}  // namespace

double chamfer_distance(const Points& a, const Points& b) { return directed(a, b) + directed(b, a); }

}  // namespace rigid_refine::reference
