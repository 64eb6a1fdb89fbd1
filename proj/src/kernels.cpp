#include "rigid_refine/kernels.hpp"

#include <exception>
#include <limits>

#include <omp.h>

namespace rigid_refine::kernels {

void for_each_index(std::size_t n, Execution exec, const std::function<void(std::size_t)>& fn) {
  if (exec == Execution::serial) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic)
  for (long long i = 0; i < count; ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

NeighborResult nearest_neighbors(const Points& query, const Points& reference, Execution exec) {
  const Eigen::Index nq = query.cols();
  const Eigen::Index nr = reference.cols();
  NeighborResult out;
  out.index.assign(static_cast<std::size_t>(nq), 0);
  out.squared_distance.resize(nq);
#pragma omp parallel for schedule(static) if (exec == Execution::parallel)
  for (Eigen::Index q = 0; q < nq; ++q) {
    const double qx = query(0, q), qy = query(1, q), qz = query(2, q);
    double best = std::numeric_limits<double>::infinity();
    Eigen::Index best_j = 0;
    for (Eigen::Index j = 0; j < nr; ++j) {
      const double dx = reference(0, j) - qx;
      const double dy = reference(1, j) - qy;
      const double dz = reference(2, j) - qz;
      const double d = dx * dx + dy * dy + dz * dz;
      if (d < best) {
        best = d;
        best_j = j;
      }
    }
    out.index[static_cast<std::size_t>(q)] = best_j;
    out.squared_distance[q] = best;
  }
  return out;
}

namespace {

double ordered_mean(const Eigen::VectorXd& v) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) sum += v[i];
  return sum / static_cast<double>(v.size());
}

}  // namespace

double chamfer_distance(const Points& a, const Points& b, Execution exec) {
  const NeighborResult ab = nearest_neighbors(a, b, exec);
  const NeighborResult ba = nearest_neighbors(b, a, exec);
  return ordered_mean(ab.squared_distance) + ordered_mean(ba.squared_distance);
}

int max_threads() { return omp_get_max_threads(); }

void set_max_threads(int n) {
  if (n <= 0) n = omp_get_num_procs();
  omp_set_num_threads(n);
}

}  // namespace rigid_refine::kernels
