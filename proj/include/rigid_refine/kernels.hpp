#pragma once

// OpenMP data-parallel kernels. Every parallel loop writes disjoint outputs
// and reductions run serially afterwards, so Execution::serial and
// Execution::parallel give bitwise identical results. Independent serial
// reference versions live in reference.hpp.

#include <cstddef>
#include <functional>
#include <vector>

#include <Eigen/Core>

#include "rigid_refine/core.hpp"

namespace rigid_refine {

enum class Execution { serial, parallel };

namespace kernels {

/// Calls fn(i) for i in [0, n). With Execution::parallel the indices are
/// distributed over OpenMP threads. If any call throws, the exception from
/// the lowest index is rethrown after the loop completes.
void for_each_index(std::size_t n, Execution exec, const std::function<void(std::size_t)>& fn);

struct NeighborResult {
  std::vector<Eigen::Index> index;  // per query point
  Eigen::VectorXd squared_distance;
};

/// Brute-force nearest neighbor of every query column among reference columns.
/// Ties resolve to the lowest reference index.
NeighborResult nearest_neighbors(const Points& query, const Points& reference,
                                 Execution exec = Execution::parallel);

/// Symmetric Chamfer distance: mean squared NN distance a->b plus b->a.
double chamfer_distance(const Points& a, const Points& b, Execution exec = Execution::parallel);

/// Number of worker threads the parallel kernels will use.
int max_threads();
/// Caps the worker pool; 0 restores the hardware default.
void set_max_threads(int n);

}  // namespace kernels
}  // namespace rigid_refine
