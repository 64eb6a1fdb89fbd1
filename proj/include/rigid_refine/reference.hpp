#pragma once

// Serial reference implementations of the OpenMP kernels, kept for testing
// and benchmarking. They follow the defining formulas as literally as
// possible and do not share code with kernels.cpp.

#include <vector>

#include <Eigen/Core>

#include "rigid_refine/core.hpp"

namespace rigid_refine::reference {

/// Index of the nearest reference point for each query point (lowest index on ties).
std::vector<Eigen::Index> nearest_neighbors(const Points& query, const Points& reference);

/// Chamfer distance straight from its definition.
double chamfer_distance(const Points& a, const Points& b);

}  // namespace rigid_refine::reference
