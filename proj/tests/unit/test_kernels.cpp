#include <doctest.h>

#include <atomic>
#include <stdexcept>
#include <vector>

#include "oracles.hpp"
#include "rigid_refine/kernels.hpp"
#include "rigid_refine/reference.hpp"

using namespace rigid_refine;

TEST_CASE("serial and parallel nearest neighbors are bitwise identical") {
  oracle::Gen g(70);
  for (int trial = 0; trial < 5; ++trial) {
    const Points q = oracle::random_points(g, 700), r = oracle::random_points(g, 900);
    const kernels::NeighborResult s = kernels::nearest_neighbors(q, r, Execution::serial);
    const kernels::NeighborResult p = kernels::nearest_neighbors(q, r, Execution::parallel);
    CHECK(s.index == p.index);
    CHECK(s.squared_distance == p.squared_distance);
    CHECK(kernels::chamfer_distance(q, r, Execution::serial) == kernels::chamfer_distance(q, r, Execution::parallel));
  }
}

TEST_CASE("kernels agree with the serial reference implementation") {
  oracle::Gen g(71);
  for (int trial = 0; trial < 5; ++trial) {
    const Points q = oracle::random_points(g, 300 + trial), r = oracle::random_points(g, 250);
    const kernels::NeighborResult k = kernels::nearest_neighbors(q, r);
    CHECK(k.index == reference::nearest_neighbors(q, r));
    for (Eigen::Index i = 0; i < q.cols(); ++i) {
      CHECK(k.squared_distance[i] == doctest::Approx(oracle::nearest_sq(q.col(i), r)).epsilon(1e-14));
    }
    const double ref = reference::chamfer_distance(q, r);
    CHECK(kernels::chamfer_distance(q, r) == doctest::Approx(ref).epsilon(1e-13));
    CHECK(ref == doctest::Approx(oracle::chamfer(q, r)).epsilon(1e-13));
  }
}

TEST_CASE("nearest neighbor ties resolve to the lowest index") {
  Points r(3, 4);
  r << 1, -1, 1, 0, 0, 0, 0, 5, 0, 0, 0, 0;
  const Points q = Points::Zero(3, 1);
  CHECK(kernels::nearest_neighbors(q, r, Execution::serial).index[0] == 0);
  CHECK(kernels::nearest_neighbors(q, r, Execution::parallel).index[0] == 0);
  CHECK(reference::nearest_neighbors(q, r)[0] == 0);
}

TEST_CASE("for_each_index visits every index once") {
  for (Execution exec : {Execution::serial, Execution::parallel}) {
    std::vector<std::atomic<int>> hits(1000);
    kernels::for_each_index(hits.size(), exec, [&](std::size_t i) { ++hits[i]; });
    for (const auto& h : hits) CHECK(h.load() == 1);
  }
}

TEST_CASE("for_each_index rethrows the lowest failing index") {
  for (Execution exec : {Execution::serial, Execution::parallel}) {
    try {
      kernels::for_each_index(100, exec, [](std::size_t i) {
        if (i == 17 || i == 60) throw std::runtime_error(std::to_string(i));
      });
      FAIL("expected an exception");
    } catch (const std::runtime_error& e) {
      CHECK(std::string(e.what()) == "17");
    }
  }
}

TEST_CASE("thread cap can be set and restored") {
  kernels::set_max_threads(1);
  CHECK(kernels::max_threads() == 1);
  kernels::set_max_threads(0);
  CHECK(kernels::max_threads() >= 1);
}
