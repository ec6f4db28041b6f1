#pragma once

// Numerical defaults shared by every solver, and the deterministic worker
// pool used for assembly rows, lambda grids and parameter sweeps.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

#include "betacrit/errors.hpp"

namespace betacrit {

/// Defaults table. Every CLI numerics key maps onto one field here.
struct Numerics {
  int m = 400;                 // Nystrom nodes on supp V
  int panel_order = 8;         // Gauss-Legendre points per panel
  double tol = 1e-8;           // eigenvalue relative tolerance
  int max_iterations = 20000;  // power-iteration cap
  int decade_lo = 2;           // lambda_j = -10^{-j}, j = decade_lo..decade_hi
  int decade_hi = 7;
  int max_sector = 2;          // sectors l = 0..max_sector on the exterior ball
  double mesh = 1e-3;          // finite-volume cell size
  std::vector<double> r_max{}; // empty: chosen from the potential support
  double bisection_tol = 1e-10; // relative tolerance of beta / lambda bisection
  double bounded_growth = 0.02;
  double divergent_growth = 0.05;
  int threads = 1;

  std::vector<double> lambda_grid() const {
    std::vector<double> g;
    for (int j = decade_lo; j <= decade_hi; ++j) g.push_back(-std::pow(10.0, -j));
    return g;
  }

  void check() const {
    if (m < 1) throw ValidationError("numerics.m", "must be >= 1");
    if (panel_order < 1) throw ValidationError("numerics.panel_order", "must be >= 1");
    if (!(tol > 0.0)) throw ValidationError("numerics.tol", "must be > 0");
    if (max_iterations < 1) throw ValidationError("numerics.max_iterations", "must be >= 1");
    if (decade_hi < decade_lo) throw ValidationError("numerics.lambda_decades", "empty decade range");
    if (max_sector < 0) throw ValidationError("numerics.max_sector", "must be >= 0");
    if (!(mesh > 0.0)) throw ValidationError("numerics.mesh", "must be > 0");
    for (double r : r_max)
      if (!(r > 0.0)) throw ValidationError("numerics.r_max", "must be > 0");
    if (!(bisection_tol > 0.0)) throw ValidationError("numerics.bisection_tol", "must be > 0");
    if (!(bounded_growth > 0.0) || !(divergent_growth >= bounded_growth))
      throw ValidationError("numerics.growth_thresholds", "need 0 < bounded <= divergent");
    if (threads < 1) throw ValidationError("threads", "must be >= 1");
  }
};

/// Runs body(i) for i in [0, n) on up to `threads` workers in contiguous
/// blocks. Each index is handled exactly once and callers write to slot i
/// only, so results do not depend on the thread count. The exception of the
/// lowest failing block is rethrown.
template <class Body>
void parallel_for(std::size_t n, int threads, Body&& body) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, threads)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      const std::size_t lo = n * w / workers, hi = n * (w + 1) / workers;
      try {
        for (std::size_t i = lo; i < hi; ++i) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

} // namespace betacrit
