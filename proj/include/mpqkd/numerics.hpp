#pragma once

#include <functional>

namespace mpqkd {

struct ScalarOptimum {
  double argument;
  double value;
};

/// Golden-section minimization of a unimodal function on [lo, hi].
/// Stops once the bracket is narrower than `tol`. Returns the best point visited.
ScalarOptimum golden_section_minimize(const std::function<double(double)>& f, double lo, double hi,
                                      double tol);

/// Scans `points` evenly spaced samples of [lo, hi], then refines with golden
/// section between the neighbours of the best sample.
ScalarOptimum scan_then_golden_minimize(const std::function<double(double)>& f, double lo, double hi,
                                        int points, double tol);

/// Bisection for a sign change of f on [lo, hi]; f(lo) and f(hi) must differ in sign.
double bisect_root(const std::function<double(double)>& f, double lo, double hi, double tol);

}  // namespace mpqkd
