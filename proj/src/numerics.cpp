#include "mpqkd/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mpqkd {

ScalarOptimum golden_section_minimize(const std::function<double(double)>& f, double lo, double hi,
                                      double tol) {
  if (!(lo <= hi)) throw std::invalid_argument("golden_section_minimize: empty bracket");
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;

  ScalarOptimum best{lo, f(lo)};
  const double f_hi = f(hi);
  if (f_hi < best.value) best = {hi, f_hi};

  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tol) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
    if (fc < best.value) best = {c, fc};
    if (fd < best.value) best = {d, fd};
  }
  return best;
}

ScalarOptimum scan_then_golden_minimize(const std::function<double(double)>& f, double lo, double hi,
                                        int points, double tol) {
  if (points < 2) throw std::invalid_argument("scan_then_golden_minimize: need >= 2 points");
  const double step = (hi - lo) / (points - 1);
  int best_index = 0;
  double best_value = f(lo);
  for (int i = 1; i < points; ++i) {
    const double v = f(lo + step * i);
    if (v < best_value) {
      best_value = v;
      best_index = i;
    }
  }
  const double a = lo + step * std::max(0, best_index - 1);
  const double b = lo + step * std::min(points - 1, best_index + 1);
  ScalarOptimum refined = golden_section_minimize(f, a, b, tol);
  if (best_value < refined.value) refined = {lo + step * best_index, best_value};
  return refined;
}

double bisect_root(const std::function<double(double)>& f, double lo, double hi, double tol) {
  double f_lo = f(lo);
  const double f_hi = f(hi);
  if (f_lo == 0.0) return lo;
  if (f_hi == 0.0) return hi;
  if ((f_lo > 0.0) == (f_hi > 0.0)) throw std::invalid_argument("bisect_root: no sign change");
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = f(mid);
    if ((f_mid > 0.0) == (f_lo > 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace mpqkd
