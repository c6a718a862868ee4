#include "mpqkd/keyrate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "mpqkd/numerics.hpp"

namespace mpqkd {

namespace {

// -p log2(p / q), zero when p == 0.
double entropy_term(double p, double q) {
  if (p <= 0.0) return 0.0;
  return -p * std::log2(p / q);
}

}  // namespace

double binary_entropy(double x) {
  if (!(x >= 0.0 && x <= 1.0)) {
    std::ostringstream msg;
    msg << "binary_entropy: argument " << x << " outside [0, 1]";
    throw std::domain_error(msg.str());
  }
  return entropy_term(x, 1.0) + entropy_term(1.0 - x, 1.0);
}

void JointErrorModel::validate(double tol) const {
  const std::pair<const char*, double> cells[] = {
      {"both (a)", both()},
      {"bit-only (e_b - a)", bit_only()},
      {"phase-only (e_p - a)", phase_only()},
      {"neither (1 + a - e_b - e_p)", neither()},
  };
  for (const auto& [name, value] : cells) {
    if (value < -tol || value > 1.0 + tol) {
      std::ostringstream msg;
      msg << "joint error model cell " << name << " = " << value << " is outside [0, 1]";
      throw std::domain_error(msg.str());
    }
  }
}

double cond_entropy(const JointErrorModel& m) {
  m.validate();
  const double no_bit = 1.0 - m.e_b;
  return entropy_term(std::max(0.0, m.neither()), no_bit) +
         entropy_term(std::max(0.0, m.phase_only()), no_bit) +
         entropy_term(std::max(0.0, m.bit_only()), m.e_b) + entropy_term(std::max(0.0, m.both()), m.e_b);
}

std::string_view to_string(RateMode mode) {
  return mode == RateMode::WithMutualInfo ? "with-mi" : "without-mi";
}

std::string_view to_string(CorrelationPolicy policy) {
  return policy == CorrelationPolicy::LowerEndpoint ? "lower" : "worst";
}

CorrelationRange correlation_range(const ErrorRelation& relation, double e_b, double e_p) {
  const double feasible_lo = std::max(0.0, e_b + e_p - 1.0);
  const double feasible_hi = std::min(e_b, e_p);
  const double lo = std::max(relation.a_lo_coeff() * e_b, feasible_lo);
  const double hi = std::min(relation.a_hi_coeff() * e_b, feasible_hi);
  if (lo > hi + 1e-12) {
    std::ostringstream msg;
    msg << "empty correlation interval at e_b=" << e_b << ", e_p=" << e_p << ": [" << lo << ", " << hi
        << "]";
    throw std::domain_error(msg.str());
  }
  return {lo, std::max(lo, hi)};
}

double phase_entropy(const ErrorRelation& relation, double e_b, double e_p, RateMode mode,
                     CorrelationPolicy policy) {
  if (mode == RateMode::WithoutMutualInfo) return binary_entropy(e_p);
  const CorrelationRange range = correlation_range(relation, e_b, e_p);
  if (policy == CorrelationPolicy::LowerEndpoint) return cond_entropy({e_b, e_p, range.lo});
  const ScalarOptimum worst = golden_section_minimize(
      [&](double a) { return -cond_entropy({e_b, e_p, a}); }, range.lo, range.hi, 1e-10);
  return -worst.value;
}

double key_rate(const ErrorRelation& relation, double e_b, RateMode mode, CorrelationPolicy policy) {
  if (!(e_b >= 0.0 && e_b <= 0.5)) throw std::domain_error("key_rate: e_b must lie in [0, 1/2]");
  // The bound only caps e_p; beyond 1/2 the entropy would fall again.
  const double e_p = std::clamp(relation.bound(e_b), 0.0, 0.5);
  return 1.0 - binary_entropy(e_b) - phase_entropy(relation, e_b, e_p, mode, policy);
}

ThresholdResult threshold(const ErrorRelation& relation, RateMode mode, CorrelationPolicy policy) {
  auto rate = [&](double e_b) { return key_rate(relation, e_b, mode, policy); };
  constexpr int kGrid = 1000;
  const double step = 0.5 / kGrid;

  std::vector<double> rates(kGrid + 1);
  for (int i = 0; i <= kGrid; ++i) rates[i] = rate(step * i);
  if (!(rates[0] > 0.0)) throw std::domain_error("threshold: key rate at e_b = 0 is not positive");

  int first = -1;
  int changes = 0;
  for (int i = 0; i < kGrid; ++i) {
    if ((rates[i] > 0.0) != (rates[i + 1] > 0.0)) {
      ++changes;
      if (first < 0) first = i;
    }
  }
  if (first < 0) {
    const auto [lo, hi] = std::minmax_element(rates.begin(), rates.end());
    std::ostringstream msg;
    msg << "threshold: no sign change on (0, 1/2); rates span [" << *lo << ", " << *hi << "]";
    throw std::runtime_error(msg.str());
  }
  return {bisect_root(rate, step * first, step * (first + 1), 1e-8), changes};
}

}  // namespace mpqkd
