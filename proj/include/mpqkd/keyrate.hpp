#pragma once

#include <string_view>

#include "mpqkd/bounds.hpp"

namespace mpqkd {

/// H(x) = -x log2 x - (1-x) log2(1-x), with 0 log 0 = 0. Rejects x outside [0, 1].
double binary_entropy(double x);

/// Joint law of (bit flip, phase flip) with P(both) = a.
struct JointErrorModel {
  double e_b;
  double e_p;
  double a;

  double both() const { return a; }
  double bit_only() const { return e_b - a; }
  double phase_only() const { return e_p - a; }
  double neither() const { return 1.0 + a - e_b - e_p; }

  /// Throws std::domain_error naming the first negative cell.
  void validate(double tol = 1e-12) const;
};

/// H(e_p | e_b) of the joint model.
double cond_entropy(const JointErrorModel& model);

enum class RateMode { WithMutualInfo, WithoutMutualInfo };

// Which a inside [a_lo*e_b, a_hi*e_b] (clipped to the feasible cell region)
// enters H(e_p|e_b) in WithMutualInfo mode.
enum class CorrelationPolicy {
  LowerEndpoint,  // a = a_lo*e_b; reproduces the published thresholds
  WorstCase,      // a maximizing H(e_p|e_b) over the interval
};

std::string_view to_string(RateMode mode);
std::string_view to_string(CorrelationPolicy policy);

/// Feasible a range for (e_b, e_p) intersected with the relation's interval.
struct CorrelationRange {
  double lo;
  double hi;
};
CorrelationRange correlation_range(const ErrorRelation& relation, double e_b, double e_p);

/// H*(e_p|e_b) used in the key rate for a given bit error and phase-error bound.
double phase_entropy(const ErrorRelation& relation, double e_b, double e_p, RateMode mode,
                     CorrelationPolicy policy = CorrelationPolicy::LowerEndpoint);

/// r = 1 - H(e_b) - H*(e_p|e_b) with e_p = relation.bound(e_b). Not clamped.
double key_rate(const ErrorRelation& relation, double e_b, RateMode mode,
                CorrelationPolicy policy = CorrelationPolicy::LowerEndpoint);

struct ThresholdResult {
  double e_b;
  int sign_changes;  // on the scan grid; > 1 means the smallest root was taken
};

/// Smallest root of key_rate in (0, 1/2): 1000-point scan, then bisection to 1e-8.
ThresholdResult threshold(const ErrorRelation& relation, RateMode mode,
                          CorrelationPolicy policy = CorrelationPolicy::LowerEndpoint);

}  // namespace mpqkd
