#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mpqkd/matrix.hpp"
#include "mpqkd/protocol.hpp"

namespace mpqkd {

// Eve's attack on a nu-photon pulse keeps nu-1 photons and forwards one to Bob.
// Her operation is described by 2x2 blocks E^(u), one per x-basis input
// multi-index u of the kept photons, with her output fixed to <0_x...0_x|.
// The parameter vector stores the blocks back to back, each row-major:
//   nu=1: E                      (4 entries)
//   nu=2: E^(0), E^(1)           (8 entries)
//   nu=3: E^(00), E^(01), E^(10), E^(11)
//   nu=4: one block per Hamming weight of (u,v,s) (permutations share a block)
std::size_t eve_parameter_count(int photons);

/// Block index used for the multi-index `bits` (length photons-1).
std::size_t eve_block_index(int photons, std::span<const int> bits);

/// Unnormalized two-qubit state after the attack, Bob's inverse rotation and
/// the filter, summed over the protocol's rotations.
ComplexMatrix filtered_state(const ProtocolSpec& spec, int photons, std::span<const Complex> eve);

struct AttackProbabilities {
  double p_fil;
  double p_bit;  // P_X + P_Y
  double p_ph;   // P_Z + P_Y
  double p_y;
};

AttackProbabilities attack_probabilities(const ProtocolSpec& spec, int photons,
                                         std::span<const Complex> eve);

struct QuadraticForms {
  int photons;
  std::size_t dim;
  ComplexMatrix a_fil;
  ComplexMatrix a_bit;
  ComplexMatrix a_ph;
  ComplexMatrix a_y;
};

/// Recovers the four Hermitian forms by polarization of attack_probabilities.
QuadraticForms extract_forms(const ProtocolSpec& spec, int photons);

/// a^dagger M a
double quadratic_value(const ComplexMatrix& form, std::span<const Complex> a);

/// min{ y : x*A_bit + y*A_fil - A_ph >= 0 }, or nullopt when infeasible. x >= 0.
std::optional<double> y_of_x(const QuadraticForms& forms, double x);

struct BoundPoint {
  double x;
  double y;
  double value;  // x*e_b + y
};

/// Phase-error bound e_p <= min_x { x e_b + y(x) } together with the
/// correlation interval a in [a_lo*e_b, a_hi*e_b].
class ErrorRelation {
 public:
  static constexpr double kMaxSlope = 8.0;
  static constexpr int kScanPoints = 64;

  static ErrorRelation derive(const ProtocolSpec& spec, int photons);

  SargVariant variant() const { return variant_; }
  int photons() const { return forms_.photons; }
  const QuadraticForms& forms() const { return forms_; }

  double bound(double e_b) const { return optimum(e_b).value; }
  BoundPoint optimum(double e_b) const;
  std::optional<double> y_of_x(double x) const;

  double a_lo_coeff() const { return a_lo_; }
  double a_hi_coeff() const { return a_hi_; }

 private:
  ErrorRelation(SargVariant variant, QuadraticForms forms);

  SargVariant variant_;
  QuadraticForms forms_;
  GeneralizedEigenSolver fil_solver_;
  ProjectedNumerator ph_;
  ProjectedNumerator bit_;
  std::vector<std::optional<double>> scan_;  // y on the coarse slope grid
  double a_lo_ = 0.0;
  double a_hi_ = 0.0;
};

struct AttackSample {
  double e_b;
  double e_p;
  double a;
  double p_fil;
};

inline constexpr double kMinFilterProbability = 1e-12;

/// Conditional rates for a given parameter vector; nullopt if p_fil < 1e-12.
std::optional<AttackSample> sample_from_parameters(const ProtocolSpec& spec, int photons,
                                                   std::span<const Complex> eve);

/// Complex standard Gaussian parameters (E|a_i|^2 = 1) drawn from `seed`.
std::vector<Complex> random_attack_parameters(int photons, std::uint64_t seed);

/// Draws parameter vectors from one generator seeded with `seed` until p_fil >= 1e-12.
AttackSample random_attack_sample(const ProtocolSpec& spec, int photons, std::uint64_t seed);

/// An attack saturating the bound: a null vector of x*A_bit + y*A_fil - A_ph at
/// the optimum for `e_b`, chosen to maximize p_fil within that null space.
std::vector<Complex> certificate_attack(const ErrorRelation& relation, double e_b);

struct SoundnessReport {
  std::size_t samples = 0;
  double worst_bound_excess = -1.0;  // max e_p - bound(e_b)
  double worst_a_low_excess = -1.0;  // max a_lo*e_b - a
  double worst_a_high_excess = -1.0; // max a - a_hi*e_b
  double tightest_gap = 1.0;         // min bound(e_b) - e_p
};

/// Monte Carlo check of the relation against random attacks. Sample i uses
/// seed + i, so the report does not depend on `threads`.
SoundnessReport check_soundness(const ProtocolSpec& spec, const ErrorRelation& relation,
                                std::uint64_t seed, std::size_t samples, unsigned threads = 0);

}  // namespace mpqkd
