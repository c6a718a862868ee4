#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "mpqkd/keyrate.hpp"

namespace mpqkd {

enum class Protocol { BB84, FourStateSARG04, SixStateSARG04, RRDPS };

/// CLI names: bb84, sarg4, sarg6, rrdps.
std::string_view to_string(Protocol p);
std::optional<Protocol> parse_protocol(std::string_view name);

struct ChannelParams {
  double eta_d = 0.43;            // detector efficiency
  double p_dark = 1e-7;           // dark count probability per pulse
  double alpha_db_per_km = 0.2;   // fibre loss
  double e_d = 0.005;             // misalignment error rate
  double f_ec = 1.16;             // error-correction inefficiency
  int block_length = 10;          // RRDPS pulses per block

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
  /// eta_d * 10^(-alpha D / 10)
  double transmittance(double distance_km) const;
};

struct YieldError {
  double yield;
  double error;
};

/// n-photon yield and bit error rate when Eve does not interfere.
YieldError yield_error(Protocol protocol, int n, double distance_km, const ChannelParams& ch);

/// Truncation point mu + 10 sqrt(mu) + 20 for Poisson sums.
int photon_cutoff(double mu);

std::vector<YieldError> yield_table(Protocol protocol, double distance_km, const ChannelParams& ch,
                                    int n_max);

struct PoissonGains {
  std::vector<double> per_photon;  // Q_n
  double total;                    // Q_mu
  double error_rate;               // E_mu
};

/// Q_n = e^-mu mu^n / n! Y_n for n = 0..yields.size()-1.
PoissonGains poisson_gains(double mu, std::span<const YieldError> yields);

/// Observed gain and QBER at one intensity (intensity 0 is the vacuum decoy).
struct Measurement {
  double intensity;
  double gain;
  double error_rate;
};

Measurement simulate_measurement(Protocol protocol, double intensity, double distance_km,
                                 const ChannelParams& ch);

struct DecoyEstimate {
  double y1_lower = 0.0;
  double eb1_upper = 1.0;
  bool usable = false;  // y1_lower > 0
  std::optional<double> y2_lower;
  std::optional<double> eb2_upper;
};

/// Analytic decoy bounds. Three intensities (signal > weak > 0) give the
/// single-photon bounds; passing `weakest` (weak > weakest > 0) adds the
/// two-photon bounds.
DecoyEstimate finite_decoy_bounds(const Measurement& signal, const Measurement& weak,
                                  const std::optional<Measurement>& weakest, double vacuum_yield);

/// Error relations of both SARG04 variants, derived once and shared.
class RelationSet {
 public:
  RelationSet();
  const ErrorRelation& get(SargVariant variant, int photons) const;

 private:
  std::vector<ErrorRelation> six_;
  std::vector<ErrorRelation> four_;
};

enum class DecoyMode { Infinite, Finite };

std::string_view to_string(DecoyMode mode);

struct RateOptions {
  RateMode mode = RateMode::WithMutualInfo;
  CorrelationPolicy policy = CorrelationPolicy::LowerEndpoint;
  double weak_intensity = 0.1;
};

struct MuOptimum {
  double mu;
  double rate;
};

struct DistanceLimit {
  double distance_km;
  bool reached_cap;  // rate still positive at the search cap
};

class RateModel {
 public:
  static constexpr double kMuMin = 1e-3;
  static constexpr double kMuMax = 1.5;
  static constexpr double kDistanceCapKm = 1000.0;

  explicit RateModel(ChannelParams ch, RateOptions options = {},
                     std::shared_ptr<const RelationSet> relations = nullptr);

  const ChannelParams& channel() const { return ch_; }
  const RateOptions& options() const { return options_; }

  double rate_infinite_decoy(Protocol protocol, double mu, double distance_km) const;
  double rate_finite_decoy(Protocol protocol, double mu, double distance_km) const;
  double rate(Protocol protocol, DecoyMode mode, double mu, double distance_km) const;

  /// 60-point log scan of mu, then golden-section refinement to 1e-6.
  MuOptimum optimize_mu(Protocol protocol, double distance_km, DecoyMode mode) const;

  /// Largest distance with a positive optimized rate, by bisection to 0.1 km.
  DistanceLimit max_distance(Protocol protocol, DecoyMode mode) const;

  /// Key-rate contribution per n-photon gain: 1 - H*(e_p|e_b) at bit error e_b.
  double component_yield(Protocol protocol, int n, double e_b) const;

 private:
  ChannelParams ch_;
  RateOptions options_;
  std::shared_ptr<const RelationSet> relations_;
};

}  // namespace mpqkd
