#include "mpqkd/channel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "mpqkd/numerics.hpp"

namespace mpqkd {

std::string_view to_string(Protocol p) {
  switch (p) {
    case Protocol::BB84: return "bb84";
    case Protocol::FourStateSARG04: return "sarg4";
    case Protocol::SixStateSARG04: return "sarg6";
    case Protocol::RRDPS: return "rrdps";
  }
  return "unknown";
}

std::optional<Protocol> parse_protocol(std::string_view name) {
  for (Protocol p : {Protocol::BB84, Protocol::FourStateSARG04, Protocol::SixStateSARG04,
                     Protocol::RRDPS}) {
    if (to_string(p) == name) return p;
  }
  return std::nullopt;
}

std::string_view to_string(DecoyMode mode) {
  return mode == DecoyMode::Infinite ? "infinite" : "finite";
}

void ChannelParams::validate() const {
  auto fail = [](const char* what) { throw std::invalid_argument(what); };
  if (!(eta_d > 0.0 && eta_d <= 1.0)) fail("eta_d must lie in (0, 1]");
  if (!(p_dark >= 0.0 && p_dark < 1.0)) fail("p_dark must lie in [0, 1)");
  if (!(alpha_db_per_km > 0.0) || !std::isfinite(alpha_db_per_km)) fail("alpha_db_per_km must be positive");
  if (!(e_d >= 0.0 && e_d < 0.5)) fail("e_d must lie in [0, 1/2)");
  if (!(f_ec >= 1.0) || !std::isfinite(f_ec)) fail("f_ec must be at least 1");
  if (block_length < 2) fail("block_length must be at least 2");
}

double ChannelParams::transmittance(double distance_km) const {
  return eta_d * std::pow(10.0, -alpha_db_per_km * distance_km / 10.0);
}

YieldError yield_error(Protocol protocol, int n, double distance_km, const ChannelParams& ch) {
  if (n < 0) throw std::invalid_argument("yield_error: photon number must be non-negative");
  if (!(distance_km >= 0.0)) throw std::invalid_argument("yield_error: distance must be non-negative");

  // 1 - (1 - eta)^n without cancellation for tiny eta.
  const double eta = ch.transmittance(distance_km);
  const double eta_n = n == 0 ? 0.0 : -std::expm1(n * std::log1p(-eta));
  const double dark = (1.0 - eta_n) * ch.p_dark;
  double errors = eta_n * ch.e_d + 0.5 * dark;

  double yield = 0.0;
  double error_weight = 0.0;  // e_b = errors / error_weight
  switch (protocol) {
    case Protocol::BB84:
      yield = 0.5 * (eta_n + dark);
      error_weight = 2.0 * yield;
      break;
    case Protocol::RRDPS: {
      const double L = ch.block_length;
      yield = (eta_n + dark * L) / (2.0 * L);
      errors = eta_n * ch.e_d + 0.5 * dark * L;
      error_weight = 2.0 * L * yield;
      break;
    }
    case Protocol::FourStateSARG04:
      yield = 0.5 * (eta_n * (ch.e_d + 0.5) + dark);
      error_weight = 2.0 * yield;
      break;
    case Protocol::SixStateSARG04:
      yield = (eta_n * (ch.e_d + 0.5) + dark) / 3.0;
      error_weight = 3.0 * yield;
      break;
  }
  // With no clicks at all the error rate is taken as 1/2.
  return {yield, yield > 0.0 ? errors / error_weight : 0.5};
}

int photon_cutoff(double mu) {
  return static_cast<int>(std::ceil(mu + 10.0 * std::sqrt(mu) + 20.0));
}

std::vector<YieldError> yield_table(Protocol protocol, double distance_km, const ChannelParams& ch,
                                    int n_max) {
  std::vector<YieldError> table;
  table.reserve(n_max + 1);
  for (int n = 0; n <= n_max; ++n) table.push_back(yield_error(protocol, n, distance_km, ch));
  return table;
}

PoissonGains poisson_gains(double mu, std::span<const YieldError> yields) {
  if (!(mu >= 0.0)) throw std::invalid_argument("poisson_gains: intensity must be non-negative");
  PoissonGains g{std::vector<double>(yields.size()), 0.0, 0.0};
  double weight = std::exp(-mu);
  double errors = 0.0;
  for (std::size_t n = 0; n < yields.size(); ++n) {
    if (n > 0) weight *= mu / static_cast<double>(n);
    g.per_photon[n] = weight * yields[n].yield;
    g.total += g.per_photon[n];
    errors += g.per_photon[n] * yields[n].error;
  }
  g.error_rate = g.total > 0.0 ? errors / g.total : 0.0;
  return g;
}

Measurement simulate_measurement(Protocol protocol, double intensity, double distance_km,
                                 const ChannelParams& ch) {
  const auto table = yield_table(protocol, distance_km, ch, photon_cutoff(intensity));
  const PoissonGains g = poisson_gains(intensity, table);
  return {intensity, g.total, g.error_rate};
}

DecoyEstimate finite_decoy_bounds(const Measurement& signal, const Measurement& weak,
                                  const std::optional<Measurement>& weakest, double vacuum_yield) {
  const double mu = signal.intensity;
  const double nu = weak.intensity;
  const double y0 = vacuum_yield;
  if (!(mu > nu && nu > 0.0)) throw std::invalid_argument("finite_decoy_bounds: need signal > weak > 0");
  if (weakest && !(nu > weakest->intensity && weakest->intensity > 0.0)) {
    throw std::invalid_argument("finite_decoy_bounds: need weak > weakest > 0");
  }

  const double q_mu = signal.gain;
  const double q_nu = weak.gain;
  const double eq_nu = std::exp(nu) * weak.error_rate * q_nu;

  DecoyEstimate est;
  const double y1 = mu / (mu * nu - nu * nu) *
                    (std::exp(nu) * q_nu - std::exp(mu) * q_mu * nu * nu / (mu * mu) -
                     (mu * mu - nu * nu) / (mu * mu) * y0);
  est.usable = y1 > 0.0;
  est.y1_lower = std::clamp(y1, 0.0, 1.0);
  if (est.usable) est.eb1_upper = std::clamp((eq_nu - y0 / 2.0) / (nu * y1), 0.0, 1.0);

  if (weakest) {
    const double om = weakest->intensity;
    const double q_om = weakest->gain;
    const double y2 = 2.0 / (mu * nu * om * (mu - nu) * (mu - om) * (nu - om)) *
                      (mu * om * (mu * mu - om * om) * std::exp(nu) * q_nu -
                       mu * nu * (mu * mu - nu * nu) * std::exp(om) * q_om -
                       nu * om * (nu * nu - om * om) * std::exp(mu) * q_mu +
                       (mu * mu * mu * (nu - om) + nu * nu * nu * (om - mu) + om * om * om * (mu - nu)) * y0);
    est.y2_lower = std::clamp(y2, 0.0, 1.0);
    est.eb2_upper = 1.0;
    if (y2 > 0.0) {
      const double numer = om * eq_nu - nu * std::exp(om) * weakest->error_rate * q_om + (nu - om) * y0 / 2.0;
      est.eb2_upper = std::clamp(2.0 / (nu * om * (nu - om) * y2) * numer, 0.0, 1.0);
    }
  }
  return est;
}

RelationSet::RelationSet() {
  const ProtocolSpec six = build_protocol(SargVariant::SixState);
  const ProtocolSpec four = build_protocol(SargVariant::FourState);
  for (int nu = 1; nu <= six.max_photons(); ++nu) six_.push_back(ErrorRelation::derive(six, nu));
  for (int nu = 1; nu <= four.max_photons(); ++nu) four_.push_back(ErrorRelation::derive(four, nu));
}

const ErrorRelation& RelationSet::get(SargVariant variant, int photons) const {
  const auto& list = variant == SargVariant::SixState ? six_ : four_;
  if (photons < 1 || photons > static_cast<int>(list.size())) {
    std::ostringstream msg;
    msg << "no " << to_string(variant) << " relation for " << photons << " photons";
    throw std::out_of_range(msg.str());
  }
  return list[photons - 1];
}

namespace {

// Photon components that carry key, per protocol.
int distillable_photons(Protocol p) {
  switch (p) {
    case Protocol::BB84: return 1;
    case Protocol::FourStateSARG04: return 2;
    case Protocol::SixStateSARG04: return 4;
    case Protocol::RRDPS: return 4;
  }
  return 0;
}

}  // namespace

RateModel::RateModel(ChannelParams ch, RateOptions options, std::shared_ptr<const RelationSet> relations)
    : ch_(ch), options_(options), relations_(std::move(relations)) {
  ch_.validate();
  if (!(options_.weak_intensity > 0.0 && options_.weak_intensity < kMuMax)) {
    throw std::invalid_argument("weak decoy intensity must lie in (0, 1.5)");
  }
  if (!relations_) relations_ = std::make_shared<const RelationSet>();
}

double RateModel::component_yield(Protocol protocol, int n, double e_b) const {
  if (!(e_b >= 0.0 && e_b < 0.5)) return 0.0;  // nothing to distill at or beyond 1/2
  switch (protocol) {
    case Protocol::BB84:
      return 1.0 - binary_entropy(e_b);
    case Protocol::RRDPS:
      return 1.0 - binary_entropy(std::min(0.5, n / (ch_.block_length - 1.0)));
    case Protocol::FourStateSARG04:
    case Protocol::SixStateSARG04: {
      const SargVariant v =
          protocol == Protocol::SixStateSARG04 ? SargVariant::SixState : SargVariant::FourState;
      const ErrorRelation& rel = relations_->get(v, n);
      const double e_p = std::clamp(rel.bound(e_b), 0.0, 0.5);
      return 1.0 - phase_entropy(rel, e_b, e_p, options_.mode, options_.policy);
    }
  }
  return 0.0;
}

double RateModel::rate_infinite_decoy(Protocol protocol, double mu, double distance_km) const {
  if (!(mu > 0.0)) throw std::invalid_argument("signal intensity must be positive");
  const auto table = yield_table(protocol, distance_km, ch_, photon_cutoff(mu));
  const PoissonGains g = poisson_gains(mu, table);
  double r = g.per_photon[0];
  for (int n = 1; n <= distillable_photons(protocol); ++n) {
    r += g.per_photon[n] * component_yield(protocol, n, table[n].error);
  }
  return r - g.total * ch_.f_ec * binary_entropy(std::min(0.5, g.error_rate));
}

double RateModel::rate_finite_decoy(Protocol protocol, double mu, double distance_km) const {
  const double nu = options_.weak_intensity;
  if (!(mu > nu)) throw std::invalid_argument("signal intensity must exceed the weak decoy intensity");
  const Measurement signal = simulate_measurement(protocol, mu, distance_km, ch_);
  const Measurement weak = simulate_measurement(protocol, nu, distance_km, ch_);
  const double y0 = simulate_measurement(protocol, 0.0, distance_km, ch_).gain;
  const DecoyEstimate est = finite_decoy_bounds(signal, weak, std::nullopt, y0);

  const double leak = signal.gain * ch_.f_ec * binary_entropy(std::min(0.5, signal.error_rate));
  if (!est.usable) return -leak;
  const double q1 = std::exp(-mu) * mu * est.y1_lower;
  return std::exp(-mu) * y0 + q1 * component_yield(protocol, 1, est.eb1_upper) - leak;
}

double RateModel::rate(Protocol protocol, DecoyMode mode, double mu, double distance_km) const {
  return mode == DecoyMode::Infinite ? rate_infinite_decoy(protocol, mu, distance_km)
                                     : rate_finite_decoy(protocol, mu, distance_km);
}

MuOptimum RateModel::optimize_mu(Protocol protocol, double distance_km, DecoyMode mode) const {
  constexpr int kGrid = 60;
  const double lo = mode == DecoyMode::Infinite ? kMuMin : options_.weak_intensity * 1.01;
  const double ratio = std::log(kMuMax / lo) / (kGrid - 1);
  auto at = [&](double mu) { return rate(protocol, mode, mu, distance_km); };

  std::vector<double> grid(kGrid);
  int best = 0;
  double best_rate = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < kGrid; ++i) {
    grid[i] = i + 1 == kGrid ? kMuMax : lo * std::exp(ratio * i);
    const double r = at(grid[i]);
    if (r > best_rate) {
      best_rate = r;
      best = i;
    }
  }
  const double a = grid[std::max(0, best - 1)];
  const double b = grid[std::min(kGrid - 1, best + 1)];
  const ScalarOptimum refined = golden_section_minimize([&](double mu) { return -at(mu); }, a, b, 1e-6);
  if (-refined.value > best_rate) return {refined.argument, -refined.value};
  return {grid[best], best_rate};
}

DistanceLimit RateModel::max_distance(Protocol protocol, DecoyMode mode) const {
  auto positive = [&](double d) { return optimize_mu(protocol, d, mode).rate > 0.0; };
  if (!positive(0.0)) throw std::domain_error("max_distance: key rate is not positive at 0 km");
  if (positive(kDistanceCapKm)) return {kDistanceCapKm, true};
  double lo = 0.0;
  double hi = kDistanceCapKm;
  while (hi - lo > 0.1) {
    const double mid = 0.5 * (lo + hi);
    (positive(mid) ? lo : hi) = mid;
  }
  return {lo, false};
}

}  // namespace mpqkd
