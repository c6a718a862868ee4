#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>

#include "mpqkd/channel.hpp"

using namespace mpqkd;

namespace {

const Protocol kProtocols[] = {Protocol::BB84, Protocol::FourStateSARG04, Protocol::SixStateSARG04,
                               Protocol::RRDPS};

std::shared_ptr<const RelationSet> shared_relations() {
  static const auto set = std::make_shared<const RelationSet>();
  return set;
}

const RateModel& default_model() {
  static const RateModel model(ChannelParams{}, RateOptions{}, shared_relations());
  return model;
}

// Poisson tail mass beyond n_max, summed directly.
double poisson_tail(double mu, int n_max) {
  double term = std::exp(-mu);
  for (int n = 1; n <= n_max; ++n) term *= mu / n;
  double tail = 0.0;
  for (int n = n_max + 1; n < n_max + 200; ++n) {
    term *= mu / n;
    tail += term;
  }
  return tail;
}

}  // namespace

TEST_CASE("protocol names round trip") {
  for (Protocol p : kProtocols) CHECK(parse_protocol(to_string(p)) == p);
  CHECK_FALSE(parse_protocol("bb85").has_value());
  CHECK(to_string(DecoyMode::Finite) == "finite");
}

TEST_CASE("channel parameter validation") {
  CHECK_NOTHROW(ChannelParams{}.validate());
  auto bad = [](auto mutate) {
    ChannelParams ch;
    mutate(ch);
    return ch;
  };
  CHECK_THROWS_AS(bad([](ChannelParams& c) { c.eta_d = 0.0; }).validate(), std::invalid_argument);
  CHECK_THROWS_AS(bad([](ChannelParams& c) { c.eta_d = 1.2; }).validate(), std::invalid_argument);
  CHECK_THROWS_AS(bad([](ChannelParams& c) { c.p_dark = 1.0; }).validate(), std::invalid_argument);
  CHECK_THROWS_AS(bad([](ChannelParams& c) { c.alpha_db_per_km = 0.0; }).validate(), std::invalid_argument);
  CHECK_THROWS_AS(bad([](ChannelParams& c) { c.e_d = 0.5; }).validate(), std::invalid_argument);
  CHECK_THROWS_AS(bad([](ChannelParams& c) { c.f_ec = 0.9; }).validate(), std::invalid_argument);
  CHECK_THROWS_AS(bad([](ChannelParams& c) { c.block_length = 1; }).validate(), std::invalid_argument);
  CHECK_THROWS_AS(RateModel(bad([](ChannelParams& c) { c.e_d = -0.1; }), {}, shared_relations()),
                  std::invalid_argument);
}

TEST_CASE("yield and error worked values") {
  const ChannelParams ch;
  const YieldError one = yield_error(Protocol::BB84, 1, 0.0, ch);
  CHECK(one.yield == doctest::Approx((0.43 + 0.57e-7) / 2.0).epsilon(1e-14));

  const YieldError vac = yield_error(Protocol::SixStateSARG04, 0, 123.0, ch);
  CHECK(vac.yield == doctest::Approx(1e-7 / 3.0).epsilon(1e-14));
  CHECK(vac.error == doctest::Approx(0.5));
  for (Protocol p : kProtocols) CHECK(yield_error(p, 0, 10.0, ch).error == doctest::Approx(0.5));
  CHECK(yield_error(Protocol::RRDPS, 0, 0.0, ch).yield == doctest::Approx(1e-7 / 2.0));
  CHECK(yield_error(Protocol::FourStateSARG04, 0, 0.0, ch).yield == doctest::Approx(1e-7 / 2.0));

  // 20 dB of fibre: eta = 0.43 / 100.
  CHECK(ch.transmittance(100.0) == doctest::Approx(0.0043).epsilon(1e-12));
  const double eta = ch.transmittance(100.0);
  const double eta2 = 1.0 - (1.0 - eta) * (1.0 - eta);
  const YieldError six2 = yield_error(Protocol::SixStateSARG04, 2, 100.0, ch);
  CHECK(six2.yield == doctest::Approx((eta2 * 0.505 + (1.0 - eta2) * 1e-7) / 3.0).epsilon(1e-12));
  CHECK(six2.error ==
        doctest::Approx((eta2 * 0.005 + 0.5 * (1.0 - eta2) * 1e-7) / (3.0 * six2.yield)).epsilon(1e-12));

  CHECK_THROWS(yield_error(Protocol::BB84, -1, 0.0, ch));
  CHECK_THROWS(yield_error(Protocol::BB84, 1, -5.0, ch));
}

TEST_CASE("yields and errors stay in range") {
  const ChannelParams ch;
  for (Protocol p : kProtocols) {
    for (double d = 0.0; d <= 400.0; d += 20.0) {
      for (int n = 0; n <= 30; ++n) {
        const YieldError y = yield_error(p, n, d, ch);
        CHECK(y.yield >= 0.0);
        CHECK(y.yield <= 1.0);
        CHECK(y.error >= 0.0);
        CHECK(y.error <= 0.5);
      }
    }
  }
}

TEST_CASE("many-photon error rate approaches the misalignment floor") {
  const ChannelParams ch;
  const double e_d = ch.e_d;
  CHECK(std::abs(yield_error(Protocol::BB84, 200, 100.0, ch).error - e_d) < 1e-6);
  CHECK(std::abs(yield_error(Protocol::RRDPS, 200, 100.0, ch).error - e_d) < 1e-6);
  // The SARG04 yields carry (e_d + 1/2) in the denominator.
  const double sarg_limit = e_d / (e_d + 0.5);
  CHECK(std::abs(yield_error(Protocol::FourStateSARG04, 200, 100.0, ch).error - sarg_limit) < 1e-6);
  CHECK(std::abs(yield_error(Protocol::SixStateSARG04, 200, 100.0, ch).error - sarg_limit) < 1e-6);
}

TEST_CASE("Poisson gains") {
  const std::vector<YieldError> unit = {{1.0, 0.5}, {1.0, 0.5}};
  const PoissonGains g = poisson_gains(0.1, unit);
  CHECK(g.total == doctest::Approx(std::exp(-0.1) * 1.1).epsilon(1e-14));
  CHECK(g.total == doctest::Approx(0.99532).epsilon(1e-5));
  CHECK(g.error_rate == doctest::Approx(0.5));

  for (double mu : {1e-3, 0.1, 0.5, 1.5}) {
    CHECK(photon_cutoff(mu) >= mu + 10.0 * std::sqrt(mu) + 20.0);
    CHECK(poisson_tail(mu, photon_cutoff(mu)) < 1e-12);
  }

  const ChannelParams ch;
  for (Protocol p : kProtocols) {
    for (double d : {0.0, 80.0, 250.0}) {
      const auto table = yield_table(p, d, ch, photon_cutoff(0.7));
      const PoissonGains pg = poisson_gains(0.7, table);
      double sum = 0.0;
      for (double q : pg.per_photon) sum += q;
      CHECK(std::abs(sum - pg.total) < 1e-12);
      CHECK(pg.error_rate * pg.total <= pg.total / 2.0 + 1e-18);
    }
  }
  CHECK_THROWS(poisson_gains(-1.0, unit));
}

TEST_CASE("decoy bounds on a noiseless linear channel") {
  const double eta = 1e-3;
  auto measure = [&](double intensity) {
    std::vector<YieldError> table;
    for (int n = 0; n <= photon_cutoff(intensity); ++n) table.push_back({n * eta, 0.0});
    const PoissonGains g = poisson_gains(intensity, table);
    return Measurement{intensity, g.total, g.error_rate};
  };
  const DecoyEstimate est = finite_decoy_bounds(measure(0.5), measure(0.1), std::nullopt, 0.0);
  CHECK(est.usable);
  CHECK(est.y1_lower <= eta);
  CHECK(est.y1_lower >= 0.95 * eta);
  CHECK_FALSE(est.y2_lower.has_value());
}

TEST_CASE("maximal errors propagate into the single-photon error bound") {
  const double y0 = 1e-4;
  auto measure = [&](double intensity) {
    std::vector<YieldError> table;
    for (int n = 0; n <= photon_cutoff(intensity); ++n) table.push_back({n == 0 ? y0 : 0.01 * n, 0.5});
    const PoissonGains g = poisson_gains(intensity, table);
    return Measurement{intensity, g.total, g.error_rate};
  };
  const DecoyEstimate est = finite_decoy_bounds(measure(0.5), measure(0.1), std::nullopt, y0);
  REQUIRE(est.usable);
  CHECK(est.eb1_upper >= 0.5);
  CHECK(est.eb1_upper <= 1.0);
}

TEST_CASE("decoy bound preconditions") {
  const Measurement a{0.5, 1e-3, 0.01};
  const Measurement b{0.1, 2e-4, 0.01};
  CHECK_THROWS(finite_decoy_bounds(b, a, std::nullopt, 0.0));
  CHECK_THROWS(finite_decoy_bounds(a, b, Measurement{0.2, 1e-4, 0.01}, 0.0));
  // An empty channel gives no usable estimate.
  const Measurement zero_mu{0.5, 0.0, 0.0};
  const Measurement zero_nu{0.1, 0.0, 0.0};
  const DecoyEstimate est = finite_decoy_bounds(zero_mu, zero_nu, std::nullopt, 0.0);
  CHECK_FALSE(est.usable);
  CHECK(est.y1_lower == 0.0);
}

TEST_CASE("four-intensity bounds at 50 km on the six-state channel") {
  const ChannelParams ch;
  const Protocol p = Protocol::SixStateSARG04;
  const double d = 50.0;
  const DecoyEstimate est = finite_decoy_bounds(
      simulate_measurement(p, 0.5, d, ch), simulate_measurement(p, 0.2, d, ch),
      simulate_measurement(p, 0.05, d, ch), simulate_measurement(p, 0.0, d, ch).gain);
  REQUIRE(est.y2_lower.has_value());
  const YieldError two = yield_error(p, 2, d, ch);
  CHECK(*est.y2_lower <= two.yield);
  CHECK(*est.y2_lower > 0.5 * two.yield);
  CHECK(*est.eb2_upper >= two.error);
}

TEST_CASE("decoy bounds are sound across distances and protocols") {
  const ChannelParams ch;
  for (Protocol p : kProtocols) {
    for (double d = 0.0; d <= 200.0; d += 25.0) {
      CAPTURE(d);
      const DecoyEstimate est = finite_decoy_bounds(
          simulate_measurement(p, 0.5, d, ch), simulate_measurement(p, 0.1, d, ch),
          simulate_measurement(p, 0.05, d, ch), simulate_measurement(p, 0.0, d, ch).gain);
      const YieldError one = yield_error(p, 1, d, ch);
      const YieldError two = yield_error(p, 2, d, ch);
      CHECK(est.usable);
      CHECK(est.y1_lower <= one.yield);
      CHECK(est.eb1_upper >= one.error);
      CHECK(*est.y2_lower <= two.yield);
      CHECK(*est.eb2_upper >= two.error);
    }
  }
}

TEST_CASE("relation set") {
  const RelationSet& set = *shared_relations();
  CHECK(set.get(SargVariant::SixState, 4).photons() == 4);
  CHECK(set.get(SargVariant::FourState, 2).variant() == SargVariant::FourState);
  CHECK_THROWS_AS(set.get(SargVariant::FourState, 3), std::out_of_range);
  CHECK_THROWS_AS(set.get(SargVariant::SixState, 0), std::out_of_range);
}

TEST_CASE("component yields") {
  const RateModel& m = default_model();
  CHECK(m.component_yield(Protocol::BB84, 1, 0.0) == doctest::Approx(1.0));
  CHECK(m.component_yield(Protocol::BB84, 1, 0.5) == 0.0);
  CHECK(m.component_yield(Protocol::RRDPS, 3, 0.02) == doctest::Approx(1.0 - binary_entropy(3.0 / 9.0)));
  CHECK(m.component_yield(Protocol::SixStateSARG04, 1, 0.0) == doctest::Approx(1.0));
  // Past its threshold a component still carries non-negative weight; the
  // error-correction cost is charged once, outside the components.
  CHECK(m.component_yield(Protocol::SixStateSARG04, 4, 0.02) >= 0.0);
  CHECK(m.component_yield(Protocol::SixStateSARG04, 2, 0.01) <
        m.component_yield(Protocol::SixStateSARG04, 1, 0.01));
}

TEST_CASE("infinite-decoy rate decomposes into its terms") {
  const RateModel& m = default_model();
  const ChannelParams& ch = m.channel();
  const double mu = 0.4;
  const double d = 60.0;
  const auto table = yield_table(Protocol::BB84, d, ch, photon_cutoff(mu));
  const PoissonGains g = poisson_gains(mu, table);
  const double expected = g.per_photon[0] + g.per_photon[1] * (1.0 - binary_entropy(table[1].error)) -
                          g.total * ch.f_ec * binary_entropy(g.error_rate);
  CHECK(m.rate_infinite_decoy(Protocol::BB84, mu, d) == doctest::Approx(expected).epsilon(1e-12));
  CHECK_THROWS(m.rate_infinite_decoy(Protocol::BB84, 0.0, d));
}

TEST_CASE("infinite decoy never loses to finite decoy") {
  const RateModel& m = default_model();
  for (Protocol p : kProtocols) {
    for (double mu : {0.2, 0.5, 1.0}) {
      for (double d = 0.0; d <= 200.0; d += 50.0) {
        CHECK(m.rate_infinite_decoy(p, mu, d) >= m.rate_finite_decoy(p, mu, d));
      }
    }
  }
  CHECK(m.rate_finite_decoy(Protocol::BB84, 0.5, 0.0) > 0.0);
  CHECK_THROWS(m.rate_finite_decoy(Protocol::BB84, 0.1, 0.0));
}

TEST_CASE("signal intensity optimization") {
  const RateModel& m = default_model();
  for (DecoyMode mode : {DecoyMode::Infinite, DecoyMode::Finite}) {
    const MuOptimum best = m.optimize_mu(Protocol::BB84, 50.0, mode);
    CHECK(best.mu <= RateModel::kMuMax);
    CHECK(best.mu >= (mode == DecoyMode::Infinite ? RateModel::kMuMin : 0.101) - 1e-12);
    CHECK(best.rate == doctest::Approx(m.rate(Protocol::BB84, mode, best.mu, 50.0)).epsilon(1e-12));
    for (double mu = 0.15; mu <= 1.5; mu += 0.05) CHECK(best.rate >= m.rate(Protocol::BB84, mode, mu, 50.0));
  }
  // Far beyond the cutoff every rate is negative and the best one is still returned.
  const MuOptimum dead = m.optimize_mu(Protocol::RRDPS, 400.0, DecoyMode::Infinite);
  CHECK(dead.rate < 0.0);
}

TEST_CASE("maximum distance") {
  const RateModel& m = default_model();
  const DistanceLimit six = m.max_distance(Protocol::SixStateSARG04, DecoyMode::Infinite);
  const DistanceLimit four = m.max_distance(Protocol::FourStateSARG04, DecoyMode::Infinite);
  CHECK_FALSE(six.reached_cap);
  CHECK(six.distance_km > four.distance_km);
  CHECK(m.optimize_mu(Protocol::SixStateSARG04, six.distance_km, DecoyMode::Infinite).rate > 0.0);
  CHECK(m.optimize_mu(Protocol::SixStateSARG04, six.distance_km + 0.1, DecoyMode::Infinite).rate <= 0.0);

  ChannelParams dark_free;
  dark_free.p_dark = 0.0;
  const RateModel clean(dark_free, {}, shared_relations());
  const DistanceLimit capped = clean.max_distance(Protocol::BB84, DecoyMode::Infinite);
  CHECK(capped.reached_cap);
  CHECK(capped.distance_km == RateModel::kDistanceCapKm);

  ChannelParams noisy;
  noisy.e_d = 0.3;
  const RateModel hopeless(noisy, {}, shared_relations());
  CHECK_THROWS_AS(hopeless.max_distance(Protocol::BB84, DecoyMode::Infinite), std::domain_error);
}

TEST_CASE("BB84 leads both SARG04 variants with one weak decoy") {
  const RateModel& m = default_model();
  const double cutoff = m.max_distance(Protocol::BB84, DecoyMode::Finite).distance_km;
  for (double d = 0.0; d <= cutoff; d += 10.0) {
    CAPTURE(d);
    const double bb84 = m.optimize_mu(Protocol::BB84, d, DecoyMode::Finite).rate;
    CHECK(bb84 > 0.0);
    CHECK(bb84 > m.optimize_mu(Protocol::FourStateSARG04, d, DecoyMode::Finite).rate);
    CHECK(bb84 > m.optimize_mu(Protocol::SixStateSARG04, d, DecoyMode::Finite).rate);
  }
}
