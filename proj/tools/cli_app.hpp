#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "mpqkd/channel.hpp"

namespace mpqkd::cli {

enum class Command { Bounds, Thresholds, Fig1, Fig2a, Fig2b };

struct RunConfig {
  Command command = Command::Thresholds;
  std::optional<Protocol> protocol;  // unset: every protocol the command covers
  std::optional<int> photons;        // unset: every photon number
  std::optional<RateMode> mode;      // unset: both modes
  CorrelationPolicy policy = CorrelationPolicy::LowerEndpoint;
  ChannelParams channel;
  double max_km = 300.0;
  double step_km = 5.0;
  double weak_intensity = 0.1;
  double eb_max = 0.15;
  double eb_step = 0.001;
  std::uint64_t seed = 1;
  std::string out;  // empty: standard output
};

/// Runs one command, writing CSV to `config.out` or `out`. Returns the exit status.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Parses argv (flags may sit before or after the subcommand) and runs it.
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mpqkd::cli
