#include "cli_app.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <vector>

namespace mpqkd::cli {

namespace {

std::string_view command_name(Command c) {
  switch (c) {
    case Command::Bounds: return "bounds";
    case Command::Thresholds: return "thresholds";
    case Command::Fig1: return "fig1";
    case Command::Fig2a: return "fig2a";
    case Command::Fig2b: return "fig2b";
  }
  return "unknown";
}

std::string num(double v, int digits = 9) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

// Shortest %g form that reads back to the same double.
std::string exact(double v) {
  for (int digits = 9; digits < 17; ++digits) {
    std::string s = num(v, digits);
    if (std::strtod(s.c_str(), nullptr) == v) return s;
  }
  return num(v, 17);
}

// Inclusive grid 0, step, 2*step, ... up to `max` (tolerating rounding at the end).
std::vector<double> grid(double max, double step) {
  const auto n = static_cast<long>(std::floor(max / step + 1e-9));
  std::vector<double> g;
  g.reserve(n + 1);
  for (long i = 0; i <= n; ++i) g.push_back(step * static_cast<double>(i));
  return g;
}

class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& os) : os_(os) {}

  void meta(std::string_view key, std::string_view value) { os_ << "# " << key << '=' << value << '\n'; }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os_ << (i ? "," : "") << cells[i];
    os_ << '\n';
  }

 private:
  std::ostream& os_;
};

void write_metadata(CsvWriter& csv, const RunConfig& c) {
  const ChannelParams& ch = c.channel;
  csv.meta("command", command_name(c.command));
  csv.meta("protocol", c.protocol ? to_string(*c.protocol) : "all");
  csv.meta("photons", c.photons ? std::to_string(*c.photons) : "all");
  csv.meta("mode", c.mode ? to_string(*c.mode) : "both");
  csv.meta("a_policy", to_string(c.policy));
  csv.meta("eta_d", exact(ch.eta_d));
  csv.meta("p_dark", exact(ch.p_dark));
  csv.meta("alpha_db_km", exact(ch.alpha_db_per_km));
  csv.meta("e_d", exact(ch.e_d));
  csv.meta("f_ec", exact(ch.f_ec));
  csv.meta("block_l", std::to_string(ch.block_length));
  csv.meta("max_km", exact(c.max_km));
  csv.meta("step_km", exact(c.step_km));
  csv.meta("weak_intensity", exact(c.weak_intensity));
  csv.meta("eb_max", exact(c.eb_max));
  csv.meta("eb_step", exact(c.eb_step));
  csv.meta("seed", std::to_string(c.seed));
}

std::vector<RateMode> modes_of(const RunConfig& c) {
  if (c.mode) return {*c.mode};
  return {RateMode::WithMutualInfo, RateMode::WithoutMutualInfo};
}

// SARG04 relations selected by --protocol/--photons; `fallback` when no protocol is given.
std::vector<std::pair<SargVariant, int>> sarg_curves(const RunConfig& c,
                                                     std::vector<SargVariant> fallback) {
  std::vector<SargVariant> variants = fallback;
  if (c.protocol) {
    if (*c.protocol == Protocol::SixStateSARG04) {
      variants = {SargVariant::SixState};
    } else if (*c.protocol == Protocol::FourStateSARG04) {
      variants = {SargVariant::FourState};
    } else {
      throw std::invalid_argument(std::string(command_name(c.command)) +
                                  " needs a SARG04 protocol (sarg4 or sarg6)");
    }
  }
  std::vector<std::pair<SargVariant, int>> curves;
  for (SargVariant v : variants) {
    const int max_nu = build_protocol(v).max_photons();
    if (c.photons && *c.photons > max_nu) {
      throw std::invalid_argument(std::string(to_string(v)) + " supports at most " +
                                  std::to_string(max_nu) + " photons");
    }
    for (int nu = 1; nu <= max_nu; ++nu) {
      if (!c.photons || *c.photons == nu) curves.emplace_back(v, nu);
    }
  }
  return curves;
}

void run_bounds(const RunConfig& c, CsvWriter& csv) {
  constexpr std::size_t kSpotSamples = 2000;
  const auto curves = sarg_curves(c, {SargVariant::SixState});
  std::vector<std::pair<std::pair<SargVariant, int>, ErrorRelation>> relations;
  for (const auto& key : curves) {
    const ProtocolSpec spec = build_protocol(key.first);
    relations.emplace_back(key, ErrorRelation::derive(spec, key.second));
    const SoundnessReport rep = check_soundness(spec, relations.back().second, c.seed, kSpotSamples, 1);
    std::ostringstream v;
    v << to_string(key.first) << " nu=" << key.second << " samples=" << rep.samples
      << " worst_bound_excess=" << num(rep.worst_bound_excess)
      << " worst_a_low_excess=" << num(rep.worst_a_low_excess)
      << " worst_a_high_excess=" << num(rep.worst_a_high_excess);
    csv.meta("soundness", v.str());
  }
  csv.row({"protocol", "photons", "e_b", "x_star", "y_star", "bound", "a_lo_coeff", "a_hi_coeff"});
  for (const auto& [key, rel] : relations) {
    for (double e_b : grid(c.eb_max, c.eb_step)) {
      const BoundPoint p = rel.optimum(e_b);
      csv.row({std::string(to_string(key.first)), std::to_string(key.second), num(e_b), num(p.x),
               num(p.y), num(p.value), num(rel.a_lo_coeff()), num(rel.a_hi_coeff())});
    }
  }
}

void run_thresholds(const RunConfig& c, CsvWriter& csv) {
  const auto curves = sarg_curves(c, {SargVariant::SixState, SargVariant::FourState});
  csv.row({"protocol", "photons", "mode", "threshold", "sign_changes"});
  for (const auto& [variant, nu] : curves) {
    const ErrorRelation rel = ErrorRelation::derive(build_protocol(variant), nu);
    for (RateMode m : modes_of(c)) {
      const ThresholdResult t = threshold(rel, m, c.policy);
      csv.row({std::string(to_string(variant)), std::to_string(nu), std::string(to_string(m)), num(t.e_b),
               std::to_string(t.sign_changes)});
    }
  }
}

void run_fig1(const RunConfig& c, CsvWriter& csv) {
  const auto curves = sarg_curves(c, {SargVariant::SixState});
  csv.row({"protocol", "photons", "mode", "e_b", "r"});
  for (const auto& [variant, nu] : curves) {
    const ErrorRelation rel = ErrorRelation::derive(build_protocol(variant), nu);
    for (RateMode m : modes_of(c)) {
      for (double e_b : grid(c.eb_max, c.eb_step)) {
        csv.row({std::string(to_string(variant)), std::to_string(nu), std::string(to_string(m)), num(e_b),
                 num(key_rate(rel, e_b, m, c.policy))});
      }
    }
  }
}

void run_fig2(const RunConfig& c, CsvWriter& csv, DecoyMode decoy) {
  RateOptions opts;
  opts.mode = c.mode.value_or(RateMode::WithMutualInfo);
  opts.policy = c.policy;
  opts.weak_intensity = c.weak_intensity;
  const RateModel model(c.channel, opts);

  std::vector<Protocol> protocols = {Protocol::BB84, Protocol::FourStateSARG04, Protocol::SixStateSARG04,
                                     Protocol::RRDPS};
  if (c.protocol) protocols = {*c.protocol};
  csv.meta("decoy", to_string(decoy));
  csv.row({"protocol", "distance_km", "mu_star", "rate"});
  for (Protocol p : protocols) {
    for (double d : grid(c.max_km, c.step_km)) {
      const MuOptimum best = model.optimize_mu(p, d, decoy);
      csv.row({std::string(to_string(p)), num(d), num(best.mu), num(best.rate)});
    }
  }
}

void validate(const RunConfig& c) {
  c.channel.validate();
  if (c.photons && (*c.photons < 1 || *c.photons > 4)) throw std::invalid_argument("photons must lie in 1..4");
  if (!(c.max_km >= 0.0) || !std::isfinite(c.max_km)) throw std::invalid_argument("max-km must be non-negative");
  if (!(c.step_km > 0.0)) throw std::invalid_argument("step-km must be positive");
  if (!(c.eb_max >= 0.0 && c.eb_max <= 0.5)) throw std::invalid_argument("eb-max must lie in [0, 1/2]");
  if (!(c.eb_step > 0.0)) throw std::invalid_argument("eb-step must be positive");
  if (!(c.weak_intensity > 0.0 && c.weak_intensity < RateModel::kMuMax)) {
    throw std::invalid_argument("weak-intensity must lie in (0, 1.5)");
  }
}

}  // namespace

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  std::ostringstream buffer;
  try {
    validate(config);
    CsvWriter csv(buffer);
    write_metadata(csv, config);
    switch (config.command) {
      case Command::Bounds: run_bounds(config, csv); break;
      case Command::Thresholds: run_thresholds(config, csv); break;
      case Command::Fig1: run_fig1(config, csv); break;
      case Command::Fig2a: run_fig2(config, csv, DecoyMode::Infinite); break;
      case Command::Fig2b: run_fig2(config, csv, DecoyMode::Finite); break;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }

  if (config.out.empty()) {
    out << buffer.str();
    return out ? 0 : 2;
  }
  std::ofstream file(config.out, std::ios::binary | std::ios::trunc);
  file << buffer.str();
  file.close();
  if (!file) {
    err << "error: cannot write " << config.out << '\n';
    return 2;
  }
  return 0;
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Phase-error bounds and key rates for SARG04, BB84 and RRDPS", "mpqkd"};
  app.set_config("--config", "", "key=value file; flags given on the command line win");
  app.require_subcommand(1);
  app.fallthrough();

  RunConfig c;
  const std::map<std::string, Protocol> protocols = {
      {"bb84", Protocol::BB84},           {"sarg4", Protocol::FourStateSARG04},
      {"four-sarg", Protocol::FourStateSARG04}, {"sarg6", Protocol::SixStateSARG04},
      {"six-sarg", Protocol::SixStateSARG04},   {"rrdps", Protocol::RRDPS}};
  const std::map<std::string, RateMode> modes = {{"with-mi", RateMode::WithMutualInfo},
                                                 {"without-mi", RateMode::WithoutMutualInfo}};
  const std::map<std::string, CorrelationPolicy> policies = {{"lower", CorrelationPolicy::LowerEndpoint},
                                                             {"worst", CorrelationPolicy::WorstCase}};
  std::string protocol;
  int photons = 0;
  std::string mode;
  std::string policy;

  auto* protocol_opt = app.add_option("--protocol", protocol, "bb84 | sarg4 | sarg6 | rrdps")
                           ->check(CLI::IsMember(protocols));
  auto* photons_opt = app.add_option("--photons", photons, "photon number 1..4")->check(CLI::Range(1, 4));
  auto* mode_opt = app.add_option("--mode", mode, "with-mi | without-mi")->check(CLI::IsMember(modes));
  auto* policy_opt = app.add_option("--a-policy", policy, "correlation a used with mutual information: lower | worst")
                         ->check(CLI::IsMember(policies));
  app.add_option("--eta-d", c.channel.eta_d, "detector efficiency")->capture_default_str();
  app.add_option("--p-dark", c.channel.p_dark, "dark count probability per pulse")->capture_default_str();
  app.add_option("--alpha-db-km", c.channel.alpha_db_per_km, "fibre loss in dB/km")->capture_default_str();
  app.add_option("--e-d", c.channel.e_d, "misalignment error rate")->capture_default_str();
  app.add_option("--f-ec", c.channel.f_ec, "error-correction inefficiency")->capture_default_str();
  app.add_option("--block-l", c.channel.block_length, "RRDPS block length")->capture_default_str();
  app.add_option("--max-km", c.max_km, "largest distance on the grid")->capture_default_str();
  app.add_option("--step-km", c.step_km, "distance step")->capture_default_str();
  app.add_option("--weak-intensity", c.weak_intensity, "weak decoy intensity")->capture_default_str();
  app.add_option("--eb-max", c.eb_max, "largest bit error rate on the grid")->capture_default_str();
  app.add_option("--eb-step", c.eb_step, "bit error rate step")->capture_default_str();
  app.add_option("--seed", c.seed, "seed for the Monte Carlo spot check")->capture_default_str();
  app.add_option("--out", c.out, "output path (default: standard output)");

  const std::pair<Command, const char*> commands[] = {
      {Command::Bounds, "phase-error bound samples and correlation coefficients"},
      {Command::Thresholds, "bit-error thresholds for every relation and mode"},
      {Command::Fig1, "key rate versus bit error rate"},
      {Command::Fig2a, "key rate versus distance, infinite decoy states"},
      {Command::Fig2b, "key rate versus distance, weak decoy plus vacuum"},
  };
  for (const auto& [cmd, help] : commands) {
    app.add_subcommand(std::string(command_name(cmd)), help)->callback([&c, cmd = cmd] { c.command = cmd; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }
  if (*protocol_opt) c.protocol = protocols.at(protocol);
  if (*photons_opt) c.photons = photons;
  if (*mode_opt) c.mode = modes.at(mode);
  if (*policy_opt) c.policy = policies.at(policy);
  return run(c, out, err);
}

}  // namespace mpqkd::cli
