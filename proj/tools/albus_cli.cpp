// albus_cli: trace generation, ground truth, experiment runs, sweeps and
// fluid-model queries. Run `albus_cli <subcommand> --help` for options.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "albus.hpp"

namespace {

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> repeats;
  std::vector<std::string> settings;  // key=value

  void add_to(CLI::App* cmd) {
    cmd->add_option("--seed", seed, "Base seed (run i uses seed + i)");
    cmd->add_option("--repeats", repeats, "Number of seeded repeats");
    cmd->add_option("--set", settings, "Override a config key (key=value), repeatable");
  }

  void apply(albus::ExperimentConfig& cfg) const {
    for (const std::string& kv : settings) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw albus::ConfigError("--set expects key=value, got '" + kv + "'");
      albus::apply_setting(cfg, albus::detail::trim(kv.substr(0, eq)), albus::detail::trim(kv.substr(eq + 1)));
    }
    if (seed) cfg.seed = *seed;
    if (repeats) cfg.repeats = *repeats;
  }
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw albus::TraceError(path + ": cannot open for writing");
  out << text;
  if (!out) throw albus::TraceError(path + ": write failed");
}

void emit_csv(const std::string& out_path, const std::string& csv) {
  if (out_path.empty() || out_path == "-") {
    std::cout << csv;
  } else {
    write_text(out_path, csv);
  }
}

std::vector<albus::VolumeCurve> constant_competitors(const std::vector<double>& rates, double initial) {
  std::vector<albus::VolumeCurve> out;
  for (double r : rates) out.push_back([r](double t) { return r * t; });
  if (initial > 0.0) out.push_back([initial](double) { return initial; });
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ALBUS burst detection toolkit"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a labeled attack + background trace");
  std::string gen_config;
  std::string gen_out;
  std::string gen_labels;
  Overrides gen_over;
  gen->add_option("--config", gen_config, "Experiment config supplying traffic parameters");
  gen->add_option("--out", gen_out, "Trace CSV path")->required();
  gen->add_option("--labels", gen_labels, "Label CSV path");
  gen_over.add_to(gen);

  // oracle
  auto* oracle = app.add_subcommand("oracle", "Exact per-flow violation events of a trace");
  std::string oracle_trace;
  std::string oracle_out;
  double oracle_gamma = albus::FlowSpec{}.gamma();
  double oracle_beta = albus::FlowSpec{}.beta();
  oracle->add_option("--trace", oracle_trace, "Trace CSV (ts_ns,flow_id,size_bytes)")->required();
  oracle->add_option("--gamma", oracle_gamma, "Base rate, bytes/s");
  oracle->add_option("--beta", oracle_beta, "Burst allowance, bytes");
  oracle->add_option("--out", oracle_out, "Event CSV path (default stdout)");

  // run
  auto* run = app.add_subcommand("run", "Run one experiment config");
  std::string run_config;
  std::string run_out;
  std::string run_json;
  Overrides run_over;
  run->add_option("config", run_config, "Experiment config file")->required();
  run->add_option("--out", run_out, "Result CSV path (default stdout)");
  run->add_option("--json", run_json, "JSON summary path");
  run_over.add_to(run);

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Run a single-axis sweep");
  std::string sweep_file;
  std::string sweep_out;
  std::string sweep_json;
  Overrides sweep_over;
  sweep->add_option("spec", sweep_file, "Sweep file")->required();
  sweep->add_option("--out", sweep_out, "Long-format CSV path (default stdout)");
  sweep->add_option("--json", sweep_json, "JSON summary path");
  sweep_over.add_to(sweep);

  // analyze
  auto* analyze = app.add_subcommand("analyze", "Fluid-model queries for a constant-rate burst");
  std::string query;
  double a_width = 0.2;
  double a_overuse = 1.2;
  double a_gamma = albus::FlowSpec{}.gamma();
  double a_beta = albus::FlowSpec{}.beta();
  double a_volume = 0.0;
  double a_others = 0.0;
  double a_threshold = 10'000.0;
  double a_initial = 0.0;
  std::vector<double> a_occupancy;
  std::vector<double> a_rates;
  std::vector<double> a_clearings;
  analyze->add_option("query", query, "deadline | majority | pull | detect")
      ->required()
      ->check(CLI::IsMember({"deadline", "majority", "pull", "detect"}));
  analyze->add_option("--width", a_width, "Burst width w, seconds");
  analyze->add_option("--overuse", a_overuse, "Overuse ratio l");
  analyze->add_option("--gamma", a_gamma, "Base rate, bytes/s");
  analyze->add_option("--beta", a_beta, "Burst allowance, bytes");
  analyze->add_option("--volume", a_volume, "majority: the flow's volume v");
  analyze->add_option("--others", a_others, "majority: competitors' total volume");
  analyze->add_option("--occupancy", a_occupancy, "pull: BC occupancy probability per opportunity")->delimiter(',');
  analyze->add_option("--competitor-rates", a_rates, "pull/detect: constant competitor rates, bytes/s")
      ->delimiter(',');
  analyze->add_option("--initial-bc", a_initial, "pull/detect: BC count held by a competitor at burst start");
  analyze->add_option("--clearings", a_clearings, "pull/detect: LB clearing times after burst start, seconds")
      ->delimiter(',');
  analyze->add_option("--push-threshold", a_threshold, "detect: push threshold T, bytes");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (gen->parsed()) {
      albus::ExperimentConfig cfg = gen_config.empty() ? albus::ExperimentConfig{} : albus::load_config(gen_config);
      gen_over.apply(cfg);
      cfg.validate();
      const auto seeds = albus::RunSeeds::from(cfg.seed);
      const auto trace = albus::build_trace(cfg, seeds);
      albus::write_trace(gen_out, trace);
      if (!gen_labels.empty()) {
        albus::AttackConfig attack = cfg.attack;
        attack.burst.spec = cfg.spec;
        attack.seed = seeds.traffic;
        albus::write_labels(gen_labels, albus::gen_attack(attack).labels);
      }
      std::cerr << "wrote " << trace.size() << " packets to " << gen_out << '\n';
    } else if (oracle->parsed()) {
      const albus::FlowSpec spec(oracle_gamma, oracle_beta);
      const auto trace = albus::read_trace(oracle_trace);
      const auto events = albus::oracle_events(trace, spec);
      std::ostringstream os;
      os << "flow_id,ts_ns,exceed_bytes\n";
      for (const auto& ev : events) {
        os << ev.flow.value << ',' << albus::detail::to_ns(ev.ts) << ',' << albus::detail::format_real(ev.exceed)
           << '\n';
      }
      emit_csv(oracle_out, os.str());
      std::cerr << events.size() << " violation events over " << trace.size() << " packets\n";
    } else if (run->parsed()) {
      albus::ExperimentConfig cfg = albus::load_config(run_config);
      run_over.apply(cfg);
      const auto result = albus::run(cfg);
      std::ostringstream os;
      albus::write_csv(os, result);
      emit_csv(run_out, os.str());
      if (!run_json.empty()) write_text(run_json, albus::to_json(result).dump(2) + "\n");
      const auto& a = result.aggregate;
      std::cerr << albus::to_string(cfg.detector) << ": recall " << a.recall.mean << " precision "
                << a.precision.mean << " f1 " << a.f1.mean << " over " << cfg.repeats << " runs\n";
    } else if (sweep->parsed()) {
      albus::SweepSpec spec = albus::load_sweep(sweep_file);
      sweep_over.apply(spec.base);
      const auto result = albus::sweep(spec);
      std::ostringstream os;
      albus::write_csv(os, result);
      emit_csv(sweep_out, os.str());
      if (!sweep_json.empty()) write_text(sweep_json, albus::to_json(result).dump(2) + "\n");
      std::cerr << "swept " << result.axis << " over " << result.points.size() << " values\n";
    } else if (analyze->parsed()) {
      const albus::FlowSpec spec(a_gamma, a_beta);
      if (!(a_width > 0.0)) throw albus::ConfigError("--width must be positive");
      if (!(a_overuse > 0.0)) throw albus::ConfigError("--overuse must be positive");
      const auto shape = albus::BurstShape::constant_rate(a_width, a_overuse, spec);
      albus::CellScenario scenario{constant_competitors(a_rates, a_initial), a_clearings, a_threshold};
      std::sort(scenario.clearing_times.begin(), scenario.clearing_times.end());
      nlohmann::json out;
      out["deadline"] = albus::detection_deadline(shape);
      if (query == "majority") {
        out["p_majority"] = albus::majority_prob(a_volume, a_others);
      } else if (query == "pull") {
        if (!a_occupancy.empty()) {
          for (double p : a_occupancy) {
            if (p < 0.0 || p > 1.0) throw albus::ConfigError("--occupancy values must lie in [0, 1]");
          }
          out["p_pull"] = albus::pull_prob(a_occupancy);
        } else {
          out["p_pull"] = albus::pull_prob(shape, scenario);
        }
      } else if (query == "detect") {
        out["push_guaranteed"] = albus::push_guaranteed(shape, scenario);
        out["p_pull"] = albus::pull_prob(shape, scenario);
        out["p_detect"] = albus::detection_prob(shape, scenario);
      }
      std::cout << out.dump(2) << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
