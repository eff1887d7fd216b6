#pragma once

// Command-line front end: `single`, `sweep-users` and `sweep-data`.
//
// Effective configuration = defaults, then --config file, then --seed /
// --trials / --set overrides. The effective configuration is written next
// to the CSVs as config.snapshot.json; feeding that file back via --config
// reproduces the outputs byte for byte.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "triad/config.hpp"
#include "triad/error.hpp"
#include "triad/harness.hpp"

namespace triad::cli {

enum ExitCode : int {
  kOk = 0,
  kConfigError = 2,
  kIoError = 3,
  kSimulationError = 4,
};

inline constexpr std::string_view kSnapshotFile = "config.snapshot.json";

struct Invocation {
  std::string subcommand;
  std::optional<std::filesystem::path> config_path;
  std::vector<std::string> overrides;
  std::filesystem::path output_dir = "results";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  int verbosity = 0;
};

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IoError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline SimConfig effective_config(const Invocation& inv) {
  SimConfig config;
  if (inv.config_path)
    config = parse_config(read_file(*inv.config_path));
  std::vector<std::string> overrides;
  if (inv.seed)
    overrides.push_back("seed=" + std::to_string(*inv.seed));
  if (inv.trials)
    overrides.push_back("n_trials=" + std::to_string(*inv.trials));
  overrides.insert(overrides.end(), inv.overrides.begin(), inv.overrides.end());
  return apply_overrides(config, overrides);
}

inline std::string percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%%", v);
  return buf;
}

/// Per-point table plus the triad-vs-baseline improvement of mean EE.
inline void print_summary(const EeReport& report, std::string_view sweep_label, std::ostream& out) {
  out << sweep_label << "  mode      mean_ee[bit/J]   ci95_half        improvement\n";
  double triad_total = 0.0;
  double baseline_total = 0.0;
  for (const Aggregate& a : report.aggregates) {
    char line[160];
    std::snprintf(line, sizeof line, "%-12s %-9s %-16.6e %-16.6e", format_number(a.sweep_value).c_str(),
                  std::string(to_string(a.mode)).c_str(), a.mean_ee, a.ci95_half);
    out << line;
    if (a.mode == Mode::triad) {
      triad_total += a.mean_ee;
      if (auto base = report.find(a.sweep_value, Mode::baseline); base && base->mean_ee > 0.0)
        out << ' ' << percent(100.0 * (a.mean_ee - base->mean_ee) / base->mean_ee);
    } else {
      baseline_total += a.mean_ee;
    }
    out << '\n';
  }
  const double improvement = baseline_total > 0.0 ? 100.0 * (triad_total - baseline_total) / baseline_total : 0.0;
  out << "triad vs baseline mean EE improvement: " << percent(improvement) << '\n';
}

inline void print_records(const EeReport& report, std::ostream& out) {
  out << kTrialsHeader;
  for (const TrialRecord& r : report.records)
    out << trial_row(r);
}

/// Runs a parsed invocation and maps failures to exit codes.
inline int run(const Invocation& inv, std::ostream& out, std::ostream& err) {
  try {
    const SimConfig config = effective_config(inv);

    EeReport report;
    std::string label;
    if (inv.subcommand == "single") {
      SimConfig one = config;
      one.n_trials = 1;
      const std::size_t counts[] = {config.n_ues};
      report = sweep_users(one, counts);
      label = "n_ues";
    } else if (inv.subcommand == "sweep-users") {
      report = sweep_users(config, default_ue_counts());
      label = "n_ues";
    } else if (inv.subcommand == "sweep-data") {
      report = sweep_data(config, default_data_sizes());
      label = "data_bits";
    } else {
      throw ConfigError("unknown subcommand '" + inv.subcommand + "'");
    }

    write_results(report, inv.output_dir);
    write_text_file(inv.output_dir / kSnapshotFile, to_json(config).dump(2) + "\n");

    if (inv.subcommand == "single" || inv.verbosity > 0)
      print_records(report, out);
    print_summary(report, label, out);
    out << "wrote " << (inv.output_dir / kTrialsFile).string() << ", "
        << (inv.output_dir / kAggregateFile).string() << ", " << (inv.output_dir / kSnapshotFile).string()
        << '\n';
    return kOk;
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
    return kConfigError;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << '\n';
    return kIoError;
  } catch (const std::exception& e) {
    err << "simulation error: " << e.what() << '\n';
    return kSimulationError;
  }
}

/// Parses argv and runs. Usage errors return kConfigError.
inline int main(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"UAV relay cell simulator with ambient backscatter tags and clustered uplink NOMA"};
  app.require_subcommand(1);

  Invocation inv;
  std::string config_path;
  std::uint64_t seed = 0;
  std::size_t trials = 0;
  std::string out_dir = inv.output_dir.string();

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "Output directory for CSVs and the config snapshot");
    sub->add_option("--seed", seed, "Base random seed");
    sub->add_option("--trials", trials, "Paired trials per sweep point")->check(CLI::PositiveNumber);
    sub->add_option("--set", inv.overrides, "Override a config key (key=value, repeatable)");
    sub->add_flag("-v,--verbose", inv.verbosity, "Print per-trial records");
  };
  CLI::App* single = app.add_subcommand("single", "One paired trial at the configured operating point");
  CLI::App* users = app.add_subcommand("sweep-users", "EE versus number of UEs (10..100)");
  CLI::App* data = app.add_subcommand("sweep-data", "EE versus data size per UE (20..100 kbit)");
  for (CLI::App* sub : {single, users, data})
    add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  for (CLI::App* sub : {single, users, data}) {
    if (!sub->parsed())
      continue;
    inv.subcommand = sub->get_name();
    if (!config_path.empty())
      inv.config_path = config_path;
    if (sub->count("--seed") > 0)
      inv.seed = seed;
    if (sub->count("--trials") > 0)
      inv.trials = trials;
  }
  inv.output_dir = out_dir;
  return run(inv, out, err);
}

} // namespace triad::cli
