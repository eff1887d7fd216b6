#pragma once

// Monte Carlo driver. Every trial evaluates the triad (backscatter on) and the
// baseline (backscatter off) on the same sampled deployment.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "triad/channel.hpp"
#include "triad/clustering.hpp"
#include "triad/config.hpp"
#include "triad/error.hpp"
#include "triad/geometry.hpp"
#include "triad/noma_power.hpp"

namespace triad {

inline constexpr double kUeHeight = 1.5;  // m
inline constexpr double kTagHeight = 1.0; // m

/// Seed of trial `trial_index` at sweep point `sweep_index`. Independent of
/// evaluation order, so trials may run in any order or concurrently.
constexpr std::uint64_t trial_seed(std::uint64_t base_seed, std::uint64_t sweep_index,
                                   std::uint64_t trial_index) {
  return splitmix64(splitmix64(splitmix64(base_seed) ^ sweep_index) ^ trial_index);
}

namespace detail {

// Uniform double in [0, 1) from the top 53 bits of the generator output.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline Position uniform_in_disk(std::mt19937_64& rng, double radius, double height) {
  const double r = radius * std::sqrt(uniform01(rng));
  const double phi = 2.0 * std::numbers::pi * uniform01(rng);
  return {r * std::cos(phi), r * std::sin(phi), height};
}

} // namespace detail

/// UEs and tags uniform over the coverage disk; UAV above the center.
inline Deployment sample_deployment(const SimConfig& config, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Deployment d;
  d.uav_position = {0.0, 0.0, config.uav_altitude};
  d.ue_positions.reserve(config.n_ues);
  for (std::size_t i = 0; i < config.n_ues; ++i)
    d.ue_positions.push_back(detail::uniform_in_disk(rng, config.coverage_radius, kUeHeight));
  d.tag_positions.reserve(config.n_tags);
  for (std::size_t i = 0; i < config.n_tags; ++i)
    d.tag_positions.push_back(detail::uniform_in_disk(rng, config.coverage_radius, kTagHeight));
  return d;
}

enum class Mode { baseline, triad };

inline std::string_view to_string(Mode m) { return m == Mode::triad ? "triad" : "baseline"; }

/// Everything computed for one mode of one trial.
struct ModeOutcome {
  ChannelState channel;
  ClusterPlan plan;
  std::vector<PowerSolution> clusters; ///< indexed like plan clusters
  std::vector<std::vector<std::size_t>> members;
  EeBreakdown ee;
};

/// Channel -> grouping -> per-cluster power allocation -> energy efficiency.
inline ModeOutcome evaluate_mode(const SimConfig& config, const Deployment& deployment, bool ambc_enabled,
                                 std::uint64_t seed) {
  ModeOutcome out;
  out.channel = effective_gains(deployment, config.channel, ambc_enabled);
  out.plan = group_users(out.channel, config.k_max, seed, config.n_subcarriers, config.kmeans_max_iters);
  out.members = out.plan.members();

  const RateDemand demand = config.demand();
  out.clusters.reserve(out.plan.k);
  for (std::size_t c = 0; c < out.plan.k; ++c) {
    std::vector<double> gains;
    gains.reserve(out.members[c].size());
    for (std::size_t u : out.members[c])
      gains.push_back(out.channel.effective_gain[u]);
    const double bandwidth = static_cast<double>(out.plan.subcarriers_per_cluster[c]) * config.subcarrier_bandwidth();
    const double noise = noise_power(bandwidth, config.channel.noise_psd);
    out.clusters.push_back(iterative_power_allocation(gains, demand, bandwidth, noise, config.p_max));
  }
  out.ee = compute_ee(out.clusters, demand, config.circuit_power_watts());
  return out;
}

/// Checks gathered while a trial runs; they never reach the CSV.
struct TrialDiagnostics {
  double max_served_power = 0.0;
  double min_rate_ratio = std::numeric_limits<double>::infinity(); ///< achieved / required over served UEs
  std::size_t subcarrier_total = 0;
  bool all_converged = true;
};

inline TrialDiagnostics diagnose(const ModeOutcome& outcome) {
  TrialDiagnostics d;
  for (std::size_t s : outcome.plan.subcarriers_per_cluster)
    d.subcarrier_total += s;
  for (const PowerSolution& sol : outcome.clusters) {
    d.all_converged = d.all_converged && sol.converged;
    for (std::size_t u = 0; u < sol.outage.size(); ++u) {
      if (sol.outage[u])
        continue;
      d.max_served_power = std::max(d.max_served_power, sol.power[u]);
      if (sol.required_rate > 0.0)
        d.min_rate_ratio = std::min(d.min_rate_ratio, sol.achieved_rate[u] / sol.required_rate);
    }
  }
  return d;
}

struct TrialRecord {
  double sweep_value = 0.0;
  std::size_t trial = 0;
  std::uint64_t trial_seed = 0;
  Mode mode = Mode::triad;
  double ee = 0.0; ///< bits/J
  std::size_t served = 0;
  std::size_t outage = 0;
  std::size_t k = 1;
  std::optional<double> f_statistic;
  TrialDiagnostics diagnostics;
};

struct PairedTrial {
  TrialRecord triad;
  TrialRecord baseline;
};

inline TrialRecord make_record(const ModeOutcome& outcome, Mode mode, std::uint64_t seed) {
  TrialRecord r;
  r.trial_seed = seed;
  r.mode = mode;
  r.ee = outcome.ee.ee;
  r.served = outcome.ee.served_count;
  r.outage = outcome.ee.outage_count;
  r.k = outcome.plan.k;
  r.f_statistic = outcome.plan.f_statistic;
  r.diagnostics = diagnose(outcome);
  return r;
}

/// One paired trial. The triad follows config.ambc_enabled; the baseline
/// always runs without backscatter on the identical deployment.
inline PairedTrial run_trial(const SimConfig& config, std::uint64_t seed) {
  try {
    const Deployment deployment = sample_deployment(config, seed);
    PairedTrial pair;
    pair.triad = make_record(evaluate_mode(config, deployment, config.ambc_enabled, seed), Mode::triad, seed);
    pair.baseline = make_record(evaluate_mode(config, deployment, false, seed), Mode::baseline, seed);
    return pair;
  } catch (const std::exception& e) {
    throw SimulationError("trial seed " + std::to_string(seed) + ": " + e.what());
  }
}

struct Aggregate {
  double sweep_value = 0.0;
  Mode mode = Mode::triad;
  double mean_ee = 0.0;
  double std_ee = 0.0;    ///< sample standard deviation
  double ci95_half = 0.0; ///< 1.96 std / sqrt(n)
  std::size_t n_trials = 0;
};

struct EeReport {
  std::vector<TrialRecord> records; ///< sorted by (sweep_value, trial, mode)
  std::vector<Aggregate> aggregates; ///< sorted by (sweep_value, mode)

  std::optional<Aggregate> find(double sweep_value, Mode mode) const {
    for (const Aggregate& a : aggregates)
      if (a.sweep_value == sweep_value && a.mode == mode)
        return a;
    return std::nullopt;
  }
};

inline void sort_records(std::vector<TrialRecord>& records) {
  std::stable_sort(records.begin(), records.end(), [](const TrialRecord& a, const TrialRecord& b) {
    return std::tie(a.sweep_value, a.trial, a.mode) < std::tie(b.sweep_value, b.trial, b.mode);
  });
}

/// Mean, sample deviation and normal-approximation CI per (sweep_value, mode).
/// Expects records sorted by sort_records.
inline std::vector<Aggregate> aggregate(std::span<const TrialRecord> records) {
  std::vector<const TrialRecord*> sorted;
  sorted.reserve(records.size());
  for (const TrialRecord& r : records)
    sorted.push_back(&r);
  std::stable_sort(sorted.begin(), sorted.end(), [](const TrialRecord* a, const TrialRecord* b) {
    return std::tie(a->sweep_value, a->mode, a->trial) < std::tie(b->sweep_value, b->mode, b->trial);
  });

  std::vector<Aggregate> out;
  for (std::size_t begin = 0; begin < sorted.size();) {
    std::size_t end = begin;
    while (end < sorted.size() && sorted[end]->sweep_value == sorted[begin]->sweep_value &&
           sorted[end]->mode == sorted[begin]->mode)
      ++end;
    Aggregate a;
    a.sweep_value = sorted[begin]->sweep_value;
    a.mode = sorted[begin]->mode;
    a.n_trials = end - begin;
    double sum = 0.0;
    for (std::size_t i = begin; i < end; ++i)
      sum += sorted[i]->ee;
    a.mean_ee = sum / static_cast<double>(a.n_trials);
    if (a.n_trials > 1) {
      double ss = 0.0;
      for (std::size_t i = begin; i < end; ++i)
        ss += (sorted[i]->ee - a.mean_ee) * (sorted[i]->ee - a.mean_ee);
      a.std_ee = std::sqrt(ss / static_cast<double>(a.n_trials - 1));
      a.ci95_half = 1.96 * a.std_ee / std::sqrt(static_cast<double>(a.n_trials));
    }
    out.push_back(a);
    begin = end;
  }
  return out;
}

/// Runs config.n_trials paired trials for each configuration produced by
/// `point(config, index)`. Trial seeds depend only on (seed, index, trial).
template <typename PointFn>
EeReport run_sweep(const SimConfig& config, std::size_t n_points, PointFn&& point) {
  if (n_points == 0)
    throw ConfigError("sweep needs at least one sweep point");
  config.validate();
  EeReport report;
  report.records.reserve(2 * n_points * config.n_trials);
  for (std::size_t p = 0; p < n_points; ++p) {
    const auto [sweep_value, point_config] = point(config, p);
    point_config.validate();
    for (std::size_t t = 0; t < point_config.n_trials; ++t) {
      PairedTrial pair = run_trial(point_config, trial_seed(config.seed, p, t));
      for (TrialRecord* r : {&pair.triad, &pair.baseline}) {
        r->sweep_value = sweep_value;
        r->trial = t;
        report.records.push_back(*r);
      }
    }
  }
  sort_records(report.records);
  report.aggregates = aggregate(report.records);
  return report;
}

/// EE versus number of UEs at fixed data size.
inline EeReport sweep_users(const SimConfig& config, std::span<const std::size_t> ue_counts) {
  if (ue_counts.empty())
    throw ConfigError("sweep_users: ue_counts is empty");
  return run_sweep(config, ue_counts.size(), [&](const SimConfig& base, std::size_t i) {
    SimConfig c = base;
    c.n_ues = ue_counts[i];
    return std::pair{static_cast<double>(ue_counts[i]), c};
  });
}

/// EE versus per-UE data size at fixed number of UEs.
inline EeReport sweep_data(const SimConfig& config, std::span<const double> data_sizes) {
  if (data_sizes.empty())
    throw ConfigError("sweep_data: data_sizes is empty");
  return run_sweep(config, data_sizes.size(), [&](const SimConfig& base, std::size_t i) {
    SimConfig c = base;
    c.data_bits = data_sizes[i];
    return std::pair{data_sizes[i], c};
  });
}

inline std::vector<std::size_t> default_ue_counts() { return {10, 20, 30, 40, 50, 60, 70, 80, 90, 100}; }

inline std::vector<double> default_data_sizes() {
  return {20'000, 30'000, 40'000, 50'000, 60'000, 70'000, 80'000, 90'000, 100'000};
}

// --- CSV output -------------------------------------------------------------

/// 12 significant digits, "inf" for infinities.
inline std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline constexpr std::string_view kTrialsHeader =
    "sweep_value,trial,mode,ee_bits_per_joule,served,outage,k,f_statistic\n";
inline constexpr std::string_view kAggregateHeader = "sweep_value,mode,mean_ee,std_ee,ci95_half,n_trials\n";

inline std::string trial_row(const TrialRecord& r) {
  std::string row = format_number(r.sweep_value);
  row += ',' + std::to_string(r.trial);
  row += ',';
  row += to_string(r.mode);
  row += ',' + format_number(r.ee);
  row += ',' + std::to_string(r.served);
  row += ',' + std::to_string(r.outage);
  row += ',' + std::to_string(r.k);
  row += ',' + (r.f_statistic ? format_number(*r.f_statistic) : std::string("NA"));
  row += '\n';
  return row;
}

inline std::string aggregate_row(const Aggregate& a) {
  std::string row = format_number(a.sweep_value);
  row += ',';
  row += to_string(a.mode);
  row += ',' + format_number(a.mean_ee);
  row += ',' + format_number(a.std_ee);
  row += ',' + format_number(a.ci95_half);
  row += ',' + std::to_string(a.n_trials);
  row += '\n';
  return row;
}

inline std::string trials_csv(const EeReport& report) {
  std::string out(kTrialsHeader);
  for (const TrialRecord& r : report.records)
    out += trial_row(r);
  return out;
}

inline std::string aggregate_csv(const EeReport& report) {
  std::string out(kAggregateHeader);
  for (const Aggregate& a : report.aggregates)
    out += aggregate_row(a);
  return out;
}

inline constexpr std::string_view kTrialsFile = "trials.csv";
inline constexpr std::string_view kAggregateFile = "aggregate.csv";

inline void write_text_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw IoError("cannot open " + path.string() + " for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  out.flush();
  if (!out)
    throw IoError("failed writing " + path.string());
}

/// Writes trials.csv and aggregate.csv into `dir`, creating it if needed.
inline void write_results(const EeReport& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec)
    throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  write_text_file(dir / kTrialsFile, trials_csv(report));
  write_text_file(dir / kAggregateFile, aggregate_csv(report));
}

} // namespace triad
