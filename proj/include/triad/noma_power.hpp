#pragma once

// Uplink NOMA with successive interference cancellation. The receiver decodes
// the strongest UE first, so each UE sees interference only from the weaker
// UEs of its cluster and the weakest UE is interference-free.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "triad/error.hpp"

namespace triad {

/// Per-UE traffic over one frame.
struct RateDemand {
  double data_bits = 60'000.0;
  double frame_duration = 1.0; ///< s

  double required_rate() const { return data_bits / frame_duration; }
};

/// Largest spectral efficiency demand accepted before 2^x - 1 is treated as infeasible.
inline constexpr double kMaxSpectralEfficiency = 60.0; // bits/s/Hz

/// SINR target that makes Shannon capacity over the bandwidth equal the rate.
inline double sinr_gamma(double required_rate, double bandwidth) {
  if (!(bandwidth > 0.0))
    throw std::invalid_argument("sinr_gamma: bandwidth must be positive");
  if (!(required_rate >= 0.0))
    throw std::invalid_argument("sinr_gamma: required rate must be non-negative");
  const double efficiency = required_rate / bandwidth;
  if (efficiency > kMaxSpectralEfficiency)
    throw InfeasibleDemand("sinr_gamma: demand of " + std::to_string(efficiency) +
                           " bits/s/Hz exceeds the supported maximum");
  return std::exp2(efficiency) - 1.0;
}

inline double min_power_single(double gamma, double noise, double gain) {
  if (!(gain > 0.0) || !(noise > 0.0) || !(gamma >= 0.0))
    throw std::invalid_argument("min_power_single: require gain > 0, noise > 0, gamma >= 0");
  return gamma * noise / gain;
}

/// Decoding order: indices sorted by non-increasing gain, ties by index.
inline std::vector<std::size_t> sic_order(std::span<const double> gains) {
  std::vector<std::size_t> order(gains.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return gains[a] > gains[b]; });
  return order;
}

/// Exact minimum powers for the whole cluster, solved from the weakest UE
/// upward. No p_max limit is applied.
inline std::vector<double> closed_form_cluster_powers(std::span<const double> gains,
                                                      std::span<const double> gammas, double noise) {
  if (gains.size() != gammas.size())
    throw std::invalid_argument("closed_form_cluster_powers: gains and gammas differ in length");
  const std::vector<std::size_t> order = sic_order(gains);
  std::vector<double> power(gains.size(), 0.0);
  double received_weaker = 0.0; // sum of p_j g_j over weaker UEs
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    power[*it] = gammas[*it] * (noise + received_weaker) / gains[*it];
    received_weaker += power[*it] * gains[*it];
  }
  return power;
}

struct PowerSolution {
  std::vector<double> power;         ///< W, 0 for outage UEs
  std::vector<double> achieved_rate; ///< bits/s, 0 for outage UEs
  std::vector<bool> outage;
  std::vector<std::size_t> sic_order; ///< strongest first
  std::size_t iterations = 0;
  bool converged = false;
  double required_rate = 0.0;

  std::size_t served_count() const {
    return static_cast<std::size_t>(std::count(outage.begin(), outage.end(), false));
  }
  std::size_t outage_count() const { return outage.size() - served_count(); }
};

/// Shannon rates from the given powers with SIC interference from weaker
/// served UEs only.
inline std::vector<double> sic_rates(std::span<const double> gains, std::span<const double> power,
                                     std::span<const std::size_t> order, double bandwidth, double noise) {
  std::vector<double> rate(gains.size(), 0.0);
  double received_weaker = 0.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const double received = power[*it] * gains[*it];
    if (received > 0.0)
      rate[*it] = bandwidth * std::log2(1.0 + received / (noise + received_weaker));
    received_weaker += received;
  }
  return rate;
}

inline constexpr double kPowerTolerance = 1e-12; // W
inline constexpr std::size_t kMaxPowerIterations = 1000;

/// Minimum-power fixed point for one NOMA cluster with admission control.
///
/// Starting from zero, each sweep walks the SIC order from the weakest UE up
/// and sets p_k = gamma (noise + interference from weaker served UEs) / g_k.
/// Sweeps stop once no power moves by more than 1e-12 W. If a served UE then
/// needs more than p_max, the UE with the largest p / p_max is put in outage
/// and the cluster is re-solved.
inline PowerSolution iterative_power_allocation(std::span<const double> gains, const RateDemand& demand,
                                                double bandwidth, double noise, double p_max) {
  if (gains.empty())
    throw std::invalid_argument("iterative_power_allocation: empty cluster");
  if (!(p_max > 0.0))
    throw std::invalid_argument("iterative_power_allocation: p_max must be positive");
  if (!(noise > 0.0))
    throw std::invalid_argument("iterative_power_allocation: noise must be positive");
  for (double g : gains)
    if (!(g > 0.0))
      throw std::invalid_argument("iterative_power_allocation: gains must be positive");

  const double gamma = sinr_gamma(demand.required_rate(), bandwidth);
  const std::size_t n = gains.size();

  PowerSolution sol;
  sol.required_rate = demand.required_rate();
  sol.sic_order = sic_order(gains);
  sol.outage.assign(n, false);
  sol.power.assign(n, 0.0);
  sol.converged = true;

  for (;;) {
    std::fill(sol.power.begin(), sol.power.end(), 0.0);
    bool converged = false;
    for (std::size_t sweep = 0; sweep < kMaxPowerIterations; ++sweep) {
      ++sol.iterations;
      double max_change = 0.0;
      double received_weaker = 0.0;
      for (auto it = sol.sic_order.rbegin(); it != sol.sic_order.rend(); ++it) {
        const std::size_t u = *it;
        if (sol.outage[u])
          continue;
        const double updated = gamma * (noise + received_weaker) / gains[u];
        max_change = std::max(max_change, std::abs(updated - sol.power[u]));
        sol.power[u] = updated;
        received_weaker += updated * gains[u];
      }
      if (max_change < kPowerTolerance) {
        converged = true;
        break;
      }
    }
    sol.converged = sol.converged && converged;

    std::size_t worst = n;
    double worst_ratio = 1.0;
    for (std::size_t u : sol.sic_order) {
      if (!sol.outage[u] && sol.power[u] / p_max > worst_ratio) {
        worst_ratio = sol.power[u] / p_max;
        worst = u;
      }
    }
    if (worst == n)
      break;
    sol.outage[worst] = true;
    sol.power[worst] = 0.0;
  }

  sol.achieved_rate = sic_rates(gains, sol.power, sol.sic_order, bandwidth, noise);
  return sol;
}

/// Energy efficiency over one frame. Outage UEs contribute neither bits nor energy.
struct EeBreakdown {
  double total_bits = 0.0;
  double total_energy = 0.0; ///< J
  double ee = 0.0;           ///< bits/J
  double circuit_power = 0.0; ///< W per served UE
  std::size_t served_count = 0;
  std::size_t outage_count = 0;
};

inline EeBreakdown compute_ee(std::span<const PowerSolution> clusters, const RateDemand& demand,
                              double circuit_power) {
  if (!(demand.frame_duration > 0.0))
    throw std::invalid_argument("compute_ee: frame duration must be positive");
  EeBreakdown out;
  out.circuit_power = circuit_power;
  double served_power = 0.0;
  for (const PowerSolution& sol : clusters) {
    for (std::size_t u = 0; u < sol.outage.size(); ++u) {
      if (sol.outage[u]) {
        ++out.outage_count;
      } else {
        ++out.served_count;
        served_power += sol.power[u] + circuit_power;
      }
    }
  }
  out.total_bits = demand.data_bits * static_cast<double>(out.served_count);
  out.total_energy = demand.frame_duration * served_power;
  out.ee = out.served_count == 0 ? 0.0 : out.total_bits / out.total_energy;
  return out;
}

} // namespace triad
