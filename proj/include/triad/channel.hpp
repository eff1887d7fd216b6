#pragma once

// Air-to-ground propagation, cascaded backscatter gains and the noise floor.
//
// All losses are mean values from the probabilistic LoS/NLoS model; no
// small-scale fading is drawn.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "triad/geometry.hpp"

namespace triad {

inline constexpr double kSpeedOfLight = 299'792'458.0; // m/s

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double ratio) { return 10.0 * std::log10(ratio); }
inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

/// Propagation constants. Defaults are typical urban values for the
/// logistic LoS model at 2 GHz.
struct ChannelParams {
  double carrier_freq = 2.0e9;     ///< Hz
  double plos_a = 9.61;            ///< logistic LoS curve offset
  double plos_b = 0.16;            ///< logistic LoS curve steepness
  double eta_los = 1.0;            ///< excess loss on LoS links, dB
  double eta_nlos = 20.0;          ///< excess loss on NLoS links, dB
  double noise_psd = -174.0;       ///< dBm/Hz
  double reflection_coeff = 0.5;   ///< tag power reflection coefficient

  void validate() const {
    if (!(std::isfinite(carrier_freq) && carrier_freq > 0.0))
      throw std::invalid_argument("carrier_freq must be > 0");
    if (!std::isfinite(plos_a) || !std::isfinite(plos_b))
      throw std::invalid_argument("plos_a and plos_b must be finite");
    if (!(eta_los >= 0.0 && eta_nlos >= eta_los && std::isfinite(eta_nlos)))
      throw std::invalid_argument("require eta_nlos >= eta_los >= 0");
    if (!std::isfinite(noise_psd))
      throw std::invalid_argument("noise_psd must be finite");
    if (!(reflection_coeff >= 0.0 && reflection_coeff <= 1.0))
      throw std::invalid_argument("reflection_coeff must lie in [0, 1]");
  }

  friend bool operator==(const ChannelParams&, const ChannelParams&) = default;
};

/// Per-UE channel towards the UAV. effective_gain[i] is exactly
/// direct_gain[i] + backscatter_gain[i].
struct ChannelState {
  std::vector<double> direct_gain;
  std::vector<double> backscatter_gain;
  std::vector<double> effective_gain;
  std::vector<std::optional<std::size_t>> best_tag_index;

  std::size_t size() const { return effective_gain.size(); }

  friend bool operator==(const ChannelState&, const ChannelState&) = default;
};

/// Angle of the UAV above the UE's horizon, in (0, pi/2].
inline double elevation_angle(const Position& ue, const Position& uav) {
  if (ue == uav)
    throw std::invalid_argument("elevation_angle: UE and UAV coincide");
  const double rise = uav.z - ue.z;
  if (!(rise > 0.0))
    throw std::invalid_argument("elevation_angle: UAV must be above the UE");
  return std::atan2(rise, horizontal_distance(ue, uav));
}

inline double free_space_path_loss(double distance_m, double carrier_freq) {
  return 20.0 * std::log10(4.0 * std::numbers::pi * distance_m * carrier_freq / kSpeedOfLight);
}

/// Logistic line-of-sight probability; the angle is given in radians.
inline double los_probability(double angle, const ChannelParams& params) {
  const double degrees = angle * 180.0 / std::numbers::pi;
  return 1.0 / (1.0 + params.plos_a * std::exp(-params.plos_b * (degrees - params.plos_a)));
}

/// Mean air-to-ground path loss in dB.
inline double a2g_path_loss(double distance_m, double angle, const ChannelParams& params) {
  if (!(distance_m > 0.0) || !std::isfinite(distance_m))
    throw std::invalid_argument("a2g_path_loss: distance must be positive, got " +
                                std::to_string(distance_m));
  const double p_los = los_probability(angle, params);
  return free_space_path_loss(distance_m, params.carrier_freq) + p_los * params.eta_los +
         (1.0 - p_los) * params.eta_nlos;
}

/// Linear gain of an arbitrary hop a -> b. The angle is measured from the
/// lower end point, so the hop direction does not matter.
inline double link_gain(const Position& a, const Position& b, const ChannelParams& params) {
  const double d = distance(a, b);
  if (!(d > 0.0))
    throw std::invalid_argument("link_gain: zero-length hop");
  const double angle = std::atan2(std::abs(b.z - a.z), horizontal_distance(a, b));
  return db_to_linear(-a2g_path_loss(d, angle, params));
}

/// Two-hop passive reflection UE -> tag -> UAV, scaled by the tag's
/// reflection coefficient.
inline double cascaded_backscatter_gain(const Position& ue, const Position& tag, const Position& uav,
                                        const ChannelParams& params) {
  if (tag == ue || tag == uav)
    throw std::invalid_argument("cascaded_backscatter_gain: tag coincides with a hop end point");
  if (params.reflection_coeff == 0.0)
    return 0.0;
  return params.reflection_coeff * link_gain(ue, tag, params) * link_gain(tag, uav, params);
}

/// Direct gain plus the best single-tag backscatter path for every UE.
/// Ties in the best tag go to the lowest index.
inline ChannelState effective_gains(const Deployment& deployment, const ChannelParams& params,
                                    bool ambc_enabled) {
  const auto& ues = deployment.ue_positions;
  if (ues.empty())
    throw std::invalid_argument("effective_gains: deployment has no UEs");
  const Position& uav = deployment.uav_position;

  ChannelState state;
  state.direct_gain.reserve(ues.size());
  state.backscatter_gain.reserve(ues.size());
  state.effective_gain.reserve(ues.size());
  state.best_tag_index.reserve(ues.size());

  const bool use_tags = ambc_enabled && params.reflection_coeff > 0.0;
  for (const Position& ue : ues) {
    const double direct = db_to_linear(-a2g_path_loss(distance(ue, uav), elevation_angle(ue, uav), params));
    double best = 0.0;
    std::optional<std::size_t> best_index;
    if (use_tags) {
      for (std::size_t t = 0; t < deployment.tag_positions.size(); ++t) {
        const double g = cascaded_backscatter_gain(ue, deployment.tag_positions[t], uav, params);
        if (g > best) {
          best = g;
          best_index = t;
        }
      }
    }
    state.direct_gain.push_back(direct);
    state.backscatter_gain.push_back(best);
    state.effective_gain.push_back(direct + best);
    state.best_tag_index.push_back(best_index);
  }
  return state;
}

/// Thermal noise power in watts over the given bandwidth.
inline double noise_power(double bandwidth, double noise_psd_dbm_per_hz) {
  if (!(bandwidth > 0.0))
    throw std::invalid_argument("noise_power: bandwidth must be positive");
  return std::pow(10.0, (noise_psd_dbm_per_hz + 10.0 * std::log10(bandwidth) - 30.0) / 10.0);
}

} // namespace triad
