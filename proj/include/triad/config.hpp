#pragma once

// Scenario configuration and its JSON representation.
//
// The JSON document uses the field names of SimConfig one-to-one, with the
// propagation constants in a nested "channel" object. Absent keys keep their
// defaults; unknown keys are rejected.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "triad/channel.hpp"
#include "triad/error.hpp"
#include "triad/noma_power.hpp"

namespace triad {

struct SimConfig {
  double coverage_radius = 300.0;   ///< m
  std::size_t n_subcarriers = 128;
  double bandwidth = 1.0e6;         ///< Hz
  double p_max = 0.2;               ///< W
  double uav_altitude = 100.0;      ///< m
  double circuit_power = 5.0;       ///< dBm
  double data_bits = 60'000.0;      ///< bits per UE per frame
  std::size_t n_ues = 70;
  std::size_t n_tags = 10;
  double frame_duration = 1.0;      ///< s
  std::size_t k_max = 10;
  std::size_t kmeans_max_iters = 300;
  std::size_t n_trials = 100;
  std::uint64_t seed = 1;
  bool ambc_enabled = true;
  ChannelParams channel;

  double circuit_power_watts() const { return dbm_to_watts(circuit_power); }
  double subcarrier_bandwidth() const { return bandwidth / static_cast<double>(n_subcarriers); }
  RateDemand demand() const { return {data_bits, frame_duration}; }

  /// Throws ConfigError naming the offending key and its legal range.
  void validate() const;

  friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

namespace detail {

inline void require_positive(std::string_view key, double value) {
  if (!(std::isfinite(value) && value > 0.0))
    throw ConfigError(std::string(key) + " = " + std::to_string(value) + " is invalid; legal range (0, inf)");
}

inline void require_at_least(std::string_view key, std::size_t value, std::size_t minimum) {
  if (value < minimum)
    throw ConfigError(std::string(key) + " = " + std::to_string(value) + " is invalid; legal range [" +
                      std::to_string(minimum) + ", inf)");
}

} // namespace detail

inline void SimConfig::validate() const {
  detail::require_positive("coverage_radius", coverage_radius);
  detail::require_at_least("n_subcarriers", n_subcarriers, 1);
  detail::require_positive("bandwidth", bandwidth);
  detail::require_positive("p_max", p_max);
  detail::require_positive("uav_altitude", uav_altitude);
  // UE antennas sit at 1.5 m, so the UAV must fly above them.
  if (!(uav_altitude > 1.5))
    throw ConfigError("uav_altitude = " + std::to_string(uav_altitude) + " is invalid; legal range (1.5, inf)");
  if (!std::isfinite(circuit_power))
    throw ConfigError("circuit_power must be a finite dBm value");
  detail::require_positive("data_bits", data_bits);
  detail::require_at_least("n_ues", n_ues, 1);
  detail::require_positive("frame_duration", frame_duration);
  detail::require_at_least("k_max", k_max, 1);
  detail::require_at_least("kmeans_max_iters", kmeans_max_iters, 1);
  detail::require_at_least("n_trials", n_trials, 1);

  if (!(std::isfinite(channel.carrier_freq) && channel.carrier_freq > 0.0))
    throw ConfigError("channel.carrier_freq is invalid; legal range (0, inf)");
  if (!std::isfinite(channel.plos_a) || !std::isfinite(channel.plos_b))
    throw ConfigError("channel.plos_a / channel.plos_b must be finite");
  if (!(channel.eta_los >= 0.0 && std::isfinite(channel.eta_los)))
    throw ConfigError("channel.eta_los is invalid; legal range [0, channel.eta_nlos]");
  if (!(channel.eta_nlos >= channel.eta_los && std::isfinite(channel.eta_nlos)))
    throw ConfigError("channel.eta_nlos is invalid; legal range [channel.eta_los, inf)");
  if (!std::isfinite(channel.noise_psd))
    throw ConfigError("channel.noise_psd must be finite");
  if (!(channel.reflection_coeff >= 0.0 && channel.reflection_coeff <= 1.0))
    throw ConfigError("channel.reflection_coeff is invalid; legal range [0, 1]");
}

inline nlohmann::json to_json(const SimConfig& c) {
  return nlohmann::json{
      {"coverage_radius", c.coverage_radius},
      {"n_subcarriers", c.n_subcarriers},
      {"bandwidth", c.bandwidth},
      {"p_max", c.p_max},
      {"uav_altitude", c.uav_altitude},
      {"circuit_power", c.circuit_power},
      {"data_bits", c.data_bits},
      {"n_ues", c.n_ues},
      {"n_tags", c.n_tags},
      {"frame_duration", c.frame_duration},
      {"k_max", c.k_max},
      {"kmeans_max_iters", c.kmeans_max_iters},
      {"n_trials", c.n_trials},
      {"seed", c.seed},
      {"ambc_enabled", c.ambc_enabled},
      {"channel",
       {
           {"carrier_freq", c.channel.carrier_freq},
           {"plos_a", c.channel.plos_a},
           {"plos_b", c.channel.plos_b},
           {"eta_los", c.channel.eta_los},
           {"eta_nlos", c.channel.eta_nlos},
           {"noise_psd", c.channel.noise_psd},
           {"reflection_coeff", c.channel.reflection_coeff},
       }},
  };
}

namespace detail {

inline void read_number(const nlohmann::json& j, const std::string& key, double& out) {
  if (!j.is_number())
    throw ConfigError(key + ": expected a number, got " + j.dump());
  out = j.get<double>();
}

inline void read_count(const nlohmann::json& j, const std::string& key, std::size_t& out) {
  if (j.is_number_integer()) {
    if (j.is_number_unsigned() || j.get<std::int64_t>() >= 0) {
      out = j.get<std::size_t>();
      return;
    }
    throw ConfigError(key + " = " + j.dump() + " is invalid; legal range [0, inf)");
  }
  if (j.is_number_float()) {
    const double v = j.get<double>();
    if (v >= 0.0 && v == std::floor(v) && v < 9.0e15) {
      out = static_cast<std::size_t>(v);
      return;
    }
  }
  throw ConfigError(key + ": expected a non-negative integer, got " + j.dump());
}

inline void read_seed(const nlohmann::json& j, const std::string& key, std::uint64_t& out) {
  if (!j.is_number_integer() || (!j.is_number_unsigned() && j.get<std::int64_t>() < 0))
    throw ConfigError(key + ": expected a non-negative 64-bit integer, got " + j.dump());
  out = j.get<std::uint64_t>();
}

inline void read_flag(const nlohmann::json& j, const std::string& key, bool& out) {
  if (!j.is_boolean())
    throw ConfigError(key + ": expected true or false, got " + j.dump());
  out = j.get<bool>();
}

} // namespace detail

/// Applies the keys present in `doc` on top of `base`, then validates.
inline SimConfig config_from_json(const nlohmann::json& doc, SimConfig base = {}) {
  if (!doc.is_object())
    throw ConfigError("configuration must be a JSON object");
  SimConfig c = base;
  for (const auto& [key, value] : doc.items()) {
    if (key == "coverage_radius") detail::read_number(value, key, c.coverage_radius);
    else if (key == "n_subcarriers") detail::read_count(value, key, c.n_subcarriers);
    else if (key == "bandwidth") detail::read_number(value, key, c.bandwidth);
    else if (key == "p_max") detail::read_number(value, key, c.p_max);
    else if (key == "uav_altitude") detail::read_number(value, key, c.uav_altitude);
    else if (key == "circuit_power") detail::read_number(value, key, c.circuit_power);
    else if (key == "data_bits") detail::read_number(value, key, c.data_bits);
    else if (key == "n_ues") detail::read_count(value, key, c.n_ues);
    else if (key == "n_tags") detail::read_count(value, key, c.n_tags);
    else if (key == "frame_duration") detail::read_number(value, key, c.frame_duration);
    else if (key == "k_max") detail::read_count(value, key, c.k_max);
    else if (key == "kmeans_max_iters") detail::read_count(value, key, c.kmeans_max_iters);
    else if (key == "n_trials") detail::read_count(value, key, c.n_trials);
    else if (key == "seed") detail::read_seed(value, key, c.seed);
    else if (key == "ambc_enabled") detail::read_flag(value, key, c.ambc_enabled);
    else if (key == "channel") {
      if (!value.is_object())
        throw ConfigError("channel: expected an object");
      for (const auto& [ckey, cvalue] : value.items()) {
        const std::string full = "channel." + ckey;
        if (ckey == "carrier_freq") detail::read_number(cvalue, full, c.channel.carrier_freq);
        else if (ckey == "plos_a") detail::read_number(cvalue, full, c.channel.plos_a);
        else if (ckey == "plos_b") detail::read_number(cvalue, full, c.channel.plos_b);
        else if (ckey == "eta_los") detail::read_number(cvalue, full, c.channel.eta_los);
        else if (ckey == "eta_nlos") detail::read_number(cvalue, full, c.channel.eta_nlos);
        else if (ckey == "noise_psd") detail::read_number(cvalue, full, c.channel.noise_psd);
        else if (ckey == "reflection_coeff") detail::read_number(cvalue, full, c.channel.reflection_coeff);
        else throw ConfigError("unknown configuration key: " + full);
      }
    } else {
      throw ConfigError("unknown configuration key: " + key);
    }
  }
  c.validate();
  return c;
}

/// Parses a JSON configuration document; absent fields take the defaults.
inline SimConfig parse_config(std::string_view text, SimConfig base = {}) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("configuration is not valid JSON: ") + e.what());
  }
  return config_from_json(doc, base);
}

/// Applies "key=value" overrides. Keys may address the channel block as
/// "channel.<name>". Values are read as JSON literals (numbers, true/false).
inline SimConfig apply_overrides(const SimConfig& base, std::span<const std::string> overrides) {
  nlohmann::json patch = nlohmann::json::object();
  for (const std::string& item : overrides) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0)
      throw ConfigError("override '" + item + "' is not of the form key=value");
    const std::string key = item.substr(0, eq);
    const std::string text = item.substr(eq + 1);
    nlohmann::json value;
    try {
      value = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error&) {
      throw ConfigError(key + ": cannot parse override value '" + text + "'");
    }
    if (key.rfind("channel.", 0) == 0) {
      patch["channel"][key.substr(8)] = value;
    } else {
      patch[key] = value;
    }
  }
  return config_from_json(patch, base);
}

} // namespace triad
