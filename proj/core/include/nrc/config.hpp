#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "nrc/nrc_design.hpp"
#include "nrc/plant.hpp"
#include "nrc/tracking.hpp"

namespace nrc {

/// Frequencies are kept in Hz exactly as written; the *_spec() helpers convert.
struct ModeConfig {
  double freq_hz = 0.0;
  double zeta = 0.0;
  double weight = 1.0;

  friend bool operator==(const ModeConfig&, const ModeConfig&) = default;
};

struct PlantConfig {
  double gain = 1.0;
  std::vector<ModeConfig> modes;
  std::optional<double> amp_corner_hz;
  std::optional<double> delay_us;

  PlantSpec to_spec() const;

  friend bool operator==(const PlantConfig&, const PlantConfig&) = default;
};

struct NotchConfig {
  double freq_hz = 0.0;
  double q_num = 1.0;
  double q_den = 1.0;

  friend bool operator==(const NotchConfig&, const NotchConfig&) = default;
};

/// Exactly one of kp and omega_b_hz is set.
struct TrackerConfig {
  std::optional<double> kp;
  std::optional<double> omega_b_hz;
  double omega_i_hz = 0.0;
  std::vector<NotchConfig> notches;
  std::optional<double> lowpass_hz;

  /// Tracker with the given proportional gain.
  TrackerSpec to_spec(double kp_value) const;

  friend bool operator==(const TrackerConfig&, const TrackerConfig&) = default;
};

struct GridConfig {
  double f_min_hz = 1.0;
  double f_max_hz = 15000.0;
  int pts_per_decade = 400;

  std::vector<double> omegas() const;

  friend bool operator==(const GridConfig&, const GridConfig&) = default;
};

struct ReferenceConfig {
  /// "sine" or "step".
  std::string kind = "sine";
  double amplitude = 1.0;
  double freq_hz = 100.0;

  friend bool operator==(const ReferenceConfig&, const ReferenceConfig&) = default;
};

struct DisturbanceConfig {
  double amplitude = 0.0;
  double freq_hz = 0.0;

  friend bool operator==(const DisturbanceConfig&, const DisturbanceConfig&) = default;
};

struct SimConfig {
  double ts_s = 30e-6;
  double duration_s = 0.1;
  ReferenceConfig reference;
  std::uint64_t seed = 1;
  double noise_amplitude = 0.0;
  std::optional<DisturbanceConfig> disturbance;
  /// Shift the output by the T_yr phase lag before scoring a sine reference.
  bool compensate_phase = false;
  /// Sine frequencies for `sweep`.
  std::vector<double> sweep_hz;

  friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

struct TargetsConfig {
  double gm_db = 6.0;
  double pm_deg = 45.0;
  double bound_db = 3.0;

  friend bool operator==(const TargetsConfig&, const TargetsConfig&) = default;
};

struct ExperimentConfig {
  PlantConfig plant;
  NrcSpec nrc;
  std::optional<TrackerConfig> tracker;
  GridConfig grid;
  std::optional<SimConfig> sim;
  TargetsConfig targets;

  /// Enforces every module invariant; throws Error naming the offending key.
  void validate() const;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

ExperimentConfig parse_config_text(const std::string& json_text);
ExperimentConfig parse_config(const std::filesystem::path& path);
std::string serialize_config(const ExperimentConfig& config);

}  // namespace nrc
