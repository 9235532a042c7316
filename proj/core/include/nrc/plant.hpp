#pragma once

#include <optional>
#include <vector>

#include "nrc/lti.hpp"

namespace nrc {

/// One lightly damped structural mode, weight * w^2 / (s^2 + 2 zeta w s + w^2).
struct ModeSpec {
  double omega_rad_s = 0.0;
  double zeta = 0.0;
  double weight = 1.0;

  friend bool operator==(const ModeSpec&, const ModeSpec&) = default;
};

/// Modal plant description: gain * sum(modes) * amplifier * e^{-delay s}.
///
/// Modes are ordered by increasing frequency and the first mode carries unit
/// weight. The amplifier is a unity-DC first-order section placed once at
/// chain level.
struct PlantSpec {
  double gain = 1.0;
  std::vector<ModeSpec> modes;
  std::optional<double> amp_corner_rad_s;
  double delay_s = 0.0;

  void validate() const;
  double first_mode_omega() const { return modes.front().omega_rad_s; }
  /// gain * sum of modal weights.
  double dc_gain() const;
  PlantSpec without_delay() const;

  friend bool operator==(const PlantSpec&, const PlantSpec&) = default;
};

/// Single mode plant g w^2 / (s^2 + 2 zeta w s + w^2).
PlantSpec single_mode_plant(double gain, double omega_rad_s, double zeta, double delay_s = 0.0);

/// Undamped normalized two-mode plant with w_2 = alpha * w_n and weight beta.
PlantSpec two_mode_plant(double alpha, double beta, double omega_n);

RationalTF build_plant(const PlantSpec& spec);

/// Scales every modal frequency by eta in (0, 1] (added payload mass).
PlantSpec scale_load(const PlantSpec& spec, double eta);

/// Imaginary-axis double zero of the undamped two-mode plant, between w_n and alpha w_n.
double two_mode_zero(double alpha, double beta, double omega_n);

}  // namespace nrc
