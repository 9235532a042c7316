#pragma once

#include <optional>

#include "nrc/lti.hpp"
#include "nrc/plant.hpp"

namespace nrc {

/// Tuning record of the non-minimum-phase resonant controller.
///
/// gamma scales the loop DC gain |G(0) C_d(0)| and must lie in (0, 1];
/// n places the corner at omega_a = n * omega_n of the first mode;
/// taming_l, when present, adds a low-pass at omega_l = l * omega_n.
struct NrcSpec {
  double gamma = 1.0;
  double n = 3.0;
  std::optional<double> taming_l;

  void validate() const;

  friend bool operator==(const NrcSpec&, const NrcSpec&) = default;
};

/// Gamma used by time-domain presets; exact unity leaves C_d on the edge of
/// instability under coefficient rounding.
inline constexpr double kPracticalGamma = 0.999;

struct NrcTuning {
  double k = 0.0;
  double omega_a = 0.0;
  std::optional<double> omega_l;
};

/// Minimal realization z' = a z + b y, v = c z + d y.
struct StateSpaceRealization {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = 0.0;

  Complex at(double omega) const { return c * b / (Complex{0.0, omega} - a) + d; }
};

/// Derives k = gamma / G(0) and omega_a = n * omega_n from a plant.
NrcTuning tune_nrc(const PlantSpec& plant, const NrcSpec& spec);

/// k (s - omega_a) / (s + omega_a); no gamma validation, used for instability studies.
RationalTF nrc_tf(double k, double omega_a);

RationalTF synthesize_nrc(const PlantSpec& plant, const NrcSpec& spec);
RationalTF synthesize_nrc(const NrcTuning& tuning);

StateSpaceRealization nrc_state_space(double k, double omega_a);

/// k (s - omega_a)/(s + omega_a) * omega_l/(s + omega_l).
RationalTF tame_nrc(double k, double omega_a, double omega_l);

/// Smallest n giving real inner-loop poles: 2 eta (sqrt 2 + zeta_n).
double min_damping_n(double zeta_n, double eta = 1.0);

}  // namespace nrc
