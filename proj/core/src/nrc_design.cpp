#include "nrc/nrc_design.hpp"

#include <cmath>
#include <numbers>

namespace nrc {

void NrcSpec::validate() const {
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw Error("gamma must lie in (0,1]; the inner loop constant term n(1-gamma)w_n^3 turns negative above 1");
  }
  if (!(n > 0.0)) throw Error("nrc.n must be positive");
  if (taming_l && !(*taming_l > 0.0)) throw Error("nrc.taming_l must be positive");
}

NrcTuning tune_nrc(const PlantSpec& plant, const NrcSpec& spec) {
  spec.validate();
  const double g0 = dc_gain(build_plant(plant.without_delay()));
  if (!std::isfinite(g0) || g0 == 0.0) throw Error("plant DC gain must be finite and nonzero");
  NrcTuning t;
  t.k = spec.gamma / g0;
  t.omega_a = spec.n * plant.first_mode_omega();
  if (spec.taming_l) t.omega_l = *spec.taming_l * plant.first_mode_omega();
  return t;
}

RationalTF nrc_tf(double k, double omega_a) {
  if (!(omega_a > 0.0)) throw Error("NRC corner frequency must be positive");
  return {Polynomial{-k * omega_a, k}, Polynomial{omega_a, 1.0}};
}

RationalTF synthesize_nrc(const NrcTuning& tuning) {
  if (tuning.omega_l) return tame_nrc(tuning.k, tuning.omega_a, *tuning.omega_l);
  return nrc_tf(tuning.k, tuning.omega_a);
}

RationalTF synthesize_nrc(const PlantSpec& plant, const NrcSpec& spec) {
  return synthesize_nrc(tune_nrc(plant, spec));
}

StateSpaceRealization nrc_state_space(double k, double omega_a) {
  if (!(omega_a > 0.0)) throw Error("NRC corner frequency must be positive");
  return {-omega_a, 1.0, -2.0 * omega_a * k, k};
}

RationalTF tame_nrc(double k, double omega_a, double omega_l) {
  if (!(omega_l > 0.0)) throw Error("taming frequency must be positive");
  return tf_series(nrc_tf(k, omega_a), RationalTF{Polynomial{omega_l}, Polynomial{omega_l, 1.0}});
}

double min_damping_n(double zeta_n, double eta) {
  if (!(zeta_n >= 0.0)) throw Error("zeta_n must be nonnegative");
  if (!(eta > 0.0 && eta <= 1.0)) throw Error("load scaling eta must lie in (0,1]");
  return 2.0 * eta * (std::numbers::sqrt2 + zeta_n);
}

}  // namespace nrc
