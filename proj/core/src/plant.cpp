#include "nrc/plant.hpp"

#include <cmath>

namespace nrc {

void PlantSpec::validate() const {
  if (!(gain > 0.0)) throw Error("plant.gain must be positive");
  if (modes.empty()) throw Error("plant.modes must contain at least one mode");
  double prev = 0.0;
  for (std::size_t i = 0; i < modes.size(); ++i) {
    const ModeSpec& m = modes[i];
    if (!(m.omega_rad_s > 0.0)) throw Error("plant.modes[" + std::to_string(i) + "] frequency must be positive");
    if (!(m.zeta >= 0.0)) throw Error("plant.modes[" + std::to_string(i) + "].zeta must be nonnegative");
    if (!(m.weight >= 0.0)) throw Error("plant.modes[" + std::to_string(i) + "].weight must be nonnegative");
    if (!(m.omega_rad_s > prev)) throw Error("plant.modes must be sorted by strictly increasing frequency");
    prev = m.omega_rad_s;
  }
  if (modes.front().weight != 1.0) throw Error("plant.modes[0].weight must be 1");
  if (amp_corner_rad_s && !(*amp_corner_rad_s > 0.0)) throw Error("plant.amp_corner must be positive");
  if (!(delay_s >= 0.0)) throw Error("plant.delay must be nonnegative");
}

double PlantSpec::dc_gain() const {
  double w = 0.0;
  for (const ModeSpec& m : modes) w += m.weight;
  return gain * w;
}

PlantSpec PlantSpec::without_delay() const {
  PlantSpec p = *this;
  p.delay_s = 0.0;
  return p;
}

PlantSpec single_mode_plant(double gain, double omega_rad_s, double zeta, double delay_s) {
  PlantSpec p;
  p.gain = gain;
  p.modes = {ModeSpec{omega_rad_s, zeta, 1.0}};
  p.delay_s = delay_s;
  p.validate();
  return p;
}

PlantSpec two_mode_plant(double alpha, double beta, double omega_n) {
  if (!(alpha > 1.0)) throw Error("alpha must exceed 1");
  if (!(beta >= 0.0)) throw Error("beta must be nonnegative");
  PlantSpec p;
  p.modes = {ModeSpec{omega_n, 0.0, 1.0}, ModeSpec{alpha * omega_n, 0.0, beta}};
  p.validate();
  return p;
}

RationalTF build_plant(const PlantSpec& spec) {
  spec.validate();
  std::vector<Polynomial> dens;
  dens.reserve(spec.modes.size());
  for (const ModeSpec& m : spec.modes) {
    const double w = m.omega_rad_s;
    dens.push_back(Polynomial{w * w, 2.0 * m.zeta * w, 1.0});
  }
  Polynomial num{0.0};
  Polynomial den{1.0};
  for (std::size_t i = 0; i < spec.modes.size(); ++i) {
    const double w = spec.modes[i].omega_rad_s;
    Polynomial term{spec.modes[i].weight * w * w};
    for (std::size_t j = 0; j < dens.size(); ++j) {
      if (j != i) term = term * dens[j];
    }
    num = num + term;
    den = den * dens[i];
  }
  num *= spec.gain;
  RationalTF g{num, den, spec.delay_s};
  if (spec.amp_corner_rad_s) {
    const double wa = *spec.amp_corner_rad_s;
    g = tf_series(g, RationalTF{Polynomial{wa}, Polynomial{wa, 1.0}});
  }
  return g;
}

PlantSpec scale_load(const PlantSpec& spec, double eta) {
  if (!(eta > 0.0 && eta <= 1.0)) throw Error("load scaling eta must lie in (0,1]");
  PlantSpec out = spec;
  for (ModeSpec& m : out.modes) m.omega_rad_s *= eta;
  return out;
}

double two_mode_zero(double alpha, double beta, double omega_n) {
  if (!(alpha > 1.0)) throw Error("alpha must exceed 1");
  if (!(beta > 0.0)) throw Error("beta must be positive");
  if (!(omega_n > 0.0)) throw Error("omega_n must be positive");
  const double wz = alpha * omega_n * std::sqrt((1.0 + beta) / (1.0 + alpha * alpha * beta));
  if (!(wz > omega_n && wz < alpha * omega_n)) throw Error("two-mode zero left the open interval (w_n, alpha w_n)");
  return wz;
}

}  // namespace nrc
