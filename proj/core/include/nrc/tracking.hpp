#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nrc/lti.hpp"

namespace nrc {

/// kp (1 + omega_i / s); omega_i = 0 is a pure proportional gain.
struct PiSpec {
  double kp = 1.0;
  double omega_i_rad_s = 0.0;

  friend bool operator==(const PiSpec&, const PiSpec&) = default;
};

/// ((s/w)^2 + s/(q_num w) + 1) / ((s/w)^2 + s/(q_den w) + 1).
struct NotchSpec {
  double omega_rad_s = 0.0;
  double q_num = 1.0;
  double q_den = 1.0;

  friend bool operator==(const NotchSpec&, const NotchSpec&) = default;
};

struct TrackerSpec {
  PiSpec pi;
  std::vector<NotchSpec> notches;
  std::optional<double> lowpass_corner_rad_s;

  void validate() const;

  friend bool operator==(const TrackerSpec&, const TrackerSpec&) = default;
};

/// Point evaluator used to refine grid crossings.
using FrfFn = std::function<Complex(double omega)>;

RationalTF notch_filter(const NotchSpec& spec);
RationalTF pi_controller(const PiSpec& spec);
RationalTF build_tracker(const TrackerSpec& spec);

/// kp = 1 / |G_d(i omega_b)|.
double tune_kp(const FrfFn& g_d, double omega_b);
double tune_kp(const RationalTF& g_d, double omega_b);
/// Interpolates |G_d| log-log between grid samples.
double tune_kp(std::span<const FrfSample> g_d, double omega_b);

struct PmFeasibility {
  double value = 0.0;
  bool feasible = false;
};

inline constexpr double kPmRoundedTan60 = 1.75;

/// c nu^2 n^2 - 2 nu^3 n + c (1 - 2 nu^2) <= 0 with c = 1.75, or tan 60 when exact.
PmFeasibility pm_feasibility(double nu, double n, bool exact_tan60 = false);
/// Closed interval of n satisfying pm_feasibility for a given nu, if nonempty.
std::optional<std::pair<double, double>> pm_feasible_n(double nu, bool exact_tan60 = false);

/// Step error 2 / (2 + kp) for a P-only tracker around a near-unity gamma NRC.
double steady_state_error(double kp);
/// Final-value step error (1 + G(0) C_d(0)) / (1 + G(0)(kp + C_d(0))) of the dual loop.
double final_value_step_error(double plant_dc, double nrc_dc, double kp);

/// The six dual closed-loop responses on a grid.
///
/// T_xr equals T_yr and PS_xd equals PS_yd, so those are not stored twice;
/// the accessors return the aliased arrays.
struct SensitivityBundle {
  std::vector<double> grid;
  std::vector<Complex> t_yr;
  std::vector<Complex> t_xr_comp;
  std::vector<Complex> s_yn;
  std::vector<Complex> s_xn;
  std::vector<Complex> ps_yd;
  std::vector<Complex> loop_gain;
  /// Grid indices where 1 + L_D vanishes; values there are infinite.
  std::vector<std::size_t> singular;

  const std::vector<Complex>& t_xr() const { return t_yr; }
  const std::vector<Complex>& ps_xd() const { return ps_yd; }
};

SensitivityBundle dual_sensitivities(std::span<const Complex> plant, std::span<const Complex> ct,
                                     std::span<const Complex> cd, std::span<const double> grid);
SensitivityBundle dual_sensitivities(const RationalTF& plant, const RationalTF& ct, const RationalTF& cd,
                                     std::span<const double> grid);

/// Root-sum-square real error from reference, disturbance and noise spectra.
std::vector<double> real_error_budget(const SensitivityBundle& bundle, std::span<const double> r_amp,
                                      std::span<const double> d_amp, std::span<const double> n_amp);

struct BandwidthReport {
  double bound_db = 3.0;
  /// Empty when |T| never leaves the band on the grid.
  std::optional<double> omega_c_rad_s;
};

/// First exit of |T| from the +/-bound_db band, refined with `refine` when given.
BandwidthReport bandwidth(std::span<const double> grid, std::span<const Complex> t, double bound_db,
                          const FrfFn& refine = {});

struct Crossover {
  double omega_rad_s = 0.0;
  double phase_margin_deg = 0.0;
  /// |L| increases through unity at this crossing.
  bool rising = false;
};

struct MarginsReport {
  std::vector<Crossover> crossovers;
  std::optional<double> gain_margin_db;
  std::optional<double> phase_crossover_rad_s;
  bool no_crossing = false;
};

/// Unity-gain crossings with phase margins and the gain margin at the first -180 deg crossing.
MarginsReport margins(std::span<const double> grid, std::span<const Complex> loop, const FrfFn& refine = {});

struct ObjectiveTargets {
  double bound_db = 3.0;
  /// "Gain >> 1" threshold for |C_t| and |L_D(i w_n)|.
  double high_gain_db = 20.0;
  /// O1 passes when omega_c exceeds this; zero means omega_n.
  double min_bandwidth_rad_s = 0.0;
  /// O2 passes when omega_Ct reaches this.
  double min_ct_band_rad_s = 0.0;
  /// O4 passes when max |L_D| over the high band stays below this.
  double max_hi_band_loop_gain = 1.0;
};

struct ObjectiveMetric {
  std::string name;
  /// Bandwidths in rad/s, gains as magnitudes; absent when undefined on the grid.
  std::optional<double> value;
  double target = 0.0;
  bool pass = false;
};

struct ObjectiveReport {
  ObjectiveMetric o1_bandwidth;
  ObjectiveMetric o2_tracker_band;
  ObjectiveMetric o3_resonance_loop_gain;
  ObjectiveMetric o4_hi_band_loop_gain;
};

ObjectiveReport objective_report(const SensitivityBundle& bundle, std::span<const Complex> ct, double omega_n,
                                 std::pair<double, double> hi_band, const ObjectiveTargets& targets = {},
                                 const FrfFn& t_refine = {}, const FrfFn& loop_eval = {});

}  // namespace nrc
