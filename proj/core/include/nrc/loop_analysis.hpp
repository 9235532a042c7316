#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "nrc/lti.hpp"
#include "nrc/plant.hpp"

namespace nrc {

/// Inner (damping) loop G / (1 + G C_d) with its pole/zero report.
struct InnerLoopResult {
  RationalTF g_d;
  std::vector<Complex> poles;
  std::vector<Complex> zeros;
  /// DC gain; +/-infinity when a pole sits at s = 0.
  double dc = 0.0;
  /// Smallest damping ratio among complex-conjugate pole pairs.
  std::optional<double> min_resonant_damping;

  bool has_integrator() const;
};

struct RouthReport {
  std::vector<double> first_column;
  bool stable = false;
  bool marginal = false;
};

struct RootLocusTrace {
  std::vector<double> n_values;
  std::vector<Complex> p2;
  std::vector<Complex> p3;
  std::optional<double> bifurcation_n;
};

enum class PeakShift { unchanged, raised, lowered };

struct SecondPeak {
  double omega_rad_s = 0.0;
  double magnitude = 0.0;
  /// Shift expected from n relative to alpha.
  PeakShift expected = PeakShift::unchanged;
};

/// Builds the report for an already-closed loop.
InnerLoopResult describe_loop(RationalTF g_d);

InnerLoopResult inner_closed_loop(const PlantSpec& plant, const RationalTF& nrc);

/// s^3 + (n + 2 zeta) w s^2 + (2 zeta n + 1 + gamma) w^2 s + n (1 - gamma) w^3.
Polynomial inner_charpoly(double omega_n, double zeta_n, double gamma, double n);

RouthReport routh_cubic(const Polynomial& charpoly);

/// Roots of a real cubic; exactly real whenever the discriminant is nonnegative.
std::array<Complex, 3> cubic_roots(const Polynomial& cubic);

/// Inner-loop poles for gamma = 1: {0, p2, p3}.
std::array<Complex, 3> inner_poles_closed_form(double omega_n, double zeta_n, double n);

/// zeta = -Re(p) / |p|.
double damping_ratio(Complex p);

RootLocusTrace root_locus_n(const PlantSpec& plant, double gamma, std::span<const double> n_grid);
void write_root_locus_csv(std::ostream& os, const RootLocusTrace& trace);

/// gamma = 1, zeta = 0 inner loop with a first-order Pade delay, m = w_b / w_n.
RationalTF delayed_inner_cl(double omega_n, double n, double m);
/// m = 2 / (tau w_n).
double pade_m_from_delay(double tau_s, double omega_n);
/// m whose Pade section lags phi_deg at w_n: 2 atan(1/m) = phi.
double m_for_phase_lag(double phi_deg);
/// Reference lags of 10, 30, 60 and 85 degrees at w_n.
std::array<double, 4> phase_lag_preset_m();

/// Characteristic polynomial of the loaded (eta) plant under an NRC tuned at eta = 1, gamma = 1.
Polynomial loaded_charpoly(double omega_n, double zeta_n, double n, double eta);
/// n >= 2 eta (sqrt 2 + zeta_n), cross-checked against the roots of loaded_charpoly.
bool loaded_damping_check(double zeta_n, double n, double eta);

RationalTF two_mode_inner_cl(double alpha, double beta, double gamma, double n, double omega_n);
SecondPeak damped_second_peak(double alpha, double beta, double gamma, double n, double omega_n);

/// gamma = 1, zeta = 0 inner loop with the tamed NRC; damping reported for the cubic factor.
InnerLoopResult tamed_inner_cl(double omega_n, double n, double l);

}  // namespace nrc
