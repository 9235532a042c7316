#include "nrc/tracking.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace nrc {

namespace {

double lin_to_db(double m) { return 20.0 * std::log10(m); }

void require_aligned(std::size_t n, std::span<const double> grid, const char* what) {
  if (n != grid.size()) throw Error(std::string(what) + " FRF does not match the grid length");
}

bool is_finite(Complex v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); }

/// Bisection on f over [lo, hi] assuming a sign change; log-spaced midpoints.
template <typename F>
double bisect_log(F&& f, double lo, double hi, bool f_lo_positive) {
  for (int i = 0; i < 200 && hi / lo - 1.0 > 1e-13; ++i) {
    const double mid = std::sqrt(lo * hi);
    if ((f(mid) > 0.0) == f_lo_positive) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return std::sqrt(lo * hi);
}

double wrap180(double deg) {
  double w = std::fmod(deg + 180.0, 360.0);
  if (w <= 0.0) w += 360.0;
  return w - 180.0;
}

}  // namespace

void TrackerSpec::validate() const {
  if (!(pi.kp > 0.0)) throw Error("tracker.kp must be positive");
  if (!(pi.omega_i_rad_s >= 0.0)) throw Error("tracker.omega_i must be nonnegative");
  for (std::size_t i = 0; i < notches.size(); ++i) {
    const auto& nt = notches[i];
    const std::string key = "tracker.notches[" + std::to_string(i) + "]";
    if (!(nt.omega_rad_s > 0.0)) throw Error(key + ".freq must be positive");
    if (!(nt.q_num > 0.0 && nt.q_den > 0.0)) throw Error(key + " quality factors must be positive");
    for (std::size_t j = 0; j < i; ++j) {
      if (notches[j].omega_rad_s == nt.omega_rad_s) throw Error(key + " duplicates another notch frequency");
    }
  }
  if (lowpass_corner_rad_s && !(*lowpass_corner_rad_s > 0.0)) throw Error("tracker.lowpass must be positive");
}

RationalTF notch_filter(const NotchSpec& spec) {
  if (!(spec.omega_rad_s > 0.0 && spec.q_num > 0.0 && spec.q_den > 0.0)) {
    throw Error("notch needs positive frequency and quality factors");
  }
  const double w = spec.omega_rad_s;
  return {Polynomial{1.0, 1.0 / (spec.q_num * w), 1.0 / (w * w)},
          Polynomial{1.0, 1.0 / (spec.q_den * w), 1.0 / (w * w)}};
}

RationalTF pi_controller(const PiSpec& spec) {
  if (!(spec.kp > 0.0)) throw Error("tracker.kp must be positive");
  if (spec.omega_i_rad_s == 0.0) return RationalTF::gain(spec.kp);
  return {Polynomial{spec.kp * spec.omega_i_rad_s, spec.kp}, Polynomial{0.0, 1.0}};
}

RationalTF build_tracker(const TrackerSpec& spec) {
  spec.validate();
  RationalTF ct = pi_controller(spec.pi);
  for (const auto& nt : spec.notches) ct = tf_series(ct, notch_filter(nt));
  if (spec.lowpass_corner_rad_s) {
    const double wl = *spec.lowpass_corner_rad_s;
    ct = tf_series(ct, RationalTF{Polynomial{wl}, Polynomial{wl, 1.0}});
  }
  return ct;
}

double tune_kp(const FrfFn& g_d, double omega_b) {
  if (!(omega_b > 0.0)) throw Error("omega_b must be positive");
  const double m = std::abs(g_d(omega_b));
  if (!std::isfinite(m)) throw Error("G_d has a pole at omega_b");
  if (m == 0.0) throw Error("G_d vanishes at omega_b");
  return 1.0 / m;
}

double tune_kp(const RationalTF& g_d, double omega_b) {
  return tune_kp([&g_d](double w) { return g_d.at(w); }, omega_b);
}

double tune_kp(std::span<const FrfSample> g_d, double omega_b) {
  if (g_d.size() < 2) throw Error("FRF needs at least two samples");
  if (omega_b < g_d.front().omega_rad_s || omega_b > g_d.back().omega_rad_s) {
    throw Error("omega_b lies outside the FRF grid");
  }
  auto it = std::lower_bound(g_d.begin(), g_d.end(), omega_b,
                             [](const FrfSample& s, double w) { return s.omega_rad_s < w; });
  if (it == g_d.begin()) ++it;
  const auto& b = *it;
  const auto& a = *(it - 1);
  if (a.singular || b.singular) throw Error("G_d has a pole at omega_b");
  double m;
  if (b.omega_rad_s == omega_b) {
    m = std::abs(b.value);
  } else {
    const double la = std::log(std::abs(a.value));
    const double lb = std::log(std::abs(b.value));
    const double t = std::log(omega_b / a.omega_rad_s) / std::log(b.omega_rad_s / a.omega_rad_s);
    m = std::exp(la + t * (lb - la));
  }
  if (!std::isfinite(m)) throw Error("G_d has a pole at omega_b");
  if (m == 0.0) throw Error("G_d vanishes at omega_b");
  return 1.0 / m;
}

PmFeasibility pm_feasibility(double nu, double n, bool exact_tan60) {
  if (!(nu > 0.0 && n > 0.0)) throw Error("nu and n must be positive");
  const double c = exact_tan60 ? std::tan(std::numbers::pi / 3.0) : kPmRoundedTan60;
  const double v = c * nu * nu * n * n - 2.0 * nu * nu * nu * n + c * (1.0 - 2.0 * nu * nu);
  return {v, v <= 0.0};
}

std::optional<std::pair<double, double>> pm_feasible_n(double nu, bool exact_tan60) {
  if (!(nu > 0.0)) throw Error("nu must be positive");
  const double c = exact_tan60 ? std::tan(std::numbers::pi / 3.0) : kPmRoundedTan60;
  const double a = c * nu * nu;
  const double b = -2.0 * nu * nu * nu;
  const double cc = c * (1.0 - 2.0 * nu * nu);
  const double disc = b * b - 4.0 * a * cc;
  if (disc < 0.0) return std::nullopt;
  const double sq = std::sqrt(disc);
  double lo = (-b - sq) / (2.0 * a);
  const double hi = (-b + sq) / (2.0 * a);
  if (hi <= 0.0) return std::nullopt;
  lo = std::max(lo, 0.0);
  return std::pair{lo, hi};
}

double steady_state_error(double kp) {
  if (!(kp > 0.0)) throw Error("kp must be positive");
  return 2.0 / (2.0 + kp);
}

double final_value_step_error(double plant_dc, double nrc_dc, double kp) {
  const double inner = 1.0 + plant_dc * nrc_dc;
  const double den = inner + plant_dc * kp;
  if (den == 0.0) throw Error("dual loop has a pole at s = 0");
  return inner / den;
}

SensitivityBundle dual_sensitivities(std::span<const Complex> plant, std::span<const Complex> ct,
                                     std::span<const Complex> cd, std::span<const double> grid) {
  require_aligned(plant.size(), grid, "plant");
  require_aligned(ct.size(), grid, "tracker");
  require_aligned(cd.size(), grid, "NRC");
  SensitivityBundle b;
  b.grid.assign(grid.begin(), grid.end());
  const std::size_t n = grid.size();
  b.t_yr.resize(n);
  b.t_xr_comp.resize(n);
  b.s_yn.resize(n);
  b.s_xn.resize(n);
  b.ps_yd.resize(n);
  b.loop_gain.resize(n);
  constexpr double inf = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const Complex g = plant[i];
    const Complex ld = g * (ct[i] + cd[i]);
    const Complex one_plus = 1.0 + ld;
    b.loop_gain[i] = ld;
    if (std::abs(one_plus) <= 1e-12 * std::max(1.0, std::abs(ld)) || !is_finite(ld)) {
      b.singular.push_back(i);
      const Complex mark{inf, 0.0};
      b.t_yr[i] = b.t_xr_comp[i] = b.s_yn[i] = b.s_xn[i] = b.ps_yd[i] = mark;
      continue;
    }
    const Complex s = 1.0 / one_plus;
    b.s_yn[i] = s;
    b.t_yr[i] = g * ct[i] * s;
    b.t_xr_comp[i] = (1.0 + g * cd[i]) * s;
    b.s_xn[i] = -ld * s;
    b.ps_yd[i] = g * s;
  }
  return b;
}

SensitivityBundle dual_sensitivities(const RationalTF& plant, const RationalTF& ct, const RationalTF& cd,
                                     std::span<const double> grid) {
  std::vector<Complex> g(grid.size()), t(grid.size()), d(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    g[i] = plant.at(grid[i]);
    t[i] = ct.at(grid[i]);
    d[i] = cd.at(grid[i]);
  }
  return dual_sensitivities(g, t, d, grid);
}

std::vector<double> real_error_budget(const SensitivityBundle& bundle, std::span<const double> r_amp,
                                      std::span<const double> d_amp, std::span<const double> n_amp) {
  const std::size_t n = bundle.grid.size();
  if (r_amp.size() != n || d_amp.size() != n || n_amp.size() != n) {
    throw Error("error spectra must match the bundle grid");
  }
  std::vector<double> e(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (r_amp[i] < 0.0 || d_amp[i] < 0.0 || n_amp[i] < 0.0) throw Error("error spectra must be nonnegative");
    e[i] = std::hypot(std::abs(bundle.t_xr_comp[i]) * r_amp[i], std::abs(bundle.ps_xd()[i]) * d_amp[i],
                      std::abs(bundle.s_xn[i]) * n_amp[i]);
  }
  return e;
}

BandwidthReport bandwidth(std::span<const double> grid, std::span<const Complex> t, double bound_db,
                          const FrfFn& refine) {
  if (!(bound_db > 0.0)) throw Error("bandwidth bound must be positive");
  require_aligned(t.size(), grid, "closed-loop");
  BandwidthReport r;
  r.bound_db = bound_db;
  if (grid.empty()) return r;
  auto excess = [bound_db](Complex v) {
    if (!is_finite(v)) return std::numeric_limits<double>::infinity();
    return std::abs(lin_to_db(std::abs(v))) - bound_db;
  };
  if (excess(t[0]) > 0.0) throw Error("|T| at the first grid frequency is already outside the band");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double ei = excess(t[i]);
    if (ei <= 0.0) continue;
    const double lo = grid[i - 1];
    const double hi = grid[i];
    if (refine) {
      r.omega_c_rad_s = bisect_log([&](double w) { return excess(refine(w)); }, lo, hi, false);
    } else {
      const double e0 = excess(t[i - 1]);
      const double frac = std::isfinite(ei) ? -e0 / (ei - e0) : 0.5;
      r.omega_c_rad_s = lo * std::pow(hi / lo, frac);
    }
    return r;
  }
  return r;
}

MarginsReport margins(std::span<const double> grid, std::span<const Complex> loop, const FrfFn& refine) {
  require_aligned(loop.size(), grid, "loop");
  MarginsReport rep;
  const std::size_t n = grid.size();
  const std::vector<double> phase = unwrapped_phase_deg(loop);
  std::vector<double> lm(n);
  for (std::size_t i = 0; i < n; ++i) lm[i] = std::log(std::abs(loop[i]));

  auto align = [](double raw, double near) { return raw + 360.0 * std::round((near - raw) / 360.0); };

  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (!std::isfinite(lm[i]) || !std::isfinite(lm[i + 1])) continue;
    const bool at_i = lm[i] == 0.0;
    if (!at_i && !(lm[i] * lm[i + 1] < 0.0)) continue;
    Crossover c;
    c.rising = lm[i + 1] > lm[i];
    double ph;
    if (at_i) {
      c.omega_rad_s = grid[i];
      ph = phase[i];
    } else {
      const double t = -lm[i] / (lm[i + 1] - lm[i]);
      const double lw0 = std::log(grid[i]);
      const double lw1 = std::log(grid[i + 1]);
      c.omega_rad_s = std::exp(lw0 + t * (lw1 - lw0));
      ph = phase[i] + t * (phase[i + 1] - phase[i]);
      if (refine) {
        c.omega_rad_s = bisect_log([&](double w) { return std::log(std::abs(refine(w))); }, grid[i], grid[i + 1],
                                   lm[i] > 0.0);
        ph = align(phase_deg(refine(c.omega_rad_s)), ph);
      }
    }
    c.phase_margin_deg = wrap180(ph + 180.0);
    rep.crossovers.push_back(c);
  }
  if (rep.crossovers.empty()) rep.no_crossing = true;

  auto branch = [](double p) { return std::floor((p + 180.0) / 360.0); };
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (!std::isfinite(lm[i]) || !std::isfinite(lm[i + 1])) continue;
    const double b0 = branch(phase[i]);
    const double b1 = branch(phase[i + 1]);
    if (b0 == b1) continue;
    const double target = 360.0 * std::max(b0, b1) - 180.0;
    const double t = (target - phase[i]) / (phase[i + 1] - phase[i]);
    const double lw0 = std::log(grid[i]);
    const double lw1 = std::log(grid[i + 1]);
    const double w = std::exp(lw0 + t * (lw1 - lw0));
    double mag = std::exp(lm[i] + t * (lm[i + 1] - lm[i]));
    if (refine) mag = std::abs(refine(w));
    rep.phase_crossover_rad_s = w;
    rep.gain_margin_db = -lin_to_db(mag);
    break;
  }
  return rep;
}

ObjectiveReport objective_report(const SensitivityBundle& bundle, std::span<const Complex> ct, double omega_n,
                                 std::pair<double, double> hi_band, const ObjectiveTargets& targets,
                                 const FrfFn& t_refine, const FrfFn& loop_eval) {
  require_aligned(ct.size(), bundle.grid, "tracker");
  if (!(omega_n > 0.0)) throw Error("omega_n must be positive");
  ObjectiveReport rep;
  const double high_gain = std::pow(10.0, targets.high_gain_db / 20.0);

  auto& o1 = rep.o1_bandwidth;
  o1.name = "O1 bandwidth";
  o1.target = targets.min_bandwidth_rad_s > 0.0 ? targets.min_bandwidth_rad_s : omega_n;
  const auto bw = bandwidth(bundle.grid, bundle.t_yr, targets.bound_db, t_refine);
  o1.value = bw.omega_c_rad_s ? *bw.omega_c_rad_s : (bundle.grid.empty() ? 0.0 : bundle.grid.back());
  o1.pass = *o1.value > o1.target;

  auto& o2 = rep.o2_tracker_band;
  o2.name = "O2 tracker high-gain band";
  o2.target = targets.min_ct_band_rad_s;
  for (std::size_t i = ct.size(); i-- > 0;) {
    if (std::abs(ct[i]) >= high_gain) {
      o2.value = bundle.grid[i];
      break;
    }
  }
  o2.pass = o2.value.has_value() && *o2.value >= o2.target;

  auto& o3 = rep.o3_resonance_loop_gain;
  o3.name = "O3 loop gain at resonance";
  o3.target = high_gain;
  if (loop_eval) {
    o3.value = std::abs(loop_eval(omega_n));
  } else if (!bundle.grid.empty()) {
    const auto it = std::lower_bound(bundle.grid.begin(), bundle.grid.end(), omega_n);
    std::size_t i = static_cast<std::size_t>(it - bundle.grid.begin());
    if (i == bundle.grid.size()) --i;
    if (i > 0 && omega_n - bundle.grid[i - 1] < bundle.grid[i] - omega_n) --i;
    o3.value = std::abs(bundle.loop_gain[i]);
  }
  o3.pass = o3.value.has_value() && *o3.value >= o3.target;

  auto& o4 = rep.o4_hi_band_loop_gain;
  o4.name = "O4 high-band loop gain";
  o4.target = targets.max_hi_band_loop_gain;
  double peak = -1.0;
  for (std::size_t i = 0; i < bundle.grid.size(); ++i) {
    const double w = bundle.grid[i];
    if (w < hi_band.first || w > hi_band.second) continue;
    peak = std::max(peak, std::abs(bundle.loop_gain[i]));
  }
  if (peak >= 0.0) o4.value = peak;
  o4.pass = o4.value.has_value() && *o4.value < o4.target;
  return rep;
}

}  // namespace nrc
