// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "nrc/config.hpp"
#include "nrc/loop_analysis.hpp"
#include "nrc/nrc_design.hpp"
#include "nrc/pipeline.hpp"
#include "nrc/plant.hpp"
#include "nrc/time_sim.hpp"
#include "nrc/tracking.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nrc::Complex;
using nrc::Polynomial;
using nrc::RationalTF;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& title, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  if (!o.pass) ++failures;
  std::printf("%s [%2d] %s: %s (%.1f ms)\n", o.pass ? "PASS" : "FAIL", id, title.c_str(), o.detail.c_str(), ms);
  std::fflush(stdout);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double wrap180(double deg) {
  double x = std::fmod(deg + 180.0, 360.0);
  if (x < 0.0) x += 360.0;
  return x - 180.0;
}

fs::path config_path(const char* name) { return fs::path(NRC_CONFIG_DIR) / name; }

fs::path scratch(const char* name) {
  const auto p = fs::temp_directory_path() / (std::string("nrc_acceptance_") + name);
  fs::remove_all(p);
  return p;
}

Outcome closed_form_poles() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto p = nrc::inner_poles_closed_form(1.0, 0.0, 3.0);
  const auto numeric = nrc::poly_roots(nrc::inner_charpoly(1.0, 0.0, 1.0, 3.0));
  const double secs = seconds_since(t0);
  const std::vector<Complex> expect{0.0, -1.0, -2.0};
  const double err_closed = oracle::root_set_distance({p.begin(), p.end()}, expect);
  const double err_numeric = oracle::root_set_distance(numeric, {p.begin(), p.end()});
  const bool ok = err_closed < 1e-12 && numeric.size() == 3 && err_numeric < 1e-9 && secs < 1e-3;
  return {ok, fmt("closed form off by %.2e, numeric vs closed %.2e, %.3f ms", err_closed, err_numeric, secs * 1e3)};
}

Outcome bifurcation() {
  std::vector<double> grid;
  for (int i = 0; i < 1000; ++i) grid.push_back(0.05 + i * (10.0 - 0.05) / 999.0);
  double worst = 0.0, slowest = 0.0;
  bool all_found = true;
  for (double z : {0.0, 0.01, 0.05, 0.1}) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto trace = nrc::root_locus_n(nrc::single_mode_plant(1.0, kTwoPi * 739.0, z), 1.0, grid);
    slowest = std::max(slowest, seconds_since(t0));
    if (!trace.bifurcation_n) {
      all_found = false;
      continue;
    }
    worst = std::max(worst, std::abs(*trace.bifurcation_n - 2.0 * (std::sqrt(2.0) + z)));
  }
  return {all_found && worst < 1e-3 && slowest < 1.0,
          fmt("max |n* - 2(sqrt2+zeta)| = %.2e, slowest %.1f ms", worst, slowest * 1e3)};
}

Outcome routh_consistency() {
  auto g = oracle::rng(1001);
  int used = 0, disagreements = 0, unstable = 0;
  for (int t = 0; t < 1000; ++t) {
    const double gamma = oracle::uniform(g, 0.05, 1.6);
    const double n = oracle::uniform(g, 0.05, 12.0);
    const double zeta = oracle::uniform(g, 0.0, 0.2);
    const double wn = std::pow(10.0, oracle::uniform(g, 0.0, 4.0));
    const auto poly = nrc::inner_charpoly(wn, zeta, gamma, n);
    double max_re = -INFINITY;
    for (auto r : nrc::poly_roots(poly)) max_re = std::max(max_re, r.real());
    if (std::abs(max_re) < 1e-9) continue;
    ++used;
    const bool stable = nrc::routh_cubic(poly).stable;
    if (stable != (max_re < 0.0)) ++disagreements;
    if (max_re > 0.0) ++unstable;
  }
  return {disagreements == 0, fmt("%d disagreements over %d draws (%d unstable)", disagreements, used, unstable)};
}

Outcome dc_gain_law() {
  const double g = 0.5237;
  const auto plant = nrc::single_mode_plant(g, kTwoPi * 739.0, 0.01);
  double worst = 0.0;
  for (double gamma : {0.25, 0.5, 0.9}) {
    const auto loop = nrc::inner_closed_loop(plant, nrc::synthesize_nrc(plant, {gamma, 3.0, std::nullopt}));
    const double expect = g / (1.0 - gamma);
    worst = std::max(worst, std::abs(loop.dc - expect) / expect);
  }
  const auto unit = nrc::inner_closed_loop(plant, nrc::synthesize_nrc(plant, {1.0, 3.0, std::nullopt}));
  return {worst < 1e-9 && unit.has_integrator() && std::isinf(unit.dc),
          fmt("max relative error %.2e, gamma=1 marker %s", worst, std::isinf(unit.dc) ? "infinite" : "finite")};
}

Outcome two_mode_gain() {
  const double wn = kTwoPi * 739.0;
  double worst = 0.0;
  for (double alpha : {1.5, 2.0, 3.0}) {
    for (double beta : {0.2, 0.5, 1.0}) {
      for (double gamma : {0.5, 1.0}) {
        for (double n : {2.0, 3.0, 8.0}) {
          const auto cl = nrc::two_mode_inner_cl(alpha, beta, gamma, n, wn);
          const double got = std::abs(cl.at(alpha * wn));
          worst = std::max(worst, std::abs(got / ((1.0 + beta) / gamma) - 1.0));
        }
      }
    }
  }
  return {worst < 1e-3, fmt("max relative deviation %.2e over 54 points", worst)};
}

Outcome load_robustness() {
  const double wn = kTwoPi * 739.0;
  const auto plant = nrc::single_mode_plant(1.0, wn, 0.01);
  const auto cd = nrc::synthesize_nrc(plant, {1.0, 3.0, std::nullopt});
  double worst = 0.0;
  bool cross_checked = true;
  for (double eta : {0.75, 0.5}) {
    const auto loop = nrc::inner_closed_loop(nrc::scale_load(plant, eta), cd);
    for (auto p : loop.poles) worst = std::max(worst, std::abs(p.imag()));
    cross_checked = cross_checked && nrc::loaded_damping_check(0.01, 3.0, eta);
  }
  return {worst < 1e-6 * wn && cross_checked, fmt("max |Im p| / w_n = %.2e", worst / wn)};
}

Outcome delay_equivalence() {
  double worst = 0.0;
  for (double wn : {1.0, kTwoPi * 739.0}) {
    for (double n : {2.0, 3.0, 8.0}) {
      for (double m : {1.0, 3.0, 10.0, 100.0}) {
        const auto closed = nrc::delayed_inner_cl(wn, n, m);
        const auto plant = nrc::build_plant(nrc::single_mode_plant(1.0, wn, 0.0));
        const auto composed =
            nrc::tf_feedback(nrc::tf_series(plant, nrc::pade1(2.0 / (m * wn))), nrc::nrc_tf(1.0, n * wn));
        const double lc = closed.den.leading();
        const double lp = composed.den.leading();
        if (closed.den.degree() != composed.den.degree() || closed.num.degree() != composed.num.degree()) {
          return {false, "degree mismatch"};
        }
        auto compare = [&](const Polynomial& a, const Polynomial& b, int top) {
          for (int i = 0; i <= a.degree(); ++i) {
            const double scale = std::pow(wn, top - i);
            const double x = a[static_cast<std::size_t>(i)] / lc / scale;
            const double y = b[static_cast<std::size_t>(i)] / lp / scale;
            worst = std::max(worst, std::abs(x - y) / std::max({1.0, std::abs(x), std::abs(y)}));
          }
        };
        compare(closed.den, composed.den, 4);
        compare(closed.num, composed.num, 4);
      }
    }
  }
  return {worst < 1e-9, fmt("max normalized coefficient deviation %.2e over 24 cases", worst)};
}

Outcome complementarity() {
  struct Triple {
    RationalTF g, ct, cd;
  };
  const auto p1 = nrc::single_mode_plant(1.0, 10.0, 0.02);
  auto p2 = nrc::two_mode_plant(2.7, 0.4, 300.0);
  p2.modes[0].zeta = 0.03;
  p2.modes[1].zeta = 0.01;
  const std::vector<Triple> triples{
      {nrc::build_plant(p1), nrc::pi_controller({2.0, 1.0}), nrc::synthesize_nrc(p1, {0.999, 3.0, std::nullopt})},
      {nrc::build_plant(p2), nrc::build_tracker({{0.7, 20.0}, {{800.0, 3.0, 1.0}}, 5000.0}),
       nrc::synthesize_nrc(p2, {0.8, 5.0, std::nullopt})},
      {RationalTF{Polynomial{3.0}, Polynomial{1.0, 0.5, 1.0}}, RationalTF{Polynomial{1.0, 1.0}, Polynomial{0.0, 1.0}},
       RationalTF{Polynomial{-2.0, 1.0}, Polynomial{5.0, 1.0}}},
  };
  double worst_t = 0.0, worst_s = 0.0;
  for (const auto& t : triples) {
    const auto grid = nrc::log_grid(0.1, 1000.0, 200);
    const auto b = nrc::dual_sensitivities(t.g, t.ct, t.cd, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      worst_t = std::max(worst_t, std::abs(b.t_yr[i] + b.t_xr_comp[i] - 1.0));
      worst_s = std::max(worst_s, std::abs(b.s_yn[i] - b.s_xn[i] - 1.0));
    }
  }
  return {worst_t < 1e-9 && worst_s < 1e-9, fmt("max |T_yr+T'_xr-1| = %.2e, max |S_yn-S_xn-1| = %.2e", worst_t, worst_s)};
}

Outcome step_error_law() {
  auto cfg = nrc::parse_config(config_path("single_mode_tracking.json"));
  std::ostringstream detail;
  bool ok = true;
  for (double kp : {1.0, 10.0, 298.3569}) {
    cfg.tracker->kp = kp;
    const auto t0 = std::chrono::steady_clock::now();
    const auto design = nrc::build_design(cfg);
    const auto run = nrc::run_simulation(cfg, design);
    const double secs = seconds_since(t0);
    const double terminal = run.trace.e.back() / cfg.sim->reference.amplitude;
    const double law = nrc::steady_state_error(kp);
    const double rel = std::abs(terminal - law) / law;
    ok = ok && rel < 0.01 && secs < 5.0;
    if (!std::isfinite(terminal)) {
      const auto dd = nrc::discretize_design(design, cfg.sim->ts_s);
      const double rho = nrc::closed_loop_spectral_radius(dd.plant, dd.tracker, dd.nrc);
      detail << fmt("kp=%g: diverged (spectral radius %.4f) vs %.4e, %.2f s; ", kp, rho, law, secs);
      continue;
    }
    detail << fmt("kp=%g: e(T)=%.4e vs %.4e (%.0f%% off, %.2f s); ", kp, terminal, law, rel * 100.0, secs);
  }
  std::string d = detail.str();
  d.resize(d.size() - 2);
  return {ok, d};
}

Outcome surrogate_design() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto cfg = nrc::parse_config(config_path("surrogate.json"));
  const auto r = nrc::run_command("design", cfg, scratch("design"));
  const double secs = seconds_since(t0);
  if (r.exit_code != 0) return {false, "design failed: " + r.message};
  const auto s = json::parse(r.summary_json);
  const double reduction = s["resonance_peak_reduction_db"].get<double>();
  const double fn = cfg.plant.modes.front().freq_hz;
  const auto& bw = s["bandwidth"]["pm3_db"];
  const double fc = bw["omega_c_hz"].is_null() ? 0.0 : bw["omega_c_hz"].get<double>();
  double min_pm = INFINITY;
  for (const auto& c : s["outer_margins"]["crossovers"]) min_pm = std::min(min_pm, c["phase_margin_deg"].get<double>());
  const bool stable = s["discrete"]["stable"].get<bool>();
  const bool ok = reduction >= 20.0 && fc > fn && min_pm > 0.0 && stable && secs < 30.0;
  return {ok, fmt("(a) peak reduction %.2f dB (b) w_c(+/-3 dB) %.1f Hz vs %.0f Hz (c) min PM %.1f deg, "
                  "discrete loop %s; %.2f s",
                  reduction, fc, fn, min_pm, stable ? "stable" : "unstable", secs)};
}

Outcome identification() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto cfg = nrc::parse_config(config_path("surrogate.json"));
  const auto spec = cfg.plant.to_spec();
  const double ts = 30e-6;
  const double fs = 1.0 / ts;
  const auto plant_d = nrc::discretize_plant(spec, ts);
  const auto u = nrc::log_chirp(nrc::ChirpPreset{}, fs);
  const auto y = nrc::simulate_open_loop(plant_d, u);
  const auto est = nrc::chirp_identify(u, y, fs, 32768);
  const double secs = seconds_since(t0);

  double max_db = 0.0, max_deg = 0.0, min_coh = 1.0;
  int bins = 0;
  for (std::size_t i = 0; i < est.freq_hz.size(); ++i) {
    const double f = est.freq_hz[i];
    if (f < 10.0 || f > 3000.0) continue;
    // Modal sum with amplifier and exact delay, evaluated directly.
    const Complex s{0.0, kTwoPi * f};
    Complex sum = 0.0;
    for (const auto& m : spec.modes) {
      sum += m.weight * m.omega_rad_s * m.omega_rad_s /
             (s * s + 2.0 * m.zeta * m.omega_rad_s * s + m.omega_rad_s * m.omega_rad_s);
    }
    Complex truth = spec.gain * sum * std::exp(-s * spec.delay_s);
    if (spec.amp_corner_rad_s) truth *= *spec.amp_corner_rad_s / (s + *spec.amp_corner_rad_s);
    max_db = std::max(max_db, std::abs(est.mag_db[i] - 20.0 * std::log10(std::abs(truth))));
    max_deg = std::max(max_deg, std::abs(wrap180(est.phase_deg[i] - std::arg(truth) * 180.0 / std::numbers::pi)));
    min_coh = std::min(min_coh, est.coherence[i]);
    ++bins;
  }
  const bool ok = bins > 0 && max_db <= 1.0 && max_deg <= 5.0 && min_coh > 0.99 && secs < 30.0;
  return {ok, fmt("%d bins in [10 Hz, 3 kHz]: max error %.3f dB / %.3f deg, min coherence %.4f; %.2f s", bins, max_db,
                  max_deg, min_coh, secs)};
}

Outcome pm_boundary() {
  const double nu = 2.0;
  const double expect = (16.0 + std::sqrt(599.0)) / 14.0;
  const auto range = nrc::pm_feasible_n(nu);
  if (!range) return {false, "no feasible interval at nu = 2"};
  const double n = range->second;
  const double bound_err = std::abs(n - expect);

  // Ideal inner loop (gamma = 1, zeta = 0): w_n^2 (s + w_a) / (s (s^2 + w_a s + 2 w_n^2)).
  const double wn = kTwoPi * 739.0;
  const double wb = wn / nu;
  const double wa = n * wn;
  const RationalTF gd{Polynomial{wn * wn * wa, wn * wn}, Polynomial{0.0, 2.0 * wn * wn, wa, 1.0}};
  const double kp = nrc::tune_kp(gd, wb);
  const RationalTF l{kp * gd.num, gd.den};
  const auto grid = nrc::log_grid(wb / 100.0, wb * 100.0, 400);
  std::vector<Complex> lv;
  for (double w : grid) lv.push_back(l.at(w));
  const auto m = nrc::margins(grid, lv, [&](double w) { return l.at(w); });
  if (m.crossovers.size() != 1) return {false, fmt("%zu unity crossings", m.crossovers.size())};
  const double pm = m.crossovers.front().phase_margin_deg;
  const bool ok = bound_err <= 1e-6 && std::abs(pm - 60.0) <= 2.0;
  return {ok, fmt("n_max = %.9f (error %.1e), PM at boundary %.3f deg at %.1f Hz", n, bound_err, pm,
                  m.crossovers.front().omega_rad_s / kTwoPi)};
}

Outcome sim_vs_frf() {
  auto cfg = nrc::parse_config(config_path("surrogate.json"));
  cfg.sim->sweep_hz = {50.0, 100.0, 200.0, 500.0};
  const auto r = nrc::run_command("sweep", cfg, scratch("sweep"));
  if (r.exit_code != 0) return {false, "sweep failed: " + r.message};
  const auto s = json::parse(r.summary_json);
  double worst = 0.0;
  std::ostringstream detail;
  for (const auto& p : s["points"]) {
    const double rel = std::abs(p["sim_gain"].get<double>() / p["t_yr_gain"].get<double>() - 1.0);
    worst = std::max(worst, rel);
    detail << fmt("%g Hz %.2f%%, ", p["freq_hz"].get<double>(), rel * 100.0);
  }
  return {s["points"].size() == 4 && worst < 0.02, detail.str() + fmt("max %.2f%%", worst * 100.0)};
}

}  // namespace

int main() {
  report(1, "closed-form inner poles", closed_form_poles);
  report(2, "bifurcation thresholds", bifurcation);
  report(3, "Routh consistency", routh_consistency);
  report(4, "inner-loop DC gain law", dc_gain_law);
  report(5, "two-mode damped gain at the second mode", two_mode_gain);
  report(6, "load robustness", load_robustness);
  report(7, "delay equivalence", delay_equivalence);
  report(8, "complementarity identities", complementarity);
  report(9, "P-only step error law 2/(2+kp)", step_error_law);
  report(10, "surrogate design pipeline", surrogate_design);
  report(11, "chirp identification", identification);
  report(12, "PM feasibility boundary", pm_boundary);
  report(13, "simulation vs FRF", sim_vs_frf);
  std::printf("%d of 13 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
