#include "nrc/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "json.hpp"
#include "nrc/loop_analysis.hpp"

namespace nrc {

namespace {

using json = nlohmann::ordered_json;

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double hz(double rad_s) { return rad_s / kTwoPi; }

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json complex_list(std::span<const Complex> v) {
  json a = json::array();
  for (const auto& c : v) a.push_back({c.real(), c.imag()});
  return a;
}

json margins_to(const MarginsReport& m) {
  json j;
  j["crossovers"] = json::array();
  for (const auto& c : m.crossovers) {
    j["crossovers"].push_back({{"freq_hz", hz(c.omega_rad_s)},
                               {"phase_margin_deg", c.phase_margin_deg},
                               {"direction", c.rising ? "rising" : "falling"}});
  }
  j["gain_margin_db"] = opt_json(m.gain_margin_db);
  j["phase_crossover_hz"] = m.phase_crossover_rad_s ? json(hz(*m.phase_crossover_rad_s)) : json(nullptr);
  j["no_crossing"] = m.no_crossing;
  return j;
}

json bandwidth_to(const BandwidthReport& b) {
  return {{"bound_db", b.bound_db},
          {"omega_c_hz", b.omega_c_rad_s ? json(hz(*b.omega_c_rad_s)) : json(nullptr)},
          {"grid_end", !b.omega_c_rad_s.has_value()}};
}

std::string write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  return path.string();
}

template <typename F>
void write_stream(const std::filesystem::path& path, F&& writer) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  writer(out);
}

void put_frf_columns(std::ostream& os, const std::vector<std::vector<Complex>>& cols, std::span<const double> grid) {
  std::vector<std::vector<double>> phases;
  for (const auto& c : cols) phases.push_back(unwrapped_phase_deg(c));
  os << std::setprecision(10);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    os << hz(grid[i]);
    for (std::size_t k = 0; k < cols.size(); ++k) os << ',' << mag_db(cols[k][i]) << ',' << phases[k][i];
    os << '\n';
  }
}

std::string verdict_for(std::span<const Complex> poles, bool integrator) {
  double scale = 0.0;
  for (const auto& p : poles) scale = std::max(scale, std::abs(p));
  const double tol = 1e-9 * std::max(scale, 1.0);
  for (const auto& p : poles) {
    if (p.real() > tol) return "unstable (right half-plane pole)";
  }
  if (integrator) return "marginally stable (integrator pole at s=0)";
  for (const auto& p : poles) {
    if (std::abs(p.real()) <= tol) return "marginally stable (imaginary-axis pole)";
  }
  return "stable";
}

const TrackerSpec& need_tracker(const LoopDesign& d) {
  if (!d.tracker) throw Error("this command needs a tracker section in the config");
  return *d.tracker;
}

const SimConfig& need_sim(const ExperimentConfig& c) {
  if (!c.sim) throw Error("this command needs a sim section in the config");
  return *c.sim;
}

struct FrfSet {
  std::vector<double> grid;
  std::vector<Complex> g, cd, gd, ct;
};

FrfSet evaluate(const LoopDesign& d, const GridConfig& grid) {
  FrfSet f;
  f.grid = grid.omegas();
  for (double w : f.grid) {
    f.g.push_back(d.g.at(w));
    f.cd.push_back(d.cd.at(w));
    f.gd.push_back(d.g_d(w));
    if (d.ct) f.ct.push_back(d.ct->at(w));
  }
  return f;
}

SensitivityBundle bundle_for(const LoopDesign& d, const FrfSet& f) {
  need_tracker(d);
  return dual_sensitivities(f.g, f.ct, f.cd, f.grid);
}

json tuning_json(const ExperimentConfig& c, const LoopDesign& d) {
  json t;
  t["gamma"] = c.nrc.gamma;
  t["n"] = c.nrc.n;
  t["k"] = d.tuning.k;
  t["omega_a_rad_s"] = d.tuning.omega_a;
  t["omega_l_rad_s"] = opt_json(d.tuning.omega_l);
  if (d.tracker) {
    t["kp"] = d.tracker->pi.kp;
    t["omega_i_rad_s"] = d.tracker->pi.omega_i_rad_s;
    t["omega_b_hz"] = c.tracker->omega_b_hz ? json(*c.tracker->omega_b_hz) : json(nullptr);
  }
  return t;
}

json inner_loop_json(const LoopDesign& d) {
  json j;
  const InnerLoopResult inner = inner_closed_loop(d.plant.without_delay(), d.cd);
  j["verdict"] = verdict_for(inner.poles, inner.has_integrator());
  j["poles"] = complex_list(inner.poles);
  j["zeros"] = complex_list(inner.zeros);
  j["dc_gain"] = std::isfinite(inner.dc) ? json(inner.dc) : json(nullptr);
  j["integrator"] = inner.has_integrator();
  j["min_resonant_damping"] = opt_json(inner.min_resonant_damping);
  const auto& p = d.plant;
  if (p.modes.size() == 1 && !p.amp_corner_rad_s && !d.tuning.omega_l) {
    const double gamma = d.tuning.k * p.dc_gain();
    const auto routh = routh_cubic(inner_charpoly(p.first_mode_omega(), p.modes[0].zeta, gamma,
                                                  d.tuning.omega_a / p.first_mode_omega()));
    j["routh_first_column"] = routh.first_column;
  }
  if (p.delay_s > 0.0) {
    const RationalTF g_pade = tf_series(build_plant(p.without_delay()), pade1(p.delay_s));
    const InnerLoopResult delayed = describe_loop(tf_feedback(g_pade, d.cd));
    j["pade_verdict"] = verdict_for(delayed.poles, delayed.has_integrator());
  }
  return j;
}

json objectives_json(const ObjectiveReport& r) {
  json a = json::array();
  auto add = [&a](const ObjectiveMetric& m, bool in_hz) {
    const double scale = in_hz ? 1.0 / kTwoPi : 1.0;
    a.push_back({{"name", m.name},
                 {"value", m.value ? json(*m.value * scale) : json(nullptr)},
                 {"target", m.target * scale},
                 {"unit", in_hz ? "Hz" : "gain"},
                 {"pass", m.pass}});
  };
  add(r.o1_bandwidth, true);
  add(r.o2_tracker_band, true);
  add(r.o3_resonance_loop_gain, false);
  add(r.o4_hi_band_loop_gain, false);
  return a;
}

json design_summary(const ExperimentConfig& c, const LoopDesign& d, const RunOptions& opt, const FrfSet& f,
                    const SensitivityBundle& b) {
  json s;
  s["command"] = "design";
  s["tuning"] = tuning_json(c, d);
  s["inner_loop"] = inner_loop_json(d);

  const double wn = d.plant.first_mode_omega();
  s["resonance_peak_reduction_db"] = mag_db(d.g.at(wn)) - mag_db(d.g_d(wn));

  const FrfFn t_eval = [&d](double w) { return d.t_yr(w); };
  const FrfFn l_eval = [&d](double w) { return d.loop_gain(w); };
  const FrfFn outer_eval = [&d](double w) { return d.outer_loop(w); };
  const auto bw1 = bandwidth(b.grid, b.t_yr, 1.0, t_eval);
  const auto bw3 = bandwidth(b.grid, b.t_yr, 3.0, t_eval);
  s["bandwidth"] = {{"pm1_db", bandwidth_to(bw1)}, {"pm3_db", bandwidth_to(bw3)}};

  std::vector<Complex> outer(f.grid.size());
  for (std::size_t i = 0; i < outer.size(); ++i) outer[i] = f.ct[i] * f.gd[i];
  const auto om = margins(f.grid, outer, outer_eval);
  const auto dm = margins(f.grid, b.loop_gain, l_eval);
  s["outer_margins"] = margins_to(om);
  s["dual_loop_margins"] = margins_to(dm);

  double min_pm = std::numeric_limits<double>::infinity();
  for (const auto& cr : om.crossovers) min_pm = std::min(min_pm, cr.phase_margin_deg);
  const bool pm_ok = om.crossovers.empty() || min_pm >= c.targets.pm_deg;
  const bool gm_ok = !om.gain_margin_db || *om.gain_margin_db >= c.targets.gm_db;
  s["margin_targets"] = {{"gm_db", c.targets.gm_db}, {"pm_deg", c.targets.pm_deg}, {"gm_pass", gm_ok}, {"pm_pass", pm_ok}};

  std::optional<double> wb;
  if (c.tracker->omega_b_hz) {
    wb = kTwoPi * *c.tracker->omega_b_hz;
  } else if (!om.crossovers.empty()) {
    wb = om.crossovers.front().omega_rad_s;
  }
  if (wb) {
    const double nu = wn / *wb;
    const auto pm = pm_feasibility(nu, c.nrc.n, opt.exact_tan60);
    const auto interval = pm_feasible_n(nu, opt.exact_tan60);
    json pj{{"nu", nu}, {"n", c.nrc.n}, {"value", pm.value}, {"feasible", pm.feasible}, {"exact_tan60", opt.exact_tan60}};
    pj["n_interval"] = interval ? json{interval->first, interval->second} : json(nullptr);
    s["pm_feasibility"] = pj;
  }

  ObjectiveTargets targets;
  targets.bound_db = c.targets.bound_db;
  const auto obj = objective_report(b, f.ct, wn, {10.0 * wn, f.grid.back()}, targets, t_eval, l_eval);
  s["objectives"] = objectives_json(obj);

  if (c.sim) {
    const auto dd = discretize_design(d, c.sim->ts_s);
    const double rho = closed_loop_spectral_radius(dd.plant, dd.tracker, dd.nrc);
    s["discrete"] = {{"ts_s", c.sim->ts_s},
                     {"plant_delay_samples", dd.plant.input_delay_samples},
                     {"spectral_radius", rho},
                     {"stable", rho < 1.0}};
  }
  return s;
}

}  // namespace

Complex LoopDesign::g_d(double w) const {
  const Complex gv = g.at(w);
  return gv / (1.0 + gv * cd.at(w));
}

Complex LoopDesign::t_yr(double w) const {
  if (!ct) throw Error("closed-loop response needs a tracker");
  const Complex gv = g.at(w);
  const Complex c = ct->at(w);
  return gv * c / (1.0 + gv * (c + cd.at(w)));
}

Complex LoopDesign::loop_gain(double w) const {
  const Complex c = ct ? ct->at(w) : Complex{};
  return g.at(w) * (c + cd.at(w));
}

Complex LoopDesign::outer_loop(double w) const {
  if (!ct) throw Error("outer loop needs a tracker");
  return ct->at(w) * g_d(w);
}

LoopDesign build_design(const ExperimentConfig& c) {
  c.validate();
  LoopDesign d;
  d.plant = c.plant.to_spec();
  d.g = build_plant(d.plant);
  d.tuning = tune_nrc(d.plant, c.nrc);
  d.cd = synthesize_nrc(d.tuning);
  if (c.tracker) {
    double kp = 0.0;
    if (c.tracker->kp) {
      kp = *c.tracker->kp;
    } else {
      kp = tune_kp([&d](double w) { return d.g_d(w); }, kTwoPi * *c.tracker->omega_b_hz);
    }
    d.tracker = c.tracker->to_spec(kp);
    d.ct = build_tracker(*d.tracker);
  }
  return d;
}

DiscreteDesign discretize_design(const LoopDesign& d, double ts) {
  return {discretize_plant(d.plant, ts), discretize_tracker(need_tracker(d), ts), discretize(d.cd, ts)};
}

SimRun run_simulation(const ExperimentConfig& c, const LoopDesign& d, std::optional<double> sine_hz) {
  const SimConfig& s = need_sim(c);
  const auto dd = discretize_design(d, s.ts_s);
  const auto len = static_cast<std::size_t>(std::llround(s.duration_s / s.ts_s));
  if (len < 4) throw Error("sim.duration_s covers fewer than four samples");
  const bool sine = sine_hz.has_value() || s.reference.kind == "sine";
  const double f_ref = sine_hz.value_or(s.reference.freq_hz);
  std::vector<double> r = sine ? sine_signal(len, s.ts_s, s.reference.amplitude, f_ref)
                               : std::vector<double>(len, s.reference.amplitude);
  std::vector<double> dist(len, 0.0);
  if (s.disturbance) dist = sine_signal(len, s.ts_s, s.disturbance->amplitude, s.disturbance->freq_hz);
  const std::vector<double> noise = uniform_noise(len, s.noise_amplitude, s.seed);

  SimRun run;
  run.trace = simulate_dual_loop(dd.plant, dd.tracker, dd.nrc, r, dist, noise);
  const std::size_t half = len / 2;
  std::span<const double> x = run.trace.x_true;
  std::span<const double> ref = run.trace.r;
  if (sine && s.compensate_phase) {
    const double lag = -phase_deg(d.t_yr(kTwoPi * f_ref));
    run.compensation_samples = phase_shift_samples(lag, f_ref, s.ts_s);
    const auto nd = static_cast<std::size_t>(run.compensation_samples);
    if (nd >= len - half) throw Error("phase compensation shift exceeds the scored half of the record");
    x = x.subspan(nd);
    ref = ref.first(len - nd);
  }
  run.metrics = tracking_metrics(ref.subspan(half), x.subspan(half));
  return run;
}

void write_sensitivity_csv(std::ostream& os, const SensitivityBundle& b) {
  os << "freq_hz";
  for (const char* name : {"t_yr", "t_xr_comp", "s_yn", "s_xn", "ps_yd", "loop_gain"}) {
    os << ',' << name << "_mag_db," << name << "_phase_deg";
  }
  os << '\n';
  put_frf_columns(os, {b.t_yr, b.t_xr_comp, b.s_yn, b.s_xn, b.ps_yd, b.loop_gain}, b.grid);
}

std::string margins_json(const MarginsReport& r) { return margins_to(r).dump(2) + "\n"; }

std::string bandwidth_json(const BandwidthReport& r) { return bandwidth_to(r).dump(2) + "\n"; }

RunResult run_command(std::string_view cmd, const ExperimentConfig& c, const std::filesystem::path& out,
                      const RunOptions& opt) {
  RunResult res;
  if (std::find(kCommands.begin(), kCommands.end(), cmd) == kCommands.end()) {
    res.exit_code = 2;
    res.message = "unknown command '" + std::string(cmd) + "'";
    return res;
  }
  try {
    std::filesystem::create_directories(out);
    const LoopDesign d = build_design(c);
    json s;
    auto emit = [&](const std::string& name, auto&& writer) {
      write_stream(out / name, writer);
      res.files.push_back(out / name);
    };

    if (cmd == "bode") {
      const FrfSet f = evaluate(d, c.grid);
      emit("bode.csv", [&](std::ostream& os) {
        os << "freq_hz,plant_mag_db,plant_phase_deg,nrc_mag_db,nrc_phase_deg,inner_mag_db,inner_phase_deg";
        std::vector<std::vector<Complex>> cols{f.g, f.cd, f.gd};
        if (d.ct) {
          os << ",tracker_mag_db,tracker_phase_deg,outer_mag_db,outer_phase_deg";
          std::vector<Complex> outer(f.grid.size());
          for (std::size_t i = 0; i < outer.size(); ++i) outer[i] = f.ct[i] * f.gd[i];
          cols.push_back(f.ct);
          cols.push_back(outer);
        }
        os << '\n';
        put_frf_columns(os, cols, f.grid);
      });
      s = {{"command", "bode"}, {"tuning", tuning_json(c, d)}};
    } else if (cmd == "design") {
      need_tracker(d);
      const FrfSet f = evaluate(d, c.grid);
      const SensitivityBundle b = bundle_for(d, f);
      s = design_summary(c, d, opt, f, b);
      emit("sensitivities.csv", [&](std::ostream& os) { write_sensitivity_csv(os, b); });
      emit("margins.json", [&](std::ostream& os) {
        os << json{{"outer_loop", s["outer_margins"]}, {"dual_loop", s["dual_loop_margins"]}}.dump(2) << '\n';
      });
      emit("bandwidth.json", [&](std::ostream& os) { os << s["bandwidth"].dump(2) << '\n'; });
    } else if (cmd == "rootlocus") {
      const auto& m = d.plant.modes;
      if (m.size() != 1 || d.plant.amp_corner_rad_s || d.plant.delay_s > 0.0) {
        throw Error("rootlocus needs a single-mode plant without amplifier or delay");
      }
      const double predicted = min_damping_n(m[0].zeta);
      const double n_hi = std::max(10.0, 3.0 * predicted);
      std::vector<double> ns(1000);
      for (std::size_t i = 0; i < ns.size(); ++i) {
        ns[i] = 0.05 + (n_hi - 0.05) * static_cast<double>(i) / static_cast<double>(ns.size() - 1);
      }
      const auto trace = root_locus_n(d.plant, c.nrc.gamma, ns);
      emit("rootlocus.csv", [&](std::ostream& os) { write_root_locus_csv(os, trace); });
      s = {{"command", "rootlocus"},
           {"gamma", c.nrc.gamma},
           {"zeta", m[0].zeta},
           {"bifurcation_n", opt_json(trace.bifurcation_n)},
           {"predicted_bifurcation_n", predicted}};
    } else if (cmd == "sens") {
      const FrfSet f = evaluate(d, c.grid);
      const SensitivityBundle b = bundle_for(d, f);
      emit("sensitivities.csv", [&](std::ostream& os) { write_sensitivity_csv(os, b); });
      json singular = json::array();
      for (auto i : b.singular) singular.push_back(hz(b.grid[i]));
      s = {{"command", "sens"}, {"tuning", tuning_json(c, d)}, {"singular_freq_hz", singular}};
    } else if (cmd == "margins") {
      need_tracker(d);
      const FrfSet f = evaluate(d, c.grid);
      const SensitivityBundle b = bundle_for(d, f);
      std::vector<Complex> outer(f.grid.size());
      for (std::size_t i = 0; i < outer.size(); ++i) outer[i] = f.ct[i] * f.gd[i];
      const auto om = margins(f.grid, outer, [&d](double w) { return d.outer_loop(w); });
      const auto dm = margins(f.grid, b.loop_gain, [&d](double w) { return d.loop_gain(w); });
      const FrfFn t_eval = [&d](double w) { return d.t_yr(w); };
      const auto bw = bandwidth(b.grid, b.t_yr, c.targets.bound_db, t_eval);
      emit("margins.json", [&](std::ostream& os) {
        os << json{{"outer_loop", margins_to(om)}, {"dual_loop", margins_to(dm)}}.dump(2) << '\n';
      });
      emit("bandwidth.json", [&](std::ostream& os) { os << bandwidth_json(bw); });
      s = {{"command", "margins"},
           {"tuning", tuning_json(c, d)},
           {"outer_margins", margins_to(om)},
           {"dual_loop_margins", margins_to(dm)},
           {"bandwidth", bandwidth_to(bw)}};
    } else if (cmd == "simulate") {
      const SimRun run = run_simulation(c, d);
      emit("sim_trace.csv", [&](std::ostream& os) { write_sim_trace_csv(os, run.trace); });
      const json metrics{{"e_max", run.metrics.e_max},
                         {"e_rms", run.metrics.e_rms},
                         {"compensation_samples", run.compensation_samples},
                         {"scored_from_s", run.trace.time_s[run.trace.time_s.size() / 2]}};
      emit("metrics.json", [&](std::ostream& os) { os << metrics.dump(2) << '\n'; });
      s = {{"command", "simulate"}, {"tuning", tuning_json(c, d)}, {"metrics", metrics}};
    } else if (cmd == "identify") {
      const double ts = c.sim ? c.sim->ts_s : 30e-6;
      const double fs = 1.0 / ts;
      const DiscreteSS plant_d = discretize_plant(d.plant, ts);
      const std::vector<double> u = log_chirp(ChirpPreset{}, fs);
      const std::vector<double> y = simulate_open_loop(plant_d, u);
      const FrfEstimate est = chirp_identify(u, y, fs, 32768);
      emit("frf_estimate.csv", [&](std::ostream& os) { write_frf_estimate_csv(os, est); });
      double max_db = 0.0, max_ph = 0.0, min_coh = 1.0;
      std::size_t peak = 0;
      bool any = false;
      for (std::size_t i = 0; i < est.freq_hz.size(); ++i) {
        const double f_hz = est.freq_hz[i];
        if (f_hz < 10.0 || f_hz > 3000.0) continue;
        const Complex ref = d.g.at(kTwoPi * f_hz);
        max_db = std::max(max_db, std::abs(est.mag_db[i] - mag_db(ref)));
        double dp = std::fmod(est.phase_deg[i] - phase_deg(ref), 360.0);
        if (dp > 180.0) dp -= 360.0;
        if (dp < -180.0) dp += 360.0;
        max_ph = std::max(max_ph, std::abs(dp));
        min_coh = std::min(min_coh, est.coherence[i]);
        if (!any || est.mag_db[i] > est.mag_db[peak]) peak = i;
        any = true;
      }
      if (!any) throw Error("identification band [10 Hz, 3 kHz] holds no estimate bins");
      s = {{"command", "identify"},
           {"fs_hz", fs},
           {"segment_len", 32768},
           {"peak_freq_hz", est.freq_hz[peak]},
           {"first_mode_hz", hz(d.plant.first_mode_omega())},
           {"max_mag_error_db", max_db},
           {"max_phase_error_deg", max_ph},
           {"min_coherence", min_coh}};
      if (d.plant.modes.size() >= 2) {
        const double lo = hz(d.plant.modes[0].omega_rad_s);
        const double hi = hz(d.plant.modes[1].omega_rad_s);
        std::optional<std::size_t> dip;
        for (std::size_t i = 0; i < est.freq_hz.size(); ++i) {
          if (est.freq_hz[i] <= lo || est.freq_hz[i] >= hi) continue;
          if (!dip || est.mag_db[i] < est.mag_db[*dip]) dip = i;
        }
        s["anti_resonance_hz"] = dip ? json(est.freq_hz[*dip]) : json(nullptr);
      }
    } else if (cmd == "sweep") {
      const SimConfig& sc = need_sim(c);
      std::vector<double> freqs = sc.sweep_hz;
      if (freqs.empty()) freqs = {10.0, 100.0, 200.0, 500.0, 900.0};
      need_tracker(d);
      std::vector<std::future<std::pair<SimRun, Complex>>> jobs;
      for (double f : freqs) {
        jobs.push_back(std::async(std::launch::async, [&c, &d, f]() {
          SimRun run = run_simulation(c, d, f);
          const std::size_t half = run.trace.r.size() / 2;
          const double ts = c.sim->ts_s;
          const Complex gain = sine_phasor(run.trace.x_true, ts, f, half) / sine_phasor(run.trace.r, ts, f, half);
          return std::pair{std::move(run), gain};
        }));
      }
      json rows = json::array();
      std::ostringstream csv;
      csv << "freq_hz,sim_gain_db,sim_phase_deg,t_yr_mag_db,t_yr_phase_deg,e_max,e_rms\n" << std::setprecision(10);
      for (std::size_t i = 0; i < freqs.size(); ++i) {
        const auto [run, gain] = jobs[i].get();
        const Complex t = d.t_yr(kTwoPi * freqs[i]);
        csv << freqs[i] << ',' << mag_db(gain) << ',' << phase_deg(gain) << ',' << mag_db(t) << ',' << phase_deg(t)
            << ',' << run.metrics.e_max << ',' << run.metrics.e_rms << '\n';
        rows.push_back({{"freq_hz", freqs[i]},
                        {"sim_gain", std::abs(gain)},
                        {"t_yr_gain", std::abs(t)},
                        {"e_max", run.metrics.e_max},
                        {"e_rms", run.metrics.e_rms}});
      }
      emit("sweep.csv", [&](std::ostream& os) { os << csv.str(); });
      s = {{"command", "sweep"}, {"tuning", tuning_json(c, d)}, {"points", rows}};
    }

    s["files"] = json::array();
    for (const auto& p : res.files) s["files"].push_back(p.filename().string());
    res.summary_json = s.dump(2) + "\n";
    res.files.push_back(out / "summary.json");
    write_text(out / "summary.json", res.summary_json);
    const std::string text = summarize(res);
    write_text(out / "summary.txt", text);
    res.files.push_back(out / "summary.txt");
  } catch (const std::exception& e) {
    res.exit_code = 1;
    res.message = e.what();
    res.summary_json.clear();
  }
  return res;
}

std::string summarize(const RunResult& r) {
  std::ostringstream os;
  if (r.exit_code != 0) {
    os << "error: " << r.message << '\n';
    return os.str();
  }
  const json s = json::parse(r.summary_json);
  os << std::setprecision(6);
  os << "command: " << s.value("command", "") << '\n';
  auto hz_text = [](const json& v) -> std::string {
    if (v.is_null()) return "beyond grid";
    std::ostringstream t;
    t << std::setprecision(6) << v.get<double>() << " Hz";
    return t.str();
  };
  if (s.contains("tuning")) {
    const auto& t = s["tuning"];
    os << "NRC: gamma " << t["gamma"].get<double>() << ", n " << t["n"].get<double>() << ", k "
       << t["k"].get<double>() << ", omega_a " << t["omega_a_rad_s"].get<double>() << " rad/s\n";
    if (t.contains("kp")) {
      os << "tracker: kp " << t["kp"].get<double>() << ", omega_i " << t["omega_i_rad_s"].get<double>()
         << " rad/s\n";
    }
  }
  if (s.contains("inner_loop")) {
    const auto& il = s["inner_loop"];
    os << "inner loop: " << il["verdict"].get<std::string>() << '\n';
    if (il.contains("pade_verdict")) os << "inner loop with Pade delay: " << il["pade_verdict"].get<std::string>() << '\n';
    if (il["dc_gain"].is_null()) {
      os << "inner loop DC gain: infinite\n";
    } else {
      os << "inner loop DC gain: " << il["dc_gain"].get<double>() << '\n';
    }
  }
  if (s.contains("resonance_peak_reduction_db")) {
    os << "resonance peak reduction: " << s["resonance_peak_reduction_db"].get<double>() << " dB\n";
  }
  if (s.contains("bandwidth") && s["bandwidth"].contains("pm1_db")) {
    os << "bandwidth: +/-1 dB " << hz_text(s["bandwidth"]["pm1_db"]["omega_c_hz"]) << ", +/-3 dB "
       << hz_text(s["bandwidth"]["pm3_db"]["omega_c_hz"]) << '\n';
  } else if (s.contains("bandwidth")) {
    os << "bandwidth: +/-" << s["bandwidth"]["bound_db"].get<double>() << " dB "
       << hz_text(s["bandwidth"]["omega_c_hz"]) << '\n';
  }
  auto margin_lines = [&](const char* key, const char* label) {
    if (!s.contains(key)) return;
    const auto& m = s[key];
    if (m["no_crossing"].get<bool>()) {
      os << label << ": no unity-gain crossing\n";
      return;
    }
    for (const auto& c : m["crossovers"]) {
      os << label << ": crossover " << c["freq_hz"].get<double>() << " Hz, PM " << c["phase_margin_deg"].get<double>()
         << " deg (" << c["direction"].get<std::string>() << ")\n";
    }
    if (m["gain_margin_db"].is_null()) {
      os << label << ": GM infinite (no -180 deg crossing)\n";
    } else {
      os << label << ": GM " << m["gain_margin_db"].get<double>() << " dB at "
         << m["phase_crossover_hz"].get<double>() << " Hz\n";
    }
  };
  margin_lines("outer_margins", "outer loop");
  margin_lines("dual_loop_margins", "dual loop");
  if (s.contains("margin_targets")) {
    const auto& mt = s["margin_targets"];
    os << "margin targets: GM >= " << mt["gm_db"].get<double>() << " dB " << (mt["gm_pass"].get<bool>() ? "PASS" : "FAIL")
       << ", PM >= " << mt["pm_deg"].get<double>() << " deg " << (mt["pm_pass"].get<bool>() ? "PASS" : "FAIL") << '\n';
  }
  if (s.contains("pm_feasibility")) {
    const auto& p = s["pm_feasibility"];
    os << "PM feasibility: nu " << p["nu"].get<double>() << ", value " << p["value"].get<double>() << ", "
       << (p["feasible"].get<bool>() ? "feasible" : "infeasible") << '\n';
  }
  if (s.contains("objectives")) {
    for (const auto& o : s["objectives"]) {
      os << o["name"].get<std::string>() << ": ";
      if (o["value"].is_null()) {
        os << "undefined";
      } else {
        os << o["value"].get<double>();
      }
      if (o["unit"] == "Hz") os << " Hz";
      os << " (target " << o["target"].get<double>() << ") " << (o["pass"].get<bool>() ? "PASS" : "FAIL") << '\n';
    }
  }
  if (s.contains("discrete")) {
    const auto& d = s["discrete"];
    os << "discrete loop at ts " << d["ts_s"].get<double>() << " s: spectral radius " << d["spectral_radius"].get<double>()
       << ", " << (d["stable"].get<bool>() ? "stable" : "unstable") << '\n';
  }
  if (s.contains("bifurcation_n")) {
    os << "bifurcation n: ";
    if (s["bifurcation_n"].is_null()) {
      os << "not reached";
    } else {
      os << s["bifurcation_n"].get<double>();
    }
    os << " (predicted " << s["predicted_bifurcation_n"].get<double>() << ")\n";
  }
  if (s.contains("metrics")) {
    os << "tracking: e_max " << s["metrics"]["e_max"].get<double>() << ", e_rms " << s["metrics"]["e_rms"].get<double>()
       << '\n';
  }
  if (s.contains("peak_freq_hz")) {
    os << "identified peak " << s["peak_freq_hz"].get<double>() << " Hz (first mode " << s["first_mode_hz"].get<double>()
       << " Hz), max error " << s["max_mag_error_db"].get<double>() << " dB / " << s["max_phase_error_deg"].get<double>()
       << " deg, min coherence " << s["min_coherence"].get<double>() << '\n';
  }
  if (s.contains("points")) {
    for (const auto& p : s["points"]) {
      os << "sweep " << p["freq_hz"].get<double>() << " Hz: gain " << p["sim_gain"].get<double>() << " (FRF "
         << p["t_yr_gain"].get<double>() << "), e_max " << p["e_max"].get<double>() << ", e_rms "
         << p["e_rms"].get<double>() << '\n';
    }
  }
  return os.str();
}

}  // namespace nrc
