#include "nrc/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "json.hpp"

namespace nrc {

namespace {

using json = nlohmann::ordered_json;

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw Error(where + " must be an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : obj.items()) {
    if (!ok.contains(key)) throw Error(where + "." + key + " is not a recognized key");
  }
}

double get_num(const json& obj, const std::string& where, const char* key) {
  if (!obj.contains(key)) throw Error(where + "." + key + " is required");
  const auto& v = obj.at(key);
  if (!v.is_number()) throw Error(where + "." + key + " must be a number");
  return v.get<double>();
}

std::optional<double> opt_num(const json& obj, const std::string& where, const char* key) {
  if (!obj.contains(key) || obj.at(key).is_null()) return std::nullopt;
  return get_num(obj, where, key);
}

double num_or(const json& obj, const std::string& where, const char* key, double fallback) {
  return opt_num(obj, where, key).value_or(fallback);
}

const json& get_array(const json& obj, const std::string& where, const char* key) {
  if (!obj.contains(key)) throw Error(where + "." + key + " is required");
  const auto& v = obj.at(key);
  if (!v.is_array()) throw Error(where + "." + key + " must be an array");
  return v;
}

PlantConfig parse_plant(const json& j) {
  check_keys(j, "plant", {"gain", "modes", "amp_corner_hz", "delay_us"});
  PlantConfig p;
  p.gain = get_num(j, "plant", "gain");
  const auto& modes = get_array(j, "plant", "modes");
  for (std::size_t i = 0; i < modes.size(); ++i) {
    const std::string where = "plant.modes[" + std::to_string(i) + "]";
    check_keys(modes[i], where, {"freq_hz", "zeta", "weight"});
    p.modes.push_back({get_num(modes[i], where, "freq_hz"), get_num(modes[i], where, "zeta"),
                       num_or(modes[i], where, "weight", 1.0)});
  }
  p.amp_corner_hz = opt_num(j, "plant", "amp_corner_hz");
  p.delay_us = opt_num(j, "plant", "delay_us");
  return p;
}

NrcSpec parse_nrc(const json& j) {
  check_keys(j, "nrc", {"gamma", "n", "taming_l"});
  NrcSpec s;
  s.gamma = get_num(j, "nrc", "gamma");
  s.n = get_num(j, "nrc", "n");
  s.taming_l = opt_num(j, "nrc", "taming_l");
  return s;
}

TrackerConfig parse_tracker(const json& j) {
  check_keys(j, "tracker", {"kp", "omega_b_hz", "omega_i_hz", "notches", "lowpass_hz"});
  TrackerConfig t;
  t.kp = opt_num(j, "tracker", "kp");
  t.omega_b_hz = opt_num(j, "tracker", "omega_b_hz");
  t.omega_i_hz = get_num(j, "tracker", "omega_i_hz");
  if (j.contains("notches")) {
    const auto& notches = get_array(j, "tracker", "notches");
    for (std::size_t i = 0; i < notches.size(); ++i) {
      const std::string where = "tracker.notches[" + std::to_string(i) + "]";
      check_keys(notches[i], where, {"freq_hz", "q_num", "q_den"});
      t.notches.push_back({get_num(notches[i], where, "freq_hz"), get_num(notches[i], where, "q_num"),
                           get_num(notches[i], where, "q_den")});
    }
  }
  t.lowpass_hz = opt_num(j, "tracker", "lowpass_hz");
  return t;
}

GridConfig parse_grid(const json& j) {
  check_keys(j, "grid", {"f_min_hz", "f_max_hz", "pts_per_decade"});
  GridConfig g;
  g.f_min_hz = get_num(j, "grid", "f_min_hz");
  g.f_max_hz = get_num(j, "grid", "f_max_hz");
  const auto& ppd = j.at("pts_per_decade");
  if (!ppd.is_number_integer()) throw Error("grid.pts_per_decade must be an integer");
  g.pts_per_decade = ppd.get<int>();
  return g;
}

SimConfig parse_sim(const json& j) {
  check_keys(j, "sim", {"ts_s", "duration_s", "reference", "seed", "noise_amplitude", "disturbance",
                        "compensate_phase", "sweep_hz"});
  SimConfig s;
  s.ts_s = get_num(j, "sim", "ts_s");
  s.duration_s = get_num(j, "sim", "duration_s");
  if (j.contains("reference")) {
    const auto& r = j.at("reference");
    check_keys(r, "sim.reference", {"kind", "amplitude", "freq_hz"});
    if (!r.contains("kind") || !r.at("kind").is_string()) throw Error("sim.reference.kind must be a string");
    s.reference.kind = r.at("kind").get<std::string>();
    s.reference.amplitude = get_num(r, "sim.reference", "amplitude");
    s.reference.freq_hz = num_or(r, "sim.reference", "freq_hz", 0.0);
  }
  if (j.contains("seed")) {
    const auto& v = j.at("seed");
    if (!v.is_number_unsigned()) throw Error("sim.seed must be a nonnegative integer");
    s.seed = v.get<std::uint64_t>();
  }
  s.noise_amplitude = num_or(j, "sim", "noise_amplitude", 0.0);
  if (j.contains("disturbance")) {
    const auto& d = j.at("disturbance");
    check_keys(d, "sim.disturbance", {"amplitude", "freq_hz"});
    s.disturbance = DisturbanceConfig{get_num(d, "sim.disturbance", "amplitude"),
                                      get_num(d, "sim.disturbance", "freq_hz")};
  }
  if (j.contains("compensate_phase")) {
    if (!j.at("compensate_phase").is_boolean()) throw Error("sim.compensate_phase must be a boolean");
    s.compensate_phase = j.at("compensate_phase").get<bool>();
  }
  if (j.contains("sweep_hz")) {
    for (const auto& v : get_array(j, "sim", "sweep_hz")) {
      if (!v.is_number()) throw Error("sim.sweep_hz entries must be numbers");
      s.sweep_hz.push_back(v.get<double>());
    }
  }
  return s;
}

TargetsConfig parse_targets(const json& j) {
  check_keys(j, "targets", {"gm_db", "pm_deg", "bound_db"});
  TargetsConfig t;
  t.gm_db = num_or(j, "targets", "gm_db", t.gm_db);
  t.pm_deg = num_or(j, "targets", "pm_deg", t.pm_deg);
  t.bound_db = num_or(j, "targets", "bound_db", t.bound_db);
  return t;
}

template <typename T>
void put_opt(json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

}  // namespace

PlantSpec PlantConfig::to_spec() const {
  PlantSpec s;
  s.gain = gain;
  for (const auto& m : modes) s.modes.push_back({kTwoPi * m.freq_hz, m.zeta, m.weight});
  if (amp_corner_hz) s.amp_corner_rad_s = kTwoPi * *amp_corner_hz;
  s.delay_s = delay_us.value_or(0.0) * 1e-6;
  return s;
}

TrackerSpec TrackerConfig::to_spec(double kp_value) const {
  TrackerSpec s;
  s.pi = {kp_value, kTwoPi * omega_i_hz};
  for (const auto& n : notches) s.notches.push_back({kTwoPi * n.freq_hz, n.q_num, n.q_den});
  if (lowpass_hz) s.lowpass_corner_rad_s = kTwoPi * *lowpass_hz;
  return s;
}

std::vector<double> GridConfig::omegas() const { return log_grid(kTwoPi * f_min_hz, kTwoPi * f_max_hz, pts_per_decade); }

void ExperimentConfig::validate() const {
  plant.to_spec().validate();
  try {
    nrc.validate();
  } catch (const Error& e) {
    const std::string msg = e.what();
    throw Error(msg.rfind("gamma", 0) == 0 ? "nrc." + msg : msg);
  }
  if (tracker) {
    if (tracker->kp.has_value() == tracker->omega_b_hz.has_value()) {
      throw Error("tracker: exactly one of tracker.kp and tracker.omega_b_hz must be present");
    }
    if (tracker->omega_b_hz && !(*tracker->omega_b_hz > 0.0)) throw Error("tracker.omega_b_hz must be positive");
    tracker->to_spec(tracker->kp.value_or(1.0)).validate();
  }
  if (!(grid.f_min_hz > 0.0)) throw Error("grid.f_min_hz must be positive");
  if (!(grid.f_min_hz < grid.f_max_hz)) throw Error("grid.f_min_hz must be below grid.f_max_hz");
  if (grid.pts_per_decade < 1) throw Error("grid.pts_per_decade must be at least 1");
  if (sim) {
    if (!(sim->ts_s > 0.0)) throw Error("sim.ts_s must be positive");
    if (!(sim->ts_s < 1.0 / (2.0 * grid.f_max_hz))) {
      throw Error("sim.ts_s must be below 1/(2 grid.f_max_hz) so the grid stays under Nyquist");
    }
    if (!(sim->duration_s > sim->ts_s)) throw Error("sim.duration_s must exceed sim.ts_s");
    if (sim->reference.kind != "sine" && sim->reference.kind != "step") {
      throw Error("sim.reference.kind must be \"sine\" or \"step\"");
    }
    if (sim->reference.kind == "sine" && !(sim->reference.freq_hz > 0.0)) {
      throw Error("sim.reference.freq_hz must be positive for a sine reference");
    }
    if (!(sim->noise_amplitude >= 0.0)) throw Error("sim.noise_amplitude must be nonnegative");
    if (sim->disturbance && !(sim->disturbance->freq_hz > 0.0)) throw Error("sim.disturbance.freq_hz must be positive");
    for (double f : sim->sweep_hz) {
      if (!(f > 0.0 && f < 0.5 / sim->ts_s)) throw Error("sim.sweep_hz entries must lie in (0, Nyquist)");
    }
  }
  if (!(targets.bound_db > 0.0)) throw Error("targets.bound_db must be positive");
}

ExperimentConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(j, "config", {"plant", "nrc", "tracker", "grid", "sim", "targets"});
  if (!j.contains("plant")) throw Error("config.plant is required");
  if (!j.contains("nrc")) throw Error("config.nrc is required");
  ExperimentConfig c;
  try {
    c.plant = parse_plant(j.at("plant"));
    c.nrc = parse_nrc(j.at("nrc"));
    if (j.contains("tracker")) c.tracker = parse_tracker(j.at("tracker"));
    if (j.contains("grid")) c.grid = parse_grid(j.at("grid"));
    if (j.contains("sim")) c.sim = parse_sim(j.at("sim"));
    if (j.contains("targets")) c.targets = parse_targets(j.at("targets"));
  } catch (const json::exception& e) {
    throw Error(std::string("config schema violation: ") + e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string serialize_config(const ExperimentConfig& c) {
  json j;
  json& p = j["plant"];
  p["gain"] = c.plant.gain;
  p["modes"] = json::array();
  for (const auto& m : c.plant.modes) p["modes"].push_back({{"freq_hz", m.freq_hz}, {"zeta", m.zeta}, {"weight", m.weight}});
  put_opt(p, "amp_corner_hz", c.plant.amp_corner_hz);
  put_opt(p, "delay_us", c.plant.delay_us);

  json& n = j["nrc"];
  n["gamma"] = c.nrc.gamma;
  n["n"] = c.nrc.n;
  put_opt(n, "taming_l", c.nrc.taming_l);

  if (c.tracker) {
    json& t = j["tracker"];
    put_opt(t, "kp", c.tracker->kp);
    put_opt(t, "omega_b_hz", c.tracker->omega_b_hz);
    t["omega_i_hz"] = c.tracker->omega_i_hz;
    t["notches"] = json::array();
    for (const auto& nt : c.tracker->notches) {
      t["notches"].push_back({{"freq_hz", nt.freq_hz}, {"q_num", nt.q_num}, {"q_den", nt.q_den}});
    }
    put_opt(t, "lowpass_hz", c.tracker->lowpass_hz);
  }

  j["grid"] = {{"f_min_hz", c.grid.f_min_hz}, {"f_max_hz", c.grid.f_max_hz}, {"pts_per_decade", c.grid.pts_per_decade}};

  if (c.sim) {
    json& s = j["sim"];
    s["ts_s"] = c.sim->ts_s;
    s["duration_s"] = c.sim->duration_s;
    s["reference"] = {{"kind", c.sim->reference.kind},
                      {"amplitude", c.sim->reference.amplitude},
                      {"freq_hz", c.sim->reference.freq_hz}};
    s["seed"] = c.sim->seed;
    s["noise_amplitude"] = c.sim->noise_amplitude;
    if (c.sim->disturbance) {
      s["disturbance"] = {{"amplitude", c.sim->disturbance->amplitude}, {"freq_hz", c.sim->disturbance->freq_hz}};
    }
    s["compensate_phase"] = c.sim->compensate_phase;
    s["sweep_hz"] = c.sim->sweep_hz;
  }

  j["targets"] = {{"gm_db", c.targets.gm_db}, {"pm_deg", c.targets.pm_deg}, {"bound_db", c.targets.bound_db}};
  return j.dump(2) + "\n";
}

}  // namespace nrc
