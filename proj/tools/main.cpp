#include <cstdint>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nrc/config.hpp"
#include "nrc/pipeline.hpp"

namespace {

nrc::GridConfig parse_grid_override(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) parts.push_back(item);
  if (parts.size() != 3) throw nrc::Error("--grid-override expects fmin,fmax,ppd");
  nrc::GridConfig g;
  try {
    std::size_t used = 0;
    g.f_min_hz = std::stod(parts[0]);
    g.f_max_hz = std::stod(parts[1]);
    g.pts_per_decade = std::stoi(parts[2], &used);
    if (used != parts[2].size()) throw std::invalid_argument("ppd");
  } catch (const std::logic_error&) {
    throw nrc::Error("--grid-override expects numeric fmin,fmax and an integer ppd");
  }
  return g;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Resonant damping controller design and simulation"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::string out_dir = "out";
  std::string grid_override;
  std::uint64_t seed = 0;
  bool exact_tan60 = false;

  app.add_option("--out", out_dir, "Output directory")->capture_default_str();
  app.add_option("--grid-override", grid_override, "Frequency grid as fmin,fmax,ppd (Hz)");
  auto* seed_opt = app.add_option("--seed", seed, "Seed for generated noise");
  app.add_flag("--exact-tan60", exact_tan60, "Use tan(60 deg) instead of 1.75 in the PM feasibility test");

  for (auto cmd : nrc::kCommands) {
    auto* sub = app.add_subcommand(std::string(cmd));
    sub->add_option("config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  }

  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    nrc::ExperimentConfig config = nrc::parse_config(config_path);
    if (!grid_override.empty()) config.grid = parse_grid_override(grid_override);
    if (seed_opt->count() > 0) {
      if (!config.sim) throw nrc::Error("--seed needs a sim section in the config");
      config.sim->seed = seed;
    }
    config.validate();

    nrc::RunOptions options;
    options.exact_tan60 = exact_tan60;
    const nrc::RunResult result = nrc::run_command(command, config, out_dir, options);
    if (result.exit_code != 0) {
      std::cerr << "nrc " << command << ": " << result.message << '\n';
      return result.exit_code;
    }
    std::cout << nrc::summarize(result);
    for (const auto& f : result.files) std::cout << "wrote " << f.string() << '\n';
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "nrc " << command << ": " << e.what() << '\n';
    return 1;
  }
}
