#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nrc/config.hpp"
#include "nrc/time_sim.hpp"
#include "nrc/tracking.hpp"

namespace nrc {

inline constexpr std::array<std::string_view, 8> kCommands{"bode",     "design",   "rootlocus", "sens",
                                                           "margins",  "simulate", "identify",  "sweep"};

/// Continuous-time loop assembled from a config, with exact-delay evaluators.
struct LoopDesign {
  PlantSpec plant;
  RationalTF g;
  NrcTuning tuning;
  RationalTF cd;
  std::optional<TrackerSpec> tracker;
  std::optional<RationalTF> ct;

  Complex g_d(double omega) const;
  /// Requires a tracker.
  Complex t_yr(double omega) const;
  Complex loop_gain(double omega) const;
  Complex outer_loop(double omega) const;
};

LoopDesign build_design(const ExperimentConfig& config);

struct DiscreteDesign {
  DiscreteSS plant;
  DiscreteSS tracker;
  DiscreteSS nrc;
};

DiscreteDesign discretize_design(const LoopDesign& design, double ts);

struct SimRun {
  SimTrace trace;
  /// Scored over the second half of the record.
  TrackingMetrics metrics;
  int compensation_samples = 0;
};

/// Simulates the configured reference (or a sine at `sine_hz` when given).
SimRun run_simulation(const ExperimentConfig& config, const LoopDesign& design,
                      std::optional<double> sine_hz = std::nullopt);

struct RunOptions {
  bool exact_tan60 = false;
};

struct RunResult {
  int exit_code = 0;
  std::string message;
  std::vector<std::filesystem::path> files;
  /// Pretty-printed summary document; empty on failure.
  std::string summary_json;
};

/// Runs one command; module errors are reported through exit_code and message.
RunResult run_command(std::string_view command, const ExperimentConfig& config, const std::filesystem::path& out_dir,
                      const RunOptions& options = {});

/// One-page text report from a run's summary.
std::string summarize(const RunResult& result);

void write_sensitivity_csv(std::ostream& os, const SensitivityBundle& bundle);
std::string margins_json(const MarginsReport& report);
std::string bandwidth_json(const BandwidthReport& report);

}  // namespace nrc
