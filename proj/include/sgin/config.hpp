#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "sgin/hierfl.hpp"
#include "sgin/sim.hpp"

namespace sgin::config {

struct TrainingConfig {
  hierfl::SyntheticSpec synthetic;
  int rounds = 300;
  double smoothness = 0.0;            // L; 0 skips the step-size check
  double dissimilarity_alpha = 1.0;
};

struct SweepConfig {
  double distance_min_km = 500.0;
  double distance_max_km = 6000.0;
  int distance_steps = 12;
  std::vector<double> powers_w{0.0316, 0.1, 0.5, 1.0, 2.0, 5.0};

  void validate() const;
};

struct AppConfig {
  sim::ScenarioConfig scenario;
  TrainingConfig training;
  SweepConfig sweep;

  void validate() const;
};

/// Parses INI text. Unknown sections or keys and malformed values raise ConfigError naming
/// "section.key"; the result is validated before it is returned.
AppConfig parse_config(const std::string& text);

/// Throws ConfigError when the file is missing or unreadable.
AppConfig load_config(const std::filesystem::path& path);

/// The full config in INI form, defaults included.
std::string dump_config(const AppConfig& cfg);

}  // namespace sgin::config
