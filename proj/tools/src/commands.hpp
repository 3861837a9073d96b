#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"

namespace gvs::app {

struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  int jobs = 0;  // <= 0: hardware concurrency
  bool quiet = false;
  std::vector<std::string> inputs;
};

// Each command writes into the output directory and throws on failure.
void simulate(const ScenarioConfig& cfg, const RunOptions& opts);
void reduce(const ScenarioConfig& cfg, const RunOptions& opts);
void compare(const ScenarioConfig& cfg, const RunOptions& opts);
void estimate(const ScenarioConfig& cfg, const RunOptions& opts);
void bench(const ScenarioConfig& cfg, const RunOptions& opts);

// Loads the config (when given), runs the command and maps exceptions to
// exit codes: 0 ok, 2 config, 3 solver, 4 I/O.
int run(const std::string& command, const std::string& config_path, const RunOptions& opts);

// Marker measurement CSV: header row, then time and x/y/z per marker.
struct MarkerSeries {
  std::vector<double> time;
  std::vector<std::vector<Vec3>> positions;  // [frame][marker]
};
MarkerSeries read_marker_csv(const std::string& path, int markers);
void write_marker_csv(const std::string& path, const MarkerSeries& series);

}  // namespace gvs::app
