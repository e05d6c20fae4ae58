#pragma once

#include <map>
#include <string>
#include <vector>

#include "peristokes/optimizer.hpp"

namespace peristokes {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Shape file: plain-text key/value lines (N, L, anchor, one `xi <k> <v>`
/// line per parameter). Values print with %.17g, so save/load round-trips
/// to the identical decimal string.
void save_shape(const std::string& path, const WallShapeParams& p);
WallShapeParams load_shape(const std::string& path);
std::string format_shape(const WallShapeParams& p);
WallShapeParams parse_shape(const std::string& text);

/// Batch run configuration; every key can come from the config file or a
/// --set key=value override.
struct RunConfig {
  std::string mode;  // solve | optimize | check-gradient | sample-field
  std::string shape_file;
  std::string out_dir = ".";
  unsigned long seed = 0;

  // shape defaults when no shape file is given
  int N = 5;
  double L = 2.0 * M_PI;
  double anchor = -1.0;
  double upper0 = 1.0;

  SolverConfig solver;
  Targets targets;
  OptOptions opt;

  bool optimize_upper_only = false;
  bool randomize_top_wall = false;
  double randomize_amplitude = 0.1;

  double fd_step = 1e-5;   // check-gradient
  int grid_nx = 80;        // sample-field
  int grid_ny = 40;

  void validate() const;
};

/// Parse `key value` / `key = value` lines ('#' comments). Unknown keys are
/// an error.
RunConfig load_config(const std::string& path);
void apply_override(RunConfig& cfg, const std::string& key, const std::string& value);

/// Exit codes of the batch tool.
enum ExitCode : int {
  kOk = 0,
  kConfigError = 2,
  kSolverFailure = 3,
  kNotConverged = 4,
};

/// Runs one batch job; writes artifacts under cfg.out_dir. A lockfile in
/// the output directory serializes concurrent runs.
int run(const RunConfig& cfg);

// table writers (tab-separated, self-describing header row)
std::string format_wall_fields(const ChannelGeometry& geom, const FlowSolution& fwd);
std::string format_solve_report(const FunctionalValues& fv, const FlowSolution& fwd,
                                const FlowSolution& adj);

}  // namespace peristokes
