#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "vxshape/flow.hpp"
#include "vxshape/forcing.hpp"
#include "vxshape/partition.hpp"
#include "vxshape/restore.hpp"
#include "vxshape/solver.hpp"

namespace vxs {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using KeyValues = std::map<std::string, std::string>;

/// Parses `key = value` lines; '#' starts a comment, blank lines ignored.
KeyValues parse_config_file(const std::string& path);

/// Applies a single "key=value" override string.
void apply_override(KeyValues& kv, const std::string& assignment);

/// Fully resolved run configuration.  Unknown keys are rejected by
/// resolve_run_config with a ConfigError naming the key.
struct RunConfig {
  int grid_n = 128;
  BoundaryCondition bc = BoundaryCondition::dirichlet_zero;
  double p1 = 1.2;
  double p2 = 2.0;
  SolverConfig solver{};

  std::string f_kind = "sinpi";  // zero | sinpi | const | image
  double f_value = 0.0;
  std::string f_path;

  std::string partition_kind = "disk";  // disk | halfplane | image | all2
  double partition_cx = 0.5, partition_cy = 0.5, partition_r = 0.25;
  double partition_split = 0.5;
  double partition_sigma = 0.02, partition_beta = 3.0;
  std::string partition_path;

  std::string field_family = "translation";  // zero | translation | rotation | squeeze
  double field_cx = 0.75, field_cy = 0.5;
  double field_radius = 0.2;
  double field_amplitude = 1.0;
  double field_dirx = 1.0, field_diry = 0.0;
  double field_plateau = 0.5;

  std::vector<double> deltas;  // defaults to {6h, 4h, 2h} when empty
  std::vector<double> ts = {0.04, 0.02, 0.01};

  RestoreConfig restore;
  std::string input_path;
  unsigned seed = 1234;
};

RunConfig resolve_run_config(const KeyValues& kv);

Grid make_grid(const RunConfig& cfg);
Forcing make_forcing(const RunConfig& cfg, const Grid& grid);
RegionPartition make_partition(const RunConfig& cfg, const Grid& grid);
FieldPtr make_field(const RunConfig& cfg);
std::vector<double> effective_deltas(const RunConfig& cfg, const Grid& grid);

/// Canonical text rendering of the resolved configuration, embedded into
/// every report for reproducibility.
std::string describe_config(const RunConfig& cfg);

}  // namespace vxs
