#pragma once

#include <string>
#include <vector>

#include "malsim/config.hpp"

namespace malsim {

struct ExecOptions {
  std::string out_dir; // overrides config.output.directory when nonempty
  int threads = 1;     // independent runs within a bundle may use this many
};

struct RunResult {
  std::string name;
  bool ok = true;
  std::string error;
};

struct ReportBundle {
  std::string out_dir;
  bool all_ok = true;
  std::vector<RunResult> runs;
  std::vector<std::string> files; // manifest (relative paths, emission order)
};

// Dispatch a parsed config to the solver/analysis/ode modules and write the
// artifact files: config_used.cfg, per-run CSV time series and snapshots,
// optional SVG figures, results.kv (flat key-value summary), manifest.txt
// (every emitted file including itself). Output is deterministic: a second
// run of the same config produces byte-identical files. Failures of
// individual runs are recorded in the bundle and results.kv instead of
// aborting the others; setup errors (bad grid, unwritable directory) throw.
ReportBundle execute(const RunConfig& config, const ExecOptions& opt = {});

} // namespace malsim
