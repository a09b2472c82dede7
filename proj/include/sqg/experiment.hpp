#pragma once

// Experiment plumbing: flat key=value configs, named checks over a finished
// trajectory, JSON-lines records, SHA-256 manifests, and the run / verify /
// diagnose entry points the CLI maps onto.
//
// Bundle layout under the output directory:
//   config.txt     canonical serialized spec (identical across reruns)
//   initial.snap   first stored slice          (snapshot format)
//   final.snap     last stored slice
//   records.jsonl  one JSON object per check record
//   run.log        wall-clock timings; the only file with timestamps,
//                  deliberately excluded from the manifest
//   manifest.json  sha256 of every bundle file above (written last)

#include <string>
#include <utility>
#include <vector>

#include "sqg/extension.hpp"
#include "sqg/solver.hpp"

namespace sqg {

struct ExperimentSpec {
  SimConfig sim;  // grid set from n_points_per_axis / domain_length keys
  unsigned long long seed = 1;
  int band = 4;          // initial-data band limit
  double amplitude = 1.0;
  std::vector<std::string> checks;  // empty list = trajectory only
  ExtensionConfig ext;   // ext_ keys; alpha always mirrors sim.alpha

  void validate() const;
};

/// Parses the flat key=value text ('#' comments, blank lines ignored).
/// Unknown keys are errors. The `checks` key is a comma-separated list; the
/// literal value "default" (also the behavior when the key is absent)
/// selects default_checks(), "all" selects all_checks().
ExperimentSpec parse_experiment(const std::string& text);
ExperimentSpec load_experiment(const std::string& path);

/// Canonical serialization (fixed key order, 17 significant digits);
/// parse(serialize(s)) reproduces s exactly.
std::string serialize_experiment(const ExperimentSpec& spec);

std::vector<std::string> default_checks();
std::vector<std::string> all_checks();

struct CheckRecord {
  std::string check;
  std::string case_label;
  double value = 0.0;      // violation magnitude; pass <=> value <= tolerance
  double tolerance = 0.0;
  bool pass = false;
  std::string detail;
};

/// One JSON object, fixed key order, floats at 17 significant digits.
std::string to_json_line(const CheckRecord& rec);

/// Runs every named check against the trajectory (worker pool; record order
/// is deterministic regardless of scheduling).
std::vector<CheckRecord> run_checks(const TrajectoryStore& traj,
                                    const ExperimentSpec& spec);

std::string sha256_file(const std::string& path);

/// Simulate per config and write the bundle. Returns 0 on success, 1 when
/// the run aborted (bundle still written, marked incomplete), 2 on setup
/// errors.
int cmd_run(const std::string& config_path, const std::string& out_dir);

/// Re-hashes the bundle and re-evaluates every record's value against the
/// compiled-in tolerance table. Returns 0 iff everything passes; prints a
/// one-line summary per problem. Missing or corrupt bundles return 2.
int cmd_verify(const std::string& bundle_dir);

/// Single check against a stored snapshot, parameters as key=value pairs.
/// Supported: cordoba (param alpha, f), extension_identity (param alpha),
/// holder (params cx, cy, mu, scales, r0), barriers (param b, cells).
int cmd_diagnose(const std::string& snapshot_path, const std::string& check,
                 const std::vector<std::pair<std::string, std::string>>& params);

}  // namespace sqg
