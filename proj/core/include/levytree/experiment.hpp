#pragma once
// Experiment runner: replica scheduling over a worker pool and
// deterministic CSV/JSON artifact generation for each experiment kind.

#include <string>

#include "levytree/config.hpp"

namespace levytree {

inline constexpr const char* kToolkitVersion = "0.1.0";

/// Worker count actually used: the configured value when positive, else the
/// hardware concurrency (at least 1).
int resolve_threads(int configured);

/// Runs the configured experiment and writes its artifacts into
/// cfg.out_dir (created recursively). Artifacts are buffered and written
/// only after the run succeeds, so a failure leaves no partial outputs of
/// this run behind. Identical config and seed give byte-identical files
/// apart from the manifest timing fields.
void run_experiment(const ExperimentConfig& cfg);

}  // namespace levytree
