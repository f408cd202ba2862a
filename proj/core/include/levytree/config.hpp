#pragma once
// Flat key=value experiment configuration: parsing, defaults, validation
// and the JSON echo used by run manifests.

#include <cstdint>
#include <string>
#include <vector>

#include "levytree/gwgen.hpp"
#include "levytree/mechanism.hpp"

namespace levytree {

enum class ExperimentKind {
  gen,
  mark,
  cuts,
  theorem31,
  corollary32,
  rayleigh,
  zmoments,
  calibrate,
};

std::string kind_name(ExperimentKind kind);
ExperimentKind kind_from_name(const std::string& name);

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::rayleigh;
  BranchingMechanism mechanism = BranchingMechanism::brownian();
  OffspringLaw offspring = OffspringLaw::poisson();
  VertexId n = 1000;
  std::int64_t replicas = 200;
  double beta = 0.5;  // marking rate coefficient; defaults to mechanism beta
  std::vector<double> thresholds{0.1, 0.05, 0.02};  // descending
  std::vector<std::int64_t> orders{1, 2, 3, 4, 5};
  std::uint64_t master_seed = 1;
  std::string out_dir = "out";
  double edge_scale = 0.0;       // 0 = auto (calibrate, or 1.0 for cuts)
  double node_mass_scale = 0.0;
  std::int64_t pilot_reps = 500;
  int threads = 0;               // 0 = hardware default
  std::string tree_json;         // optional fixed-tree input (cuts, mark)

  /// Parses `key = value` lines ('#' comments, blank lines allowed; nested
  /// sections as dotted keys). Unknown keys and malformed values raise
  /// invalid_argument naming the key. Parsing applies on top of defaults,
  /// then validates.
  static ExperimentConfig from_string(const std::string& text);
  static ExperimentConfig from_file(const std::string& path);

  /// Field-level consistency checks; throws invalid_argument naming the
  /// offending field.
  void validate() const;

  /// JSON echo of every field, used verbatim inside run manifests.
  std::string to_json_string() const;
};

}  // namespace levytree
