#include "levytree/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "levytree/gwgen.hpp"
#include "levytree/record.hpp"
#include "levytree/regraft.hpp"
#include "levytree/rng.hpp"
#include "levytree/stats.hpp"
#include "levytree/tree.hpp"
#include "levytree/tree_io.hpp"

namespace levytree {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double x) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  if (ec != std::errc{}) throw std::runtime_error("fmt: double conversion");
  return std::string(buf, ptr);
}

std::string fmt(std::int64_t x) { return std::to_string(x); }

/// Buffers artifacts and writes them only once the run has succeeded, so a
/// failing run leaves no partial outputs.
class ArtifactSet {
 public:
  explicit ArtifactSet(std::string dir) : dir_(std::move(dir)) {}

  void add(std::string name, std::string content) {
    files_.emplace_back(std::move(name), std::move(content));
  }

  void flush() {
    fs::create_directories(dir_);
    std::vector<fs::path> written;
    try {
      for (const auto& [name, content] : files_) {
        const fs::path path = fs::path(dir_) / name;
        std::ofstream out(path, std::ios::binary);
        if (!out) {
          throw std::runtime_error("cannot open '" + path.string() +
                                   "' for writing");
        }
        out << content;
        out.flush();
        if (!out) {
          throw std::runtime_error("failed writing '" + path.string() + "'");
        }
        written.push_back(path);
      }
    } catch (...) {
      for (const fs::path& p : written) {
        std::error_code ec;
        fs::remove(p, ec);
      }
      throw;
    }
  }

 private:
  std::string dir_;
  std::vector<std::pair<std::string, std::string>> files_;
};

/// Runs body(0..count-1) on a shared-counter pool. Results must be written
/// to replica-indexed slots; the call order is unspecified but the slot
/// layout makes output independent of the worker count.
void parallel_for(std::int64_t count, int threads,
                  const std::function<void(std::int64_t)>& body) {
  const int workers =
      int(std::min<std::int64_t>(std::max(threads, 1), std::max<std::int64_t>(count, 1)));
  if (workers <= 1) {
    for (std::int64_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex err_mutex;
  std::exception_ptr err;
  const auto work = [&] {
    for (;;) {
      if (failed.load(std::memory_order_relaxed)) return;
      const std::int64_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(err_mutex);
        if (!err) err = std::current_exception();
        failed.store(true, std::memory_order_relaxed);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(std::size_t(workers));
  for (int t = 0; t < workers; ++t) pool.emplace_back(work);
  for (std::thread& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

double rayleigh_cdf(double x) {
  return x <= 0.0 ? 0.0 : -std::expm1(-0.5 * x * x);
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double mechanism_gamma(const BranchingMechanism& mech) {
  return mech.levy_kind() == LevyKind::stable ? mech.stable_spec().gamma : 2.0;
}

struct ScaleInfo {
  double edge_scale = 1.0;
  bool calibrated = false;
  CalibrationResult calib{};
};

ScaleInfo resolve_scale(const ExperimentConfig& cfg) {
  if (cfg.edge_scale > 0.0) return ScaleInfo{cfg.edge_scale, false, {}};
  if (cfg.kind == ExperimentKind::theorem31 ||
      cfg.kind == ExperimentKind::corollary32 ||
      cfg.kind == ExperimentKind::rayleigh) {
    Rng pilot(cfg.master_seed, "pilot", 0);
    const CalibrationResult calib =
        calibrate_edge_scale(cfg.offspring, cfg.n, cfg.pilot_reps, pilot);
    return ScaleInfo{calib.edge_scale, true, calib};
  }
  return ScaleInfo{1.0, false, {}};
}

WTree replica_tree(const ExperimentConfig& cfg, const ScalingPlan& plan,
                   const char* stage, std::int64_t replica) {
  Rng rng(cfg.master_seed, stage, std::uint32_t(replica));
  const auto parent = sample_conditioned_tree(cfg.offspring, cfg.n, rng);
  return rescale(parent, plan);
}

json skipped_entry(const std::string& test, const char* reason) {
  return json{{"test", test}, {"skipped", true}, {"reason", reason}};
}

/// KS entry, or a skip marker when either sample is too small for the test
/// precondition.
json ks_entry_one(const SampleSet& s, const std::function<double(double)>& cdf) {
  if (s.values.size() < 50) return skipped_entry(s.label, "needs >= 50 samples");
  return json::parse(ks_report_to_json(ks_one_sample(s, cdf)));
}

json ks_entry_two(const SampleSet& a, const SampleSet& b) {
  if (a.values.size() < 50 || b.values.size() < 50) {
    return skipped_entry(a.label + " vs " + b.label, "needs >= 50 samples");
  }
  return json::parse(ks_report_to_json(ks_two_sample(a, b)));
}

SampleSet make_set(std::vector<double> values, std::string label,
                   const ExperimentConfig& cfg) {
  return SampleSet{std::move(values), std::move(label),
                   SeedInfo{cfg.master_seed, 0, cfg.replicas}};
}

json moment_entry(const SampleSet& s) {
  if (s.values.size() < 2) return json{{"skipped", true}};
  const std::int64_t one[] = {1};
  const auto m = moments(s, one);
  return json{{"mean", m[0].value}, {"stderr", m[0].stderr_jack}};
}

// ---------------------------------------------------------------------------
// Per-kind pipelines. Each fills the artifact set and the manifest counts.

void run_gen(const ExperimentConfig& cfg, const ScalingPlan& plan,
             ArtifactSet& files, json& counts) {
  std::vector<WTree> trees(std::size_t(cfg.replicas),
                           WTree::build({kNoVertex}, {0.0}, {0.0}, {0.0}));
  parallel_for(cfg.replicas, resolve_threads(cfg.threads),
               [&](std::int64_t r) {
                 trees[std::size_t(r)] = replica_tree(cfg, plan, "tree", r);
               });

  std::string csv =
      "# replica_id: replica index; total_mass: sum of vertex masses; "
      "total_length: sum of edge lengths\n"
      "replica_id,total_mass,total_length\n";
  for (std::int64_t r = 0; r < cfg.replicas; ++r) {
    const WTree& t = trees[std::size_t(r)];
    files.add("tree_" + std::to_string(r) + ".json", tree_to_json(t) + "\n");
    csv += fmt(r) + "," + fmt(t.total_mass()) + "," + fmt(t.total_length()) +
           "\n";
  }
  files.add("samples.csv", csv);
  counts["trees"] = cfg.replicas;
}

void run_mark(const ExperimentConfig& cfg, const ScalingPlan& plan,
              ArtifactSet& files, json& counts) {
  std::unique_ptr<WTree> fixed;
  if (!cfg.tree_json.empty()) {
    fixed = std::make_unique<WTree>(read_tree_json(cfg.tree_json));
  }

  struct Row {
    double theta_total = 0.0;
    double sigma_total = 0.0;
    std::string decomposition_csv;
  };
  std::vector<Row> rows(std::size_t(cfg.replicas));
  std::int64_t classes_total = 0;

  parallel_for(cfg.replicas, resolve_threads(cfg.threads),
               [&](std::int64_t r) {
    const WTree tree = fixed ? *fixed : replica_tree(cfg, plan, "tree", r);
    Rng mark_rng(cfg.master_seed, "marks", std::uint32_t(r));
    const MarkedTree marked = assign_marks(tree, cfg.beta, mark_rng);
    const PruneDecomposition decomp = decompose_classes(marked);

    std::string csv =
        "# theta_i: class removal time; sigma_i: class mass; graft_pos: "
        "distance from the regraft root; attach_height: height of the "
        "attach vertex in the source tree\n"
        "theta_i,sigma_i,graft_pos,attach_height\n";
    for (const PruneClass& c : decomp.classes) {
      csv += fmt(c.theta) + "," + fmt(c.sigma) + "," + fmt(c.graft_pos) +
             "," + fmt(tree.height(c.attach)) + "\n";
    }
    rows[std::size_t(r)] =
        Row{decomp.theta_total, decomp.sigma_total, std::move(csv)};
  });

  std::string samples =
      "# replica_id: replica index; Theta: mass integral of the record "
      "values; sigma_check: total class mass\n"
      "replica_id,Theta,sigma_check\n";
  for (std::int64_t r = 0; r < cfg.replicas; ++r) {
    Row& row = rows[std::size_t(r)];
    // Two header lines per file; the rest are class rows.
    classes_total +=
        std::int64_t(std::count(row.decomposition_csv.begin(),
                                row.decomposition_csv.end(), '\n')) -
        2;
    files.add("decomposition_" + std::to_string(r) + ".csv",
              std::move(row.decomposition_csv));
    samples += fmt(r) + "," + fmt(row.theta_total) + "," +
               fmt(row.sigma_total) + "\n";
  }
  files.add("samples.csv", samples);
  counts["classes_total"] = classes_total;
  counts["replicas_done"] = cfg.replicas;
}

void run_cuts(const ExperimentConfig& cfg, ArtifactSet& files, json& counts,
              json& report) {
  std::vector<VertexId> fixed_parent;
  double fixed_length = 0.0;
  if (!cfg.tree_json.empty()) {
    const WTree tree = read_tree_json(cfg.tree_json);
    fixed_parent = tree.parent_array();
    fixed_length = tree.total_length();
  }
  const double edge_scale = cfg.edge_scale > 0.0 ? cfg.edge_scale : 1.0;

  struct Row {
    double len = 0.0;
    std::int64_t x = 0;
    std::int64_t xt = 0;
  };
  std::vector<Row> rows(std::size_t(cfg.replicas));

  parallel_for(cfg.replicas, resolve_threads(cfg.threads),
               [&](std::int64_t r) {
    std::vector<VertexId> parent;
    double len = 0.0;
    if (!fixed_parent.empty()) {
      parent = fixed_parent;
      len = fixed_length;
    } else {
      Rng tree_rng(cfg.master_seed, "tree", std::uint32_t(r));
      parent = sample_conditioned_tree(cfg.offspring, cfg.n, tree_rng);
      len = double(cfg.n - 1) * edge_scale;
    }
    Rng edges_rng(cfg.master_seed, "cuts-edges", std::uint32_t(r));
    Rng vertices_rng(cfg.master_seed, "cuts-vertices", std::uint32_t(r));
    rows[std::size_t(r)] = Row{len, count_cuts_edges(parent, edges_rng),
                               count_cuts_vertices(parent, vertices_rng)};
  });

  std::string csv =
      "# replica_id: replica index; L_n: total edge length of the tree; "
      "X_n: cuts until the root is isolated (edge picks); Xtilde_n: cuts "
      "until the root is removed (parent-side vertex removal)\n"
      "replica_id,L_n,X_n,Xtilde_n\n";
  std::vector<double> xs(std::size_t(cfg.replicas));
  std::vector<double> xts(std::size_t(cfg.replicas));
  for (std::int64_t r = 0; r < cfg.replicas; ++r) {
    const Row& row = rows[std::size_t(r)];
    csv += fmt(r) + "," + fmt(row.len) + "," + fmt(row.x) + "," +
           fmt(row.xt) + "\n";
    xs[std::size_t(r)] = double(row.x);
    xts[std::size_t(r)] = double(row.xt);
  }
  files.add("samples.csv", csv);

  report["moments"] = json{
      {"X_n", moment_entry(make_set(std::move(xs), "X_n", cfg))},
      {"Xtilde_n", moment_entry(make_set(std::move(xts), "Xtilde_n", cfg))},
  };
  counts["replicas_done"] = cfg.replicas;
}

std::string summary_header(const std::vector<double>& thresholds) {
  std::string header =
      "# replica_id: replica index; kind: regraft or bismut; branch_len: "
      "Theta or H; n_atoms: atom count; count_ge_E: atoms with mass >= E\n"
      "replica_id,kind,branch_len,n_atoms";
  for (const double eps : thresholds) header += ",count_ge_" + fmt(eps);
  return header + "\n";
}

std::string summary_row(std::int64_t replica, const char* kind,
                        const RegraftSummary& s) {
  std::string row = fmt(replica) + std::string(",") + kind + "," +
                    fmt(s.branch_len) + "," + fmt(std::int64_t(s.atoms.size()));
  for (const std::int64_t c : s.threshold_counts) row += "," + fmt(c);
  return row + "\n";
}

void run_theorem31(const ExperimentConfig& cfg, const ScalingPlan& plan,
                   ArtifactSet& files, json& counts, json& report) {
  const std::size_t n_eps = cfg.thresholds.size();
  struct Row {
    double theta = 0.0;
    double h = 0.0;
    double sigma_check = 0.0;
    RegraftSummary regraft;
    RegraftSummary bismut;
  };
  std::vector<Row> rows(std::size_t(cfg.replicas));

  parallel_for(cfg.replicas, resolve_threads(cfg.threads),
               [&](std::int64_t r) {
    Row row;
    {
      const WTree tree = replica_tree(cfg, plan, "tree", r);
      Rng mark_rng(cfg.master_seed, "marks", std::uint32_t(r));
      const MarkedTree marked = assign_marks(tree, cfg.beta, mark_rng);
      const PruneDecomposition decomp = decompose_classes(marked);
      row.theta = decomp.theta_total;
      row.sigma_check = decomp.sigma_total;
      row.regraft = regraft_summary(decomp, cfg.thresholds);
    }
    {
      const WTree tree = replica_tree(cfg, plan, "tree-h", r);
      Rng leaf_rng(cfg.master_seed, "leaf", std::uint32_t(r));
      const VertexId v = sample_vertex_by_mass(tree, leaf_rng);
      row.bismut = bismut_summary(tree, v, cfg.thresholds);
      row.h = row.bismut.branch_len;
    }
    rows[std::size_t(r)] = std::move(row);
  });

  std::string samples =
      "# replica_id: replica index; Theta: mass integral of the record "
      "values (regraft branch length); H: height of a mass-weighted vertex "
      "in an independent tree; sigma_check: total class mass\n"
      "replica_id,Theta,H,sigma_check\n";
  std::string summary = summary_header(cfg.thresholds);
  std::vector<double> thetas(rows.size());
  std::vector<double> hs(rows.size());
  std::vector<std::vector<double>> regraft_counts(n_eps);
  std::vector<std::vector<double>> bismut_counts(n_eps);
  for (auto& c : regraft_counts) c.resize(rows.size());
  for (auto& c : bismut_counts) c.resize(rows.size());
  for (std::int64_t r = 0; r < cfg.replicas; ++r) {
    const Row& row = rows[std::size_t(r)];
    samples += fmt(r) + "," + fmt(row.theta) + "," + fmt(row.h) + "," +
               fmt(row.sigma_check) + "\n";
    summary += summary_row(r, "regraft", row.regraft);
    summary += summary_row(r, "bismut", row.bismut);
    thetas[std::size_t(r)] = row.theta;
    hs[std::size_t(r)] = row.h;
    for (std::size_t k = 0; k < n_eps; ++k) {
      regraft_counts[k][std::size_t(r)] = double(row.regraft.threshold_counts[k]);
      bismut_counts[k][std::size_t(r)] = double(row.bismut.threshold_counts[k]);
    }
  }
  files.add("samples.csv", samples);
  files.add("summary.csv", summary);

  const SampleSet theta_set = make_set(std::move(thetas), "theta", cfg);
  const SampleSet h_set = make_set(std::move(hs), "h", cfg);
  json ks = json::array();
  if (cfg.mechanism.is_brownian()) {
    SampleSet h_named = h_set;
    h_named.label = "h_vs_rayleigh";
    ks.push_back(ks_entry_one(h_named, rayleigh_cdf));
  }
  ks.push_back(ks_entry_two(theta_set, h_set));
  for (std::size_t k = 0; k < n_eps; ++k) {
    const std::string eps = fmt(cfg.thresholds[k]);
    ks.push_back(ks_entry_two(
        make_set(std::move(regraft_counts[k]), "regraft_count_ge_" + eps, cfg),
        make_set(std::move(bismut_counts[k]), "bismut_count_ge_" + eps, cfg)));
  }
  report["ks"] = std::move(ks);

  json mom{{"theta", moment_entry(theta_set)}, {"h", moment_entry(h_set)}};
  if (cfg.mechanism.is_brownian()) {
    const double target = std::sqrt(std::numbers::pi / 2.0);
    mom["theta_mean_target"] = target;
    if (theta_set.values.size() >= 2) {
      const std::int64_t one[] = {1};
      const double mean = moments(theta_set, one)[0].value;
      mom["theta_mean_rel_err"] = std::abs(mean - target) / target;
    }
  }
  report["moments"] = std::move(mom);
  counts["replicas_done"] = cfg.replicas;
}

void run_corollary32(const ExperimentConfig& cfg, const ScalingPlan& plan,
                     ArtifactSet& files, json& counts, json& report) {
  const std::size_t n_eps = cfg.thresholds.size();
  std::vector<double> tail_norm(n_eps);  // sqrt(2/(pi eps))
  for (std::size_t k = 0; k < n_eps; ++k) {
    tail_norm[k] = brownian_canonical_tail(cfg.mechanism, cfg.thresholds[k]);
  }

  struct Row {
    double theta = 0.0;
    double sigma_check = 0.0;
    RegraftSummary regraft;
  };
  std::vector<Row> rows(std::size_t(cfg.replicas));
  parallel_for(cfg.replicas, resolve_threads(cfg.threads),
               [&](std::int64_t r) {
    const WTree tree = replica_tree(cfg, plan, "tree", r);
    Rng mark_rng(cfg.master_seed, "marks", std::uint32_t(r));
    const MarkedTree marked = assign_marks(tree, cfg.beta, mark_rng);
    const PruneDecomposition decomp = decompose_classes(marked);
    rows[std::size_t(r)] = Row{decomp.theta_total, decomp.sigma_total,
                               regraft_summary(decomp, cfg.thresholds)};
  });

  std::string samples =
      "# replica_id: replica index; Theta: regraft branch length; "
      "sigma_check: total class mass; count_ge_E: classes with mass >= E; "
      "est_E: count normalized by sqrt(2/(pi E)); rel_err_E: |est - "
      "Theta|/Theta\n"
      "replica_id,Theta,sigma_check";
  for (const double eps : cfg.thresholds) samples += ",count_ge_" + fmt(eps);
  for (const double eps : cfg.thresholds) samples += ",est_" + fmt(eps);
  for (const double eps : cfg.thresholds) samples += ",rel_err_" + fmt(eps);
  samples += "\n";

  std::string summary = summary_header(cfg.thresholds);
  std::vector<std::vector<double>> rel_errs(n_eps);
  for (std::int64_t r = 0; r < cfg.replicas; ++r) {
    const Row& row = rows[std::size_t(r)];
    samples += fmt(r) + "," + fmt(row.theta) + "," + fmt(row.sigma_check);
    std::vector<double> est(n_eps);
    for (std::size_t k = 0; k < n_eps; ++k) {
      samples += "," + fmt(row.regraft.threshold_counts[k]);
      est[k] = double(row.regraft.threshold_counts[k]) / tail_norm[k];
    }
    for (std::size_t k = 0; k < n_eps; ++k) samples += "," + fmt(est[k]);
    for (std::size_t k = 0; k < n_eps; ++k) {
      const double rel = std::abs(est[k] - row.theta) / row.theta;
      rel_errs[k].push_back(rel);
      samples += "," + fmt(rel);
    }
    samples += "\n";
    summary += summary_row(r, "regraft", row.regraft);
  }
  files.add("samples.csv", samples);
  files.add("summary.csv", summary);

  json per_eps = json::array();
  std::vector<double> medians(n_eps);
  for (std::size_t k = 0; k < n_eps; ++k) {
    medians[k] = median_of(rel_errs[k]);
    per_eps.push_back(json{{"eps", cfg.thresholds[k]},
                           {"median_rel_err", medians[k]},
                           {"tail_norm", tail_norm[k]}});
  }
  // Trend across descending thresholds: medians should shrink; one
  // violation within 10% is tolerated.
  int violations = 0;
  bool within = true;
  for (std::size_t k = 1; k < n_eps; ++k) {
    if (medians[k] > medians[k - 1]) {
      ++violations;
      if (medians[k] > 1.10 * medians[k - 1]) within = false;
    }
  }
  report["corollary32"] = json{{"per_eps", std::move(per_eps)},
                               {"trend_violations", violations},
                               {"trend_ok", within && violations <= 1}};
  counts["replicas_done"] = cfg.replicas;
}

void run_rayleigh(const ExperimentConfig& cfg, const ScalingPlan& plan,
                  ArtifactSet& files, json& counts, json& report) {
  std::vector<double> hs(std::size_t(cfg.replicas));
  parallel_for(cfg.replicas, resolve_threads(cfg.threads),
               [&](std::int64_t r) {
    const WTree tree = replica_tree(cfg, plan, "tree-h", r);
    Rng leaf_rng(cfg.master_seed, "leaf", std::uint32_t(r));
    hs[std::size_t(r)] = tree.height(sample_vertex_by_mass(tree, leaf_rng));
  });

  std::string samples =
      "# replica_id: replica index; H: height of a mass-weighted vertex\n"
      "replica_id,H\n";
  for (std::int64_t r = 0; r < cfg.replicas; ++r) {
    samples += fmt(r) + "," + fmt(hs[std::size_t(r)]) + "\n";
  }
  files.add("samples.csv", samples);

  const SampleSet h_set = make_set(std::move(hs), "h_vs_rayleigh", cfg);
  report["ks"] = json::array({ks_entry_one(h_set, rayleigh_cdf)});

  json mom;
  mom["h"] = moment_entry(h_set);
  if (h_set.values.size() >= 2) {
    const auto ests = moments(h_set, cfg.orders);
    json per_order = json::array();
    for (const MomentEstimate& e : ests) {
      const double ref = z_moment(2.0, 0.5, int(e.order));
      per_order.push_back(json{{"order", e.order},
                               {"estimate", e.value},
                               {"stderr", e.stderr_jack},
                               {"reference", ref},
                               {"rel_err", std::abs(e.value - ref) / ref}});
    }
    mom["orders"] = std::move(per_order);
  }
  report["moments"] = std::move(mom);
  counts["replicas_done"] = cfg.replicas;
}

void run_zmoments(const ExperimentConfig& cfg, ArtifactSet& files,
                  json& counts, json& report) {
  const bool stable = cfg.mechanism.levy_kind() == LevyKind::stable;
  const double gamma = stable ? cfg.mechanism.stable_spec().gamma : 2.0;
  const double c0 = stable ? cfg.mechanism.stable_spec().c0 : cfg.mechanism.beta();
  const bool rayleigh_case = !stable && c0 == 0.5;

  std::string csv =
      "# order: moment order; value: E[Z^order] for the normalized "
      "branch-length law\n"
      "order,value\n";
  json values = json::array();
  for (const std::int64_t k : cfg.orders) {
    const double v = z_moment(gamma, c0, int(k));
    csv += fmt(k) + "," + fmt(v) + "\n";
    json entry{{"order", k}, {"value", v}};
    if (rayleigh_case) {
      const double ref =
          std::pow(2.0, double(k) / 2.0) * std::tgamma(1.0 + double(k) / 2.0);
      entry["rayleigh_ref"] = ref;
      entry["rel_err"] = std::abs(v - ref) / ref;
    }
    values.push_back(std::move(entry));
  }
  files.add("zmoments.csv", csv);
  report["zmoments"] =
      json{{"gamma", gamma}, {"c0", c0}, {"values", std::move(values)}};
  counts["orders"] = cfg.orders.size();
}

void run_calibrate(const ExperimentConfig& cfg, json& counts, json& report) {
  Rng pilot(cfg.master_seed, "pilot", 0);
  const CalibrationResult res =
      calibrate_edge_scale(cfg.offspring, cfg.n, cfg.pilot_reps, pilot);
  report["calibration"] = json{{"c", res.c},
                               {"edge_scale", res.edge_scale},
                               {"rel_stderr", res.rel_stderr},
                               {"n", res.n},
                               {"pilot_reps", res.pilot_reps}};
  counts["pilot_reps"] = res.pilot_reps;
}

}  // namespace

int resolve_threads(int configured) {
  if (configured > 0) return configured;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : int(hw);
}

void run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto t_start = Clock::now();

  ArtifactSet files(cfg.out_dir);
  json counts{{"replicas", cfg.replicas}, {"n", cfg.n}};
  json report{{"kind", kind_name(cfg.kind)}};

  double calibrate_seconds = 0.0;
  ScaleInfo scale;
  ScalingPlan plan{cfg.n, 1.0, 0.0, 0.0, 2.0};
  const bool needs_plan =
      cfg.kind == ExperimentKind::gen || cfg.kind == ExperimentKind::mark ||
      cfg.kind == ExperimentKind::theorem31 ||
      cfg.kind == ExperimentKind::corollary32 ||
      cfg.kind == ExperimentKind::rayleigh;
  if (needs_plan) {
    const auto t_cal = Clock::now();
    scale = resolve_scale(cfg);
    calibrate_seconds = seconds_since(t_cal);
    plan = ScalingPlan::sigma_one(cfg.n, scale.edge_scale,
                                  cfg.node_mass_scale,
                                  mechanism_gamma(cfg.mechanism));
    counts["edge_scale_used"] = scale.edge_scale;
    if (scale.calibrated) {
      report["calibration"] = json{{"c", scale.calib.c},
                                   {"edge_scale", scale.calib.edge_scale},
                                   {"rel_stderr", scale.calib.rel_stderr},
                                   {"pilot_reps", scale.calib.pilot_reps}};
    }
  }

  const auto t_rep = Clock::now();
  switch (cfg.kind) {
    case ExperimentKind::gen:
      run_gen(cfg, plan, files, counts);
      break;
    case ExperimentKind::mark:
      run_mark(cfg, plan, files, counts);
      break;
    case ExperimentKind::cuts:
      run_cuts(cfg, files, counts, report);
      break;
    case ExperimentKind::theorem31:
      run_theorem31(cfg, plan, files, counts, report);
      break;
    case ExperimentKind::corollary32:
      run_corollary32(cfg, plan, files, counts, report);
      break;
    case ExperimentKind::rayleigh:
      run_rayleigh(cfg, plan, files, counts, report);
      break;
    case ExperimentKind::zmoments:
      run_zmoments(cfg, files, counts, report);
      break;
    case ExperimentKind::calibrate:
      run_calibrate(cfg, counts, report);
      break;
  }
  const double replicas_seconds = seconds_since(t_rep);

  files.add("report.json", report.dump(2) + "\n");

  json manifest{
      {"config", json::parse(cfg.to_json_string())},
      {"counts", counts},
      {"kind", kind_name(cfg.kind)},
      {"seed", cfg.master_seed},
      {"version", kToolkitVersion},
  };
  manifest["timings"] = json{{"calibrate_s", calibrate_seconds},
                             {"replicas_s", replicas_seconds},
                             {"total_s", seconds_since(t_start)}};
  files.add("manifest.json", manifest.dump(2) + "\n");
  files.flush();
}

}  // namespace levytree
