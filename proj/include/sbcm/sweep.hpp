#pragma once

#include "sbcm/graph.hpp"
#include "sbcm/reduced.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace sbcm {

/// A named graph. Accepted forms: "path:N", "cliques:K:aligned",
/// "cliques:K:unaligned", "karate", "file:EDGES[:ZEALOTS]".
struct Topology {
  std::string name;
  Graph graph;
  std::optional<PairedCliques> cliques;
  std::optional<int> path_n;
};

Topology resolve_topology(const std::string& spec);

struct AxisSpec {
  double min = 0.0;
  double max = 1.0;
  int points = 1;
  bool log = false;

  std::vector<double> values() const;
  void validate(const std::string& name) const;
};

enum class Experiment { family_counts, line_counts, continuation, enumerate, portrait };
std::string_view to_string(Experiment e);
Experiment experiment_from_string(std::string_view s);

struct SweepSpec {
  Experiment experiment = Experiment::family_counts;
  std::string topology = "path:12";
  AxisSpec gamma{0.01, 100.0, 30, true};
  AxisSpec delta{0.01, 2.0, 30, false};
  std::filesystem::path output_dir = "sweep_out";
  std::uint64_t seed = 1;
  int workers = 1;
  // Output basename; the experiment name when empty.
  std::string name;

  FamilyKind family = FamilyKind::polarized;
  // "reduced" or "full": which classification fills the main count file.
  // Empty picks reduced for family_counts and full for line_counts.
  std::string classification;
  int scan_points = 0;  // 0 picks the per-experiment default
  int n_starts = 20;
  GridSpec grid{-1.5, 1.5, -1.5, 1.5, 61, 61};
  double continuation_step = 0.05;

  void validate() const;
  std::string basename() const;
  std::string main_classification() const;
};

SweepSpec sweep_spec_from_json(const std::string& text, SweepSpec base = {});
std::string sweep_spec_to_json(const SweepSpec& spec);
/// JSON schema for the sweep config plus the CSV column layouts.
std::string sweep_schema_json();

struct SweepSummary {
  int cells = 0;
  int resumed = 0;  // complete rows found on disk and kept
  int computed = 0;
  std::vector<std::filesystem::path> files;
};

/// Evaluates every (gamma, delta) cell and appends one row per cell to each
/// output CSV, in cell order (delta outer, gamma inner) regardless of
/// worker count. Existing complete rows are kept, so an interrupted sweep
/// resumes where it stopped.
SweepSummary run_sweep(const SweepSpec& spec, std::ostream* log = nullptr);

}  // namespace sbcm
