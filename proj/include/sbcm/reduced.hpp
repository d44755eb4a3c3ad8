#pragma once

#include "sbcm/core.hpp"
#include "sbcm/graph.hpp"

#include <array>
#include <filesystem>
#include <string>
#include <vector>

namespace sbcm {

// One-parameter families of states on path_graph(n), n even:
//   x(theta) = (1 - theta) * harmonic + theta * (n + 1)/2 * v.
// polarized: v = -1 on nodes 0..n/2 and +1 on the rest.
// consensus: v = 0 on persuadable nodes and -1, +1 on the end zealots.
enum class FamilyKind { polarized, consensus };
std::string_view to_string(FamilyKind k);
FamilyKind family_kind_from_string(std::string_view s);

struct FamilySpec {
  FamilyKind kind = FamilyKind::polarized;
  int n = 10;

  void validate() const;
};

OpinionState family_state(const FamilySpec& spec, double theta);

/// The single node whose steady-state equation is not identically satisfied
/// along the family: the left node of the middle pair (polarized) or the
/// first persuadable node (consensus).
NodeId family_active_node(const FamilySpec& spec);

/// Velocity of the active node at family_state(theta).
double reduced_velocity(const FamilySpec& spec, double theta, const ModelParams& p);

struct FamilyRoot {
  double theta = 0.0;
  Stability reduced = Stability::marginal;  // sign of the 1-D derivative
  Stability full = Stability::marginal;     // full Jacobian of the embedded state
  double residual = 0.0;                    // full velocity at the embedded state
  double top_eigenvalue = 0.0;
};

struct FamilyCount {
  int count_full = 0;
  int count_reduced = 0;
  std::vector<FamilyRoot> roots;
};

/// Roots of reduced_velocity on [0, 1] from a uniform scan with bisection
/// refinement; theta = 0 is always a root.
FamilyCount count_stable_family(const FamilySpec& spec, const ModelParams& p,
                                int scan_points = 2001, double marginal_tol = 1e-8);

/// Class opinions x1 on first_class, x2 on second_class, zealots pinned.
OpinionState clique_embed(const PairedCliques& pc, double x1, double x2);

/// (dx1/dt, dx2/dt) from the full operator; throws Error if velocities
/// differ within a class by more than 1e-10.
std::array<double, 2> clique_reduced_velocity(const PairedCliques& pc, double x1, double x2,
                                              const ModelParams& p);

/// Same value from one representative node per class.
std::array<double, 2> clique_fast_velocity(const PairedCliques& pc, double x1, double x2,
                                           const ModelParams& p);

/// Stability of a fixed point of the two-variable field.
Stability clique_reduced_stability(const PairedCliques& pc, double x1, double x2,
                                   const ModelParams& p, double marginal_tol = 1e-8);

enum class CliqueLine { anti_diagonal, diagonal };  // x2 = -x1, x2 = x1
std::string_view to_string(CliqueLine l);

struct LineRoot {
  double x1 = 0.0;
  double x2 = 0.0;
  Stability full = Stability::marginal;
  Stability reduced = Stability::marginal;
  double residual = 0.0;
};

struct LineCount {
  int count = 0;  // roots stable in the full system
  int count_reduced = 0;
  std::vector<LineRoot> roots;
};

/// Scans x1 in [-1, 1] along the line for zeros of dx1/dt.
LineCount count_stable_on_line(const PairedCliques& pc, const ModelParams& p,
                               CliqueLine line = CliqueLine::anti_diagonal,
                               int scan_points = 1001, double marginal_tol = 1e-8);

struct GridSpec {
  double x_min = -1.5, x_max = 1.5;
  double y_min = -1.5, y_max = 1.5;
  int nx = 201, ny = 201;

  double x_at(int i) const { return nx == 1 ? x_min : x_min + (x_max - x_min) * i / (nx - 1); }
  double y_at(int j) const { return ny == 1 ? y_min : y_min + (y_max - y_min) * j / (ny - 1); }
};

struct FixedPoint {
  double x1 = 0.0, x2 = 0.0;
  Stability reduced = Stability::marginal;
  Stability full = Stability::marginal;
  double residual = 0.0;  // full velocity at the embedded state
};

struct NullclineSegment {
  int component = 1;  // 1: dx1/dt = 0, 2: dx2/dt = 0
  double xa = 0.0, ya = 0.0, xb = 0.0, yb = 0.0;
};

struct BasinCell {
  double x1 = 0.0, x2 = 0.0;
  int attractor = -1;  // index into fixed_points, -1 when unresolved
  double polarization = 0.0;
};

struct PhasePortrait {
  GridSpec grid;
  std::vector<FixedPoint> fixed_points;
  std::vector<NullclineSegment> nullclines;
  std::vector<BasinCell> basins;
  int unresolved = 0;
};

struct PortraitOptions {
  int starts_per_axis = 25;
  bool basins = true;
  double horizon = 200.0;
  int workers = 1;
  double marginal_tol = 1e-8;
};

PhasePortrait phase_portrait(const PairedCliques& pc, const ModelParams& p,
                             const GridSpec& grid = {}, const PortraitOptions& opts = {});

/// fixed_points.csv, nullclines.csv and basins.csv in `dir`.
void write_portrait(const std::filesystem::path& dir, const PhasePortrait& portrait);

}  // namespace sbcm
