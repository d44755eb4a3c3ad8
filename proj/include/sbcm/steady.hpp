#pragma once

#include "sbcm/core.hpp"
#include "sbcm/graph.hpp"
#include "sbcm/spectral.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace sbcm {

enum class Origin { harmonic, newton, continuation, integration };
std::string_view to_string(Origin o);

struct SteadyStateRecord {
  OpinionState state;
  double residual = 0.0;  // max-norm velocity at `state`
  ModelParams params;
  SpectralReport spectrum;
  Origin origin = Origin::newton;
  int iterations = 0;

  Stability classification() const { return spectrum.classification; }
};

/// Each persuadable opinion equals the mean of its neighbors; zealots pinned.
/// Throws ValidationError naming a persuadable component with no zealot.
OpinionState harmonic_state(const Graph& g);

struct NewtonOptions {
  double tol = 1e-10;
  // Convergence also needs the Newton correction below this (max norm).
  double step_tol = 1e-7;
  int max_iterations = 60;
  double condition_limit = 1e12;
  // Integrate from the best iterate when Newton stalls or hits a singular
  // Jacobian, then polish.
  bool integration_fallback = true;
  double fallback_horizon = 1e4;
  double marginal_tol = kDefaultMarginalTol;
  // When Newton lands on a state that is not stable, integrate from the
  // guess instead and return the attractor if it is stable.
  bool prefer_stable = false;
};

/// Damped Newton on the persuadable coordinates with backtracking; iterates
/// are clamped to the zealot opinion range.
/// Throws SingularJacobianError or ConvergenceError (carrying the best iterate).
SteadyStateRecord find_steady_state(const Graph& g, const ModelParams& p,
                                    const OpinionState& guess, const NewtonOptions& opts = {});

/// Wraps a converged state into a record with its spectrum.
SteadyStateRecord make_record(const Graph& g, const ModelParams& p, OpinionState x,
                              Origin origin, double marginal_tol = kDefaultMarginalTol);

enum class Termination { reached_max, singular_jacobian, diverged };
std::string_view to_string(Termination t);

struct ContinuationOptions {
  double step = 0.05;
  double min_step = 1e-6;
  // Largest accepted change of any opinion in one step, as a fraction of the
  // zealot opinion range; larger moves mean Newton jumped to another branch.
  double max_jump_fraction = 0.25;
  NewtonOptions newton{.tol = 1e-11, .integration_fallback = false};
};

struct ContinuationBranch {
  std::vector<double> gammas;
  std::vector<SteadyStateRecord> records;
  Termination terminated_reason = Termination::reached_max;
  std::optional<double> critical_gamma;
  double delta = 0.0;
};

/// Natural-parameter continuation from the harmonic state at gamma = 0.
/// Stops when the step collapses below min_step (a fold), when the top
/// eigenvalue crosses zero, or when the Jacobian condition exceeds the
/// Newton limit; the critical gamma is the midpoint of the final bracket.
ContinuationBranch continue_in_gamma(const Graph& g, double delta, double gamma_max,
                                     const ContinuationOptions& opts = {});

struct EnumerationResult {
  std::vector<SteadyStateRecord> records;
  int failed = 0;
  int starts = 0;
};

struct EnumerateOptions {
  NewtonOptions newton;
  double merge_radius = 1e-6;
  int workers = 1;
};

/// Multistart from uniform samples in the zealot opinion range ([-1, 1]
/// without zealots). Records appear in order of first discovery.
EnumerationResult enumerate_steady_states(const Graph& g, const ModelParams& p, int n_starts,
                                          std::uint64_t seed, const EnumerateOptions& opts = {});

/// Random starting states used by enumerate_steady_states.
std::vector<OpinionState> multistart_samples(const Graph& g, int n_starts, std::uint64_t seed);

struct HkProbeStep {
  double gamma = 0.0;
  bool found = false;
  std::string failure;
  OpinionState state;
  Stability classification = Stability::unstable;
  double residual = 0.0;         // sigmoid velocity
  double limit_residual = 0.0;   // steep-limit weights (1/2 on the boundary)
  double strict_residual = 0.0;  // strict indicator weights
  double min_gap_margin = 0.0;   // min over edges of |dx^2 - delta|
  bool within_hull = false;
};

struct HkProbeReport {
  std::vector<HkProbeStep> steps;
  double delta = 0.0;
  double margin = 0.0;
  std::string gap_form = "squared: |dx^2 - delta| >= a";
  bool trend_checked = false;  // needs at least two steps
  bool limit_residual_decreasing = false;
  bool strict_residual_decreasing = false;
  bool margins_ok = false;
  bool all_found = false;
  double final_limit_residual = 0.0;
  double final_strict_residual = 0.0;
};

/// Follows a stable steady state through an increasing gamma sequence and
/// measures how closely it solves the steep-limit dynamics.
HkProbeReport hk_consistency_probe(const Graph& g, double delta,
                                   const std::vector<double>& gammas, double margin,
                                   const OpinionState& initial_guess,
                                   const NewtonOptions& opts = {});

void write_steady_csv_header(std::ostream& out, int node_count);
void write_steady_csv_row(std::ostream& out, const SteadyStateRecord& r);
std::string branch_json(const ContinuationBranch& b);
std::string hk_probe_json(const HkProbeReport& r);

}  // namespace sbcm
