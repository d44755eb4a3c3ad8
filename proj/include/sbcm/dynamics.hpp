#pragma once

#include "sbcm/core.hpp"
#include "sbcm/graph.hpp"
#include "sbcm/ode.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <vector>

namespace sbcm {

/// Logistic sigmoid 1/(1+exp(-t)), evaluated without overflow.
double logistic(double t);
/// log(logistic(t)), accurate for large |t|.
double log_logistic(double t);

/// Sigmoidal weight of an edge: 1/(1 + exp(gamma*(dx^2 - delta))).
double influence(double xi, double xj, const ModelParams& p, bool adjacent = true);
/// Pointwise steep limit: 1 inside the bound, 1/2 on it, 0 outside.
double influence_limit(double xi, double xj, double delta, bool adjacent = true);
/// Indicator of dx^2 < delta (0 on the boundary).
double hk_influence(double xi, double xj, double delta, bool adjacent = true);

/// Weight as a function of the opinion gap r = |xi - xj|.
inline double omega(double r, const ModelParams& p) { return logistic(p.gamma * (p.delta - r * r)); }

enum class WeightRule { sigmoid, limit, indicator };

struct InfluenceSnapshot {
  Eigen::MatrixXd weights;    // symmetric, zero off the edge set
  Eigen::VectorXd strengths;  // row sums
};

InfluenceSnapshot influence_snapshot(const Graph& g, const OpinionState& x, const ModelParams& p);

/// Right-hand side of the opinion dynamics; zealot rows are zero and
/// persuadable nodes with no weight get zero.
OpinionState velocity(const Graph& g, const OpinionState& x, const ModelParams& p);
/// Velocity component of a single node.
double node_velocity(const Graph& g, const OpinionState& x, const ModelParams& p, NodeId i);
/// Same operator with the steep-limit weights.
OpinionState hk_velocity(const Graph& g, const OpinionState& x, double delta);
/// Same operator with strict indicator weights.
OpinionState hk_strict_velocity(const Graph& g, const OpinionState& x, double delta);
OpinionState velocity_with(const Graph& g, const OpinionState& x, const ModelParams& p,
                           WeightRule rule);

double max_abs(const Eigen::VectorXd& v);

struct Trajectory {
  std::vector<double> times;
  std::vector<OpinionState> states;
  bool stopped_early = false;
  long steps = 0;

  const OpinionState& final_state() const { return states.back(); }
};

Trajectory integrate(const Graph& g, const OpinionState& x0, const ModelParams& p, double horizon,
                     const StepControl& ctl = {});

/// Like integrate but keeps only the endpoint.
OdeOutcome integrate_to_end(const Graph& g, const OpinionState& x0, const ModelParams& p,
                            double horizon, const StepControl& ctl = {});

void write_trajectory_csv(std::ostream& out, const Trajectory& traj);

}  // namespace sbcm
