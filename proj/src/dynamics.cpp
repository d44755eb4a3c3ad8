#include "sbcm/dynamics.hpp"

#include "sbcm/io.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace sbcm {

namespace {

// Below this total weight the row is renormalized in log space.
constexpr double kTinyStrength = 1e-250;

void check_size(const Graph& g, const OpinionState& x) {
  if (x.size() != g.node_count())
    throw ValidationError("state has " + std::to_string(x.size()) + " entries, graph has " +
                          std::to_string(g.node_count()) + " nodes");
}

double edge_weight(double xi, double xj, const ModelParams& p, WeightRule rule) {
  switch (rule) {
    case WeightRule::sigmoid: return influence(xi, xj, p);
    case WeightRule::limit: return influence_limit(xi, xj, p.delta);
    case WeightRule::indicator: return hk_influence(xi, xj, p.delta);
  }
  return 0.0;
}

double row_velocity(const Graph& g, const OpinionState& x, const ModelParams& p, NodeId i,
                    WeightRule rule) {
  if (g.is_zealot(i)) return 0.0;
  auto nb = g.neighbors(i);
  if (nb.empty()) return 0.0;
  const double xi = x[i];
  double num = 0.0, s = 0.0;
  for (NodeId j : nb) {
    double w = edge_weight(xi, x[j], p, rule);
    num += w * (x[j] - xi);
    s += w;
  }
  if (rule != WeightRule::sigmoid) return s > 0.0 ? num / s : 0.0;
  if (s >= kTinyStrength) return num / s;

  // Every weight underflowed: the ratio is still well defined, so rescale
  // by the largest log-weight.
  double lmax = -std::numeric_limits<double>::infinity();
  for (NodeId j : nb) {
    double d = x[j] - xi;
    lmax = std::max(lmax, log_logistic(p.gamma * (p.delta - d * d)));
  }
  num = 0.0;
  s = 0.0;
  for (NodeId j : nb) {
    double d = x[j] - xi;
    double w = std::exp(log_logistic(p.gamma * (p.delta - d * d)) - lmax);
    num += w * d;
    s += w;
  }
  return num / s;
}

}  // namespace

double logistic(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  double e = std::exp(t);
  return e / (1.0 + e);
}

double log_logistic(double t) {
  if (t >= 0.0) return -std::log1p(std::exp(-t));
  return t - std::log1p(std::exp(t));
}

double influence(double xi, double xj, const ModelParams& p, bool adjacent) {
  if (!adjacent) return 0.0;
  double d = xi - xj;
  return logistic(p.gamma * (p.delta - d * d));
}

double influence_limit(double xi, double xj, double delta, bool adjacent) {
  if (!adjacent) return 0.0;
  double d2 = (xi - xj) * (xi - xj);
  if (d2 < delta) return 1.0;
  if (d2 == delta) return 0.5;
  return 0.0;
}

double hk_influence(double xi, double xj, double delta, bool adjacent) {
  if (!adjacent) return 0.0;
  double d2 = (xi - xj) * (xi - xj);
  return d2 < delta ? 1.0 : 0.0;
}

InfluenceSnapshot influence_snapshot(const Graph& g, const OpinionState& x, const ModelParams& p) {
  check_size(g, x);
  const int n = g.node_count();
  InfluenceSnapshot snap{Eigen::MatrixXd::Zero(n, n), Eigen::VectorXd::Zero(n)};
  for (const Edge& e : g.edges()) {
    double w = influence(x[e.first], x[e.second], p);
    snap.weights(e.first, e.second) = w;
    snap.weights(e.second, e.first) = w;
  }
  snap.strengths = snap.weights.rowwise().sum();
  return snap;
}

OpinionState velocity_with(const Graph& g, const OpinionState& x, const ModelParams& p,
                           WeightRule rule) {
  check_size(g, x);
  OpinionState f = OpinionState::Zero(g.node_count());
  for (NodeId i : g.persuadable()) f[i] = row_velocity(g, x, p, i, rule);
  return f;
}

OpinionState velocity(const Graph& g, const OpinionState& x, const ModelParams& p) {
  return velocity_with(g, x, p, WeightRule::sigmoid);
}

double node_velocity(const Graph& g, const OpinionState& x, const ModelParams& p, NodeId i) {
  return row_velocity(g, x, p, i, WeightRule::sigmoid);
}

OpinionState hk_velocity(const Graph& g, const OpinionState& x, double delta) {
  return velocity_with(g, x, ModelParams{0.0, delta}, WeightRule::limit);
}

OpinionState hk_strict_velocity(const Graph& g, const OpinionState& x, double delta) {
  return velocity_with(g, x, ModelParams{0.0, delta}, WeightRule::indicator);
}

double max_abs(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

OdeOutcome integrate_to_end(const Graph& g, const OpinionState& x0, const ModelParams& p,
                            double horizon, const StepControl& ctl) {
  p.validate();
  auto rhs = [&](const Eigen::VectorXd& y, Eigen::VectorXd& dydt) { dydt = velocity(g, y, p); };
  OdeOutcome out = solve_ode(rhs, g.pinned(x0), horizon, ctl);
  out.y = g.pinned(std::move(out.y));
  return out;
}

Trajectory integrate(const Graph& g, const OpinionState& x0, const ModelParams& p, double horizon,
                     const StepControl& ctl) {
  p.validate();
  Trajectory traj;
  double next_sample = 0.0;
  auto rhs = [&](const Eigen::VectorXd& y, Eigen::VectorXd& dydt) { dydt = velocity(g, y, p); };
  auto observer = [&](double t, const Eigen::VectorXd& y, const Eigen::VectorXd& dydt) {
    bool last = t >= horizon || (ctl.stop_tol > 0.0 && max_abs(dydt) < ctl.stop_tol);
    if (t >= next_sample || last || traj.times.empty()) {
      traj.times.push_back(t);
      traj.states.push_back(y);
      next_sample = t + ctl.output_interval;
    }
    return true;
  };
  OdeOutcome out = solve_ode(rhs, g.pinned(x0), horizon, ctl, observer);
  if (traj.times.back() != out.t) {
    traj.times.push_back(out.t);
    traj.states.push_back(out.y);
  }
  traj.stopped_early = out.stopped_early;
  traj.steps = out.steps;
  return traj;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  out << 't';
  const auto n = traj.states.empty() ? 0 : traj.states.front().size();
  for (Eigen::Index i = 0; i < n; ++i) out << ",x_" << i;
  out << '\n';
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    out << format_double(traj.times[k]);
    for (Eigen::Index i = 0; i < n; ++i) out << ',' << format_double(traj.states[k][i]);
    out << '\n';
  }
}

}  // namespace sbcm
