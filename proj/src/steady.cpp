#include "sbcm/steady.hpp"

#include "sbcm/dynamics.hpp"
#include "sbcm/io.hpp"
#include "sbcm/parallel.hpp"

#include "json.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>

namespace sbcm {

namespace {

Eigen::VectorXd persuadable_part(const Graph& g, const OpinionState& full) {
  const auto& pers = g.persuadable();
  Eigen::VectorXd out(static_cast<Eigen::Index>(pers.size()));
  for (std::size_t a = 0; a < pers.size(); ++a) out[static_cast<Eigen::Index>(a)] = full[pers[a]];
  return out;
}

void add_persuadable(const Graph& g, OpinionState& full, const Eigen::VectorXd& delta_p,
                     double scale) {
  const auto& pers = g.persuadable();
  for (std::size_t a = 0; a < pers.size(); ++a)
    full[pers[a]] += scale * delta_p[static_cast<Eigen::Index>(a)];
}

double residual_of(const Graph& g, const OpinionState& x, const ModelParams& p) {
  return max_abs(velocity(g, x, p));
}

struct NewtonOutcome {
  OpinionState best;
  double best_residual = 0.0;
  int iterations = 0;
  bool converged = false;
  bool singular = false;
  double condition = 0.0;
};

// Every steady state lies in the zealot opinion range, so iterates are
// clamped to it.
void clamp_to_hull(const Graph& g, OpinionState& x) {
  const auto range = g.zealot_range();
  if (!range) return;
  for (NodeId i : g.persuadable()) x[i] = std::clamp(x[i], range->first, range->second);
}

NewtonOutcome newton_iterate(const Graph& g, const ModelParams& p, OpinionState x,
                             const NewtonOptions& opts) {
  NewtonOutcome out;
  clamp_to_hull(g, x);
  OpinionState f = velocity(g, x, p);
  double res = max_abs(f);
  out.best = x;
  out.best_residual = res;
  if (!std::isfinite(res)) return out;
  for (int it = 0;; ++it) {
    Eigen::MatrixXd J;
    try {
      J = jacobian(g, x, p, true).J_P;
    } catch (const NumericalError&) {
      out.singular = true;
      out.condition = std::numeric_limits<double>::infinity();
      return out;
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(J);
    Eigen::VectorXd step = lu.solve(-persuadable_part(g, f));
    // A small residual alone is not enough: where a coupling weight has
    // underflowed the velocity is tiny far from any root, but the Newton
    // correction is not. An exactly singular J at a small residual is accepted.
    if (res < opts.tol && (!step.allFinite() || max_abs(step) < opts.step_tol)) {
      out.converged = true;
      return out;
    }
    if (it >= opts.max_iterations) return out;
    const double rcond = lu.rcond();
    if (!(rcond * opts.condition_limit > 1.0)) {
      out.singular = true;
      out.condition = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
      return out;
    }
    if (!step.allFinite()) {
      out.singular = true;
      return out;
    }
    double alpha = 1.0;
    bool accepted = false;
    while (alpha >= 1.0 / 1024.0) {
      OpinionState trial = x;
      add_persuadable(g, trial, step, alpha);
      clamp_to_hull(g, trial);
      OpinionState ft = velocity(g, trial, p);
      const double rt = max_abs(ft);
      // Below tol the residual sits at roundoff; accept a step that does not
      // make it worse so the correction can shrink.
      const bool better = res < opts.tol ? rt <= std::max(res, opts.tol)
                                         : rt < (1.0 - 1e-4 * alpha) * res;
      if (std::isfinite(rt) && better) {
        x = std::move(trial);
        f = std::move(ft);
        res = rt;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    out.iterations = it + 1;
    if (res <= out.best_residual) {
      out.best = x;
      out.best_residual = res;
    }
    if (!accepted) return out;
  }
}

}  // namespace

SteadyStateRecord solve_steady(const Graph& g, const ModelParams& p, const OpinionState& guess,
                               const NewtonOptions& opts);

std::string_view to_string(Origin o) {
  switch (o) {
    case Origin::harmonic: return "harmonic";
    case Origin::newton: return "newton";
    case Origin::continuation: return "continuation";
    case Origin::integration: return "integration";
  }
  return "unknown";
}

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::reached_max: return "reached_max";
    case Termination::singular_jacobian: return "singular_jacobian";
    case Termination::diverged: return "diverged";
  }
  return "unknown";
}

OpinionState harmonic_state(const Graph& g) {
  for (const auto& comp : persuadable_components(g).components) {
    bool touches = std::any_of(comp.begin(), comp.end(),
                               [&](NodeId i) { return g.zealot_degree(i) > 0; });
    if (!touches) {
      std::string ids;
      for (NodeId i : comp) ids += (ids.empty() ? "" : ",") + std::to_string(i);
      throw ValidationError("persuadable component {" + ids +
                            "} has no zealot neighbor; harmonic state undefined");
    }
  }
  const auto& pers = g.persuadable();
  const int m = static_cast<int>(pers.size());
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, m);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
  for (int a = 0; a < m; ++a) {
    const NodeId i = pers[a];
    A(a, a) = g.degree(i);
    for (NodeId j : g.neighbors(i)) {
      const int c = g.persuadable_index(j);
      if (c < 0)
        b[a] += g.zealot_opinion(j);
      else
        A(a, c) -= 1.0;
    }
  }
  Eigen::VectorXd xp = A.ldlt().solve(b);
  OpinionState x = g.uniform_state(0.0);
  for (int a = 0; a < m; ++a) x[pers[a]] = xp[a];
  return x;
}

SteadyStateRecord make_record(const Graph& g, const ModelParams& p, OpinionState x, Origin origin,
                              double marginal_tol) {
  SteadyStateRecord r;
  r.state = g.pinned(std::move(x));
  r.residual = residual_of(g, r.state, p);
  r.params = p;
  r.spectrum = spectral_report(g, r.state, p, marginal_tol);
  r.origin = origin;
  return r;
}

SteadyStateRecord find_steady_state(const Graph& g, const ModelParams& p,
                                    const OpinionState& guess, const NewtonOptions& opts) {
  if (!opts.prefer_stable) return solve_steady(g, p, guess, opts);
  std::optional<SteadyStateRecord> first;
  try {
    first = solve_steady(g, p, guess, opts);
    if (first->classification() == Stability::stable) return *first;
  } catch (const NumericalError&) {
  }
  StepControl ctl;
  ctl.stop_tol = std::max(opts.tol, 1e-12);
  try {
    auto end = integrate_to_end(g, guess, p, opts.fallback_horizon, ctl).y;
    auto rec = solve_steady(g, p, end, opts);
    if (rec.classification() == Stability::stable || !first) {
      rec.origin = Origin::integration;
      return rec;
    }
  } catch (const NumericalError&) {
    if (!first) throw;
  }
  return *first;
}

SteadyStateRecord solve_steady(const Graph& g, const ModelParams& p, const OpinionState& guess,
                               const NewtonOptions& opts) {
  p.validate();
  if (!g.pinned(guess).allFinite()) throw ValidationError("initial guess has non-finite entries");
  NewtonOutcome first = newton_iterate(g, p, g.pinned(guess), opts);
  if (first.converged) {
    auto r = make_record(g, p, first.best, Origin::newton, opts.marginal_tol);
    r.iterations = first.iterations;
    return r;
  }
  if (!opts.integration_fallback) {
    if (first.singular)
      throw SingularJacobianError("Jacobian is numerically singular at a Newton iterate",
                                  first.condition);
    throw ConvergenceError("Newton did not converge", first.best, first.best_residual);
  }

  StepControl ctl;
  ctl.stop_tol = std::max(opts.tol, 1e-12);
  OpinionState x = first.best;
  try {
    x = integrate_to_end(g, first.best, p, opts.fallback_horizon, ctl).y;
  } catch (const IntegrationError& e) {
    throw ConvergenceError(std::string("integration fallback failed: ") + e.what(), first.best,
                           first.best_residual);
  }
  NewtonOutcome second = newton_iterate(g, p, x, opts);
  if (second.converged) {
    auto r = make_record(g, p, second.best, Origin::integration, opts.marginal_tol);
    r.iterations = first.iterations + second.iterations;
    return r;
  }
  const auto& best = second.best_residual < first.best_residual ? second : first;
  if (second.singular)
    throw SingularJacobianError("Jacobian is numerically singular after integration fallback",
                                second.condition);
  throw ConvergenceError("Newton did not converge after integration fallback", best.best,
                         best.best_residual);
}

ContinuationBranch continue_in_gamma(const Graph& g, double delta, double gamma_max,
                                     const ContinuationOptions& opts) {
  ModelParams{gamma_max, delta}.validate();
  if (!(opts.step > 0.0) || !(opts.min_step > 0.0))
    throw ValidationError("continuation steps must be positive");
  ContinuationBranch br;
  br.delta = delta;
  const auto range = g.zealot_range();
  const double width = range ? std::max(range->second - range->first, 1e-12) : 1.0;
  const double max_jump = opts.max_jump_fraction * width;
  const double tol = opts.newton.marginal_tol;

  double gamma = 0.0;
  auto rec = make_record(g, {0.0, delta}, harmonic_state(g), Origin::harmonic, tol);
  br.gammas.push_back(gamma);
  br.records.push_back(rec);

  // Returns the corrected state at gamma_new, or nullopt on failure.
  auto correct = [&](const OpinionState& from, double gamma_new) -> std::optional<OpinionState> {
    try {
      auto r = find_steady_state(g, {gamma_new, delta}, from, opts.newton);
      if (max_abs(r.state - from) > max_jump) return std::nullopt;
      return r.state;
    } catch (const NumericalError&) {
      return std::nullopt;
    }
  };

  double h = opts.step;
  double failed_h = 0.0;
  while (gamma < gamma_max) {
    const double gamma_new = std::min(gamma + h, gamma_max);
    auto xn = correct(br.records.back().state, gamma_new);
    if (!xn) {
      failed_h = gamma_new - gamma;
      h = 0.5 * (gamma_new - gamma);
      if (h < opts.min_step) {
        br.terminated_reason = Termination::singular_jacobian;
        br.critical_gamma = gamma + 0.5 * failed_h;
        return br;
      }
      continue;
    }
    if (!xn->allFinite()) {
      br.terminated_reason = Termination::diverged;
      return br;
    }
    auto next = make_record(g, {gamma_new, delta}, *xn, Origin::continuation, tol);

    const bool was_stable = br.records.back().classification() == Stability::stable;
    if (was_stable && next.classification() != Stability::stable) {
      // Locate where the top eigenvalue reaches zero along the branch.
      double lo = gamma, hi = gamma_new;
      OpinionState x_lo = br.records.back().state;
      while (hi - lo > opts.min_step) {
        const double mid = 0.5 * (lo + hi);
        auto xm = correct(x_lo, mid);
        if (!xm) {
          hi = mid;
          continue;
        }
        auto rm = spectral_report(g, *xm, {mid, delta}, tol);
        if (rm.classification == Stability::stable) {
          lo = mid;
          x_lo = *xm;
        } else {
          hi = mid;
        }
      }
      br.terminated_reason = Termination::singular_jacobian;
      br.critical_gamma = 0.5 * (lo + hi);
      return br;
    }

    Eigen::PartialPivLU<Eigen::MatrixXd> lu(jacobian(g, next.state, next.params).J_P);
    if (lu.rcond() * opts.newton.condition_limit <= 1.0) {
      br.terminated_reason = Termination::singular_jacobian;
      br.critical_gamma = 0.5 * (gamma + gamma_new);
      return br;
    }

    gamma = gamma_new;
    br.gammas.push_back(gamma);
    br.records.push_back(std::move(next));
    h = std::min(opts.step, 2.0 * h);
  }
  br.terminated_reason = Termination::reached_max;
  return br;
}

std::vector<OpinionState> multistart_samples(const Graph& g, int n_starts, std::uint64_t seed) {
  const auto range = g.zealot_range().value_or(std::make_pair(-1.0, 1.0));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(range.first, range.second);
  std::vector<OpinionState> out;
  out.reserve(static_cast<std::size_t>(n_starts));
  for (int s = 0; s < n_starts; ++s) {
    OpinionState x = g.uniform_state(0.0);
    for (NodeId i : g.persuadable()) x[i] = range.first == range.second ? range.first : dist(rng);
    out.push_back(std::move(x));
  }
  return out;
}

EnumerationResult enumerate_steady_states(const Graph& g, const ModelParams& p, int n_starts,
                                          std::uint64_t seed, const EnumerateOptions& opts) {
  p.validate();
  if (n_starts < 1) throw ValidationError("n_starts must be at least 1");
  auto starts = multistart_samples(g, n_starts, seed);
  std::vector<std::optional<SteadyStateRecord>> solved(starts.size());
  parallel_for(starts.size(), opts.workers, [&](std::size_t k) {
    try {
      solved[k] = find_steady_state(g, p, starts[k], opts.newton);
    } catch (const NumericalError&) {
    }
  });
  EnumerationResult out;
  out.starts = n_starts;
  for (auto& s : solved) {
    if (!s) {
      ++out.failed;
      continue;
    }
    bool dup = std::any_of(out.records.begin(), out.records.end(), [&](const auto& r) {
      return max_abs(r.state - s->state) < opts.merge_radius;
    });
    if (!dup) out.records.push_back(std::move(*s));
  }
  return out;
}

HkProbeReport hk_consistency_probe(const Graph& g, double delta, const std::vector<double>& gammas,
                                   double margin, const OpinionState& initial_guess,
                                   const NewtonOptions& opts) {
  HkProbeReport rep;
  rep.delta = delta;
  rep.margin = margin;
  const auto range = g.zealot_range().value_or(std::make_pair(-1.0, 1.0));
  OpinionState guess = g.pinned(initial_guess);
  for (double gamma : gammas) {
    HkProbeStep st;
    st.gamma = gamma;
    const ModelParams p{gamma, delta};
    std::optional<SteadyStateRecord> rec;
    try {
      rec = find_steady_state(g, p, guess, opts);
      if (rec->classification() != Stability::stable) {
        StepControl ctl;
        ctl.stop_tol = opts.tol;
        auto end = integrate_to_end(g, guess, p, opts.fallback_horizon, ctl).y;
        rec = find_steady_state(g, p, end, opts);
      }
    } catch (const NumericalError& e) {
      st.failure = e.what();
    }
    if (rec) {
      st.state = rec->state;
      st.classification = rec->classification();
      st.found = st.classification == Stability::stable;
      if (!st.found) st.failure = "no stable state near the previous one";
      st.residual = rec->residual;
      st.limit_residual = max_abs(hk_velocity(g, rec->state, delta));
      st.strict_residual = max_abs(hk_strict_velocity(g, rec->state, delta));
      double mg = std::numeric_limits<double>::infinity();
      for (const Edge& e : g.edges()) {
        if (g.is_zealot(e.first) && g.is_zealot(e.second)) continue;
        const double dx = rec->state[e.first] - rec->state[e.second];
        mg = std::min(mg, std::abs(dx * dx - delta));
      }
      st.min_gap_margin = mg;
      st.within_hull = (rec->state.array() >= range.first - 1e-9).all() &&
                       (rec->state.array() <= range.second + 1e-9).all();
      guess = rec->state;
    }
    rep.steps.push_back(std::move(st));
  }
  rep.all_found = std::all_of(rep.steps.begin(), rep.steps.end(),
                              [](const HkProbeStep& s) { return s.found; });
  rep.margins_ok = rep.all_found && std::all_of(rep.steps.begin(), rep.steps.end(),
                                                [&](const HkProbeStep& s) {
                                                  return s.min_gap_margin >= margin;
                                                });
  rep.trend_checked = rep.steps.size() >= 2;
  if (rep.trend_checked && rep.all_found) {
    rep.limit_residual_decreasing = true;
    rep.strict_residual_decreasing = true;
    for (std::size_t k = 1; k < rep.steps.size(); ++k) {
      if (!(rep.steps[k].limit_residual < rep.steps[k - 1].limit_residual))
        rep.limit_residual_decreasing = false;
      if (!(rep.steps[k].strict_residual < rep.steps[k - 1].strict_residual))
        rep.strict_residual_decreasing = false;
    }
  }
  if (!rep.steps.empty()) {
    rep.final_limit_residual = rep.steps.back().limit_residual;
    rep.final_strict_residual = rep.steps.back().strict_residual;
  }
  return rep;
}

void write_steady_csv_header(std::ostream& out, int node_count) {
  out << "gamma,delta,origin,classification,residual";
  for (int i = 0; i < node_count; ++i) out << ",x_" << i;
  out << '\n';
}

void write_steady_csv_row(std::ostream& out, const SteadyStateRecord& r) {
  out << format_double(r.params.gamma) << ',' << format_double(r.params.delta) << ','
      << to_string(r.origin) << ',' << to_string(r.classification()) << ','
      << format_double(r.residual);
  for (Eigen::Index i = 0; i < r.state.size(); ++i) out << ',' << format_double(r.state[i]);
  out << '\n';
}

namespace {

nlohmann::ordered_json record_json(const SteadyStateRecord& r) {
  nlohmann::ordered_json j;
  j["gamma"] = r.params.gamma;
  j["delta"] = r.params.delta;
  j["origin"] = std::string(to_string(r.origin));
  j["classification"] = std::string(to_string(r.classification()));
  j["residual"] = r.residual;
  j["top_eigenvalue"] = r.spectrum.top();
  j["state"] = std::vector<double>(r.state.data(), r.state.data() + r.state.size());
  return j;
}

}  // namespace

std::string branch_json(const ContinuationBranch& b) {
  nlohmann::ordered_json j;
  j["delta"] = b.delta;
  j["terminated_reason"] = std::string(to_string(b.terminated_reason));
  j["critical_gamma"] = b.critical_gamma ? nlohmann::ordered_json(*b.critical_gamma) : nullptr;
  j["gammas"] = b.gammas;
  auto recs = nlohmann::ordered_json::array();
  for (const auto& r : b.records) recs.push_back(record_json(r));
  j["records"] = recs;
  return j.dump(2);
}

std::string hk_probe_json(const HkProbeReport& r) {
  nlohmann::ordered_json j;
  j["delta"] = r.delta;
  j["margin"] = r.margin;
  j["gap_form"] = r.gap_form;
  auto steps = nlohmann::ordered_json::array();
  for (const auto& s : r.steps) {
    nlohmann::ordered_json e;
    e["gamma"] = s.gamma;
    e["found"] = s.found;
    if (!s.failure.empty()) e["failure"] = s.failure;
    e["classification"] = std::string(to_string(s.classification));
    e["residual"] = s.residual;
    e["limit_residual"] = s.limit_residual;
    e["strict_residual"] = s.strict_residual;
    e["min_gap_margin"] = s.min_gap_margin;
    e["within_hull"] = s.within_hull;
    steps.push_back(e);
  }
  j["steps"] = steps;
  j["trend_checked"] = r.trend_checked;
  j["limit_residual_decreasing"] = r.limit_residual_decreasing;
  j["strict_residual_decreasing"] = r.strict_residual_decreasing;
  j["margins_ok"] = r.margins_ok;
  j["final_limit_residual"] = r.final_limit_residual;
  j["final_strict_residual"] = r.final_strict_residual;
  return j.dump(2);
}

}  // namespace sbcm
