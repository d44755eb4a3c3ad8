#include "sbcm/spectral.hpp"

#include "sbcm/dynamics.hpp"

#include "json.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace sbcm {

JacobianDecomposition jacobian(const Graph& g, const OpinionState& x, const ModelParams& p,
                               bool exact) {
  p.validate();
  if (x.size() != g.node_count()) throw ValidationError("state size does not match graph");
  const auto& pers = g.persuadable();
  const int m = static_cast<int>(pers.size());
  const double gamma = p.gamma;

  JacobianDecomposition d;
  d.gamma = gamma;
  d.S_P = Eigen::VectorXd::Zero(m);
  d.Z_P = Eigen::VectorXd::Zero(m);
  d.L1 = Eigen::MatrixXd::Zero(m, m);
  d.L2 = Eigen::MatrixXd::Zero(m, m);
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(m, m);

  for (int a = 0; a < m; ++a) {
    const NodeId i = pers[a];
    for (NodeId j : g.neighbors(i)) {
      const double dx = x[j] - x[i];
      const double w = influence(x[i], x[j], p);
      const double curv = w * (1.0 - w) * dx * dx;
      const double r = w - 2.0 * gamma * curv;
      d.S_P[a] += w;
      const int b = g.persuadable_index(j);
      if (b < 0) {
        d.Z_P[a] += r;
      } else {
        R(a, b) = r;
        d.L1(a, b) = -w;
        d.L1(a, a) += w;
        d.L2(a, b) = -curv;
        d.L2(a, a) += curv;
      }
    }
    if (!(d.S_P[a] > 0.0))
      throw NumericalError("persuadable node " + std::to_string(i) +
                           " has zero total influence; S_P is not invertible");
  }

  d.L_P = -R;
  for (int a = 0; a < m; ++a) d.L_P(a, a) = R.row(a).sum();
  d.M_P = -d.L_P;
  d.M_P.diagonal() -= d.Z_P;
  d.J_P = d.S_P.cwiseInverse().asDiagonal() * d.M_P;

  if (exact) {
    OpinionState f = velocity(g, x, p);
    if (max_abs(f) > 1e-8) {
      d.corrected = true;
      for (int a = 0; a < m; ++a) {
        const NodeId i = pers[a];
        const double scale = f[i] / d.S_P[a];
        double diag = 0.0;
        for (NodeId j : g.neighbors(i)) {
          const double dx = x[j] - x[i];
          const double w = influence(x[i], x[j], p);
          const double c = scale * 2.0 * gamma * w * (1.0 - w) * dx;
          diag -= c;
          const int b = g.persuadable_index(j);
          if (b >= 0) d.J_P(a, b) += c;
        }
        d.J_P(a, a) += diag;
      }
    }
  }
  return d;
}

Eigen::MatrixXd finite_difference_jacobian(const Graph& g, const OpinionState& x,
                                           const ModelParams& p, double step) {
  const auto& pers = g.persuadable();
  const int m = static_cast<int>(pers.size());
  Eigen::MatrixXd J(m, m);
  OpinionState xp = x, xm = x;
  for (int b = 0; b < m; ++b) {
    const NodeId j = pers[b];
    xp[j] = x[j] + step;
    xm[j] = x[j] - step;
    OpinionState fp = velocity(g, xp, p), fm = velocity(g, xm, p);
    for (int a = 0; a < m; ++a) J(a, b) = (fp[pers[a]] - fm[pers[a]]) / (2.0 * step);
    xp[j] = x[j];
    xm[j] = x[j];
  }
  return J;
}

SpectralReport eigen_report(const JacobianDecomposition& d, double marginal_tol) {
  SpectralReport rep;
  rep.marginal_tol = marginal_tol;
  const auto m = d.J_P.rows();
  if (m == 0) {
    rep.classification = Stability::stable;
    return rep;
  }

  Eigen::EigenSolver<Eigen::MatrixXd> direct(d.J_P, false);
  if (direct.info() != Eigen::Success) throw NumericalError("nonsymmetric eigensolver failed");
  const auto& ev = direct.eigenvalues();
  rep.max_imag_residual = ev.imag().cwiseAbs().maxCoeff();

  if (d.corrected) {
    const Eigen::VectorXd re = ev.real();
    rep.eigenvalues.assign(re.data(), re.data() + m);
  } else {
    Eigen::VectorXd scale = d.S_P.cwiseSqrt().cwiseInverse();
    Eigen::MatrixXd sym = scale.asDiagonal() * d.M_P * scale.asDiagonal();
    sym = 0.5 * (sym + sym.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericalError("symmetric eigensolver failed");
    rep.eigenvalues.assign(es.eigenvalues().data(), es.eigenvalues().data() + m);
  }
  std::sort(rep.eigenvalues.begin(), rep.eigenvalues.end(), std::greater<>());
  rep.classification = classify_sign(rep.eigenvalues.front(), marginal_tol);
  return rep;
}

SpectralReport spectral_report(const Graph& g, const OpinionState& x, const ModelParams& p,
                               double marginal_tol) {
  return eigen_report(jacobian(g, x, p), marginal_tol);
}

std::optional<NodeId> instability_certificate(const Graph& g, const OpinionState& x,
                                              const ModelParams& p) {
  if (!(p.gamma > 0.0)) return std::nullopt;
  const double threshold = 1.0 / (2.0 * p.gamma);
  for (NodeId i : g.persuadable()) {
    auto nb = g.neighbors(i);
    if (nb.empty()) continue;
    bool all = std::all_of(nb.begin(), nb.end(), [&](NodeId j) {
      const double dx = x[j] - x[i];
      return (1.0 - influence(x[i], x[j], p)) * dx * dx > threshold;
    });
    if (all) return i;
  }
  return std::nullopt;
}

bool IsolationReport::all_pass() const {
  return std::all_of(passes.begin(), passes.end(), [](bool b) { return b; });
}

std::vector<NodeId> IsolationReport::failing() const {
  std::vector<NodeId> out;
  for (std::size_t k = 0; k < nodes.size(); ++k)
    if (!passes[k]) out.push_back(nodes[k]);
  return out;
}

IsolationReport isolation_check(const Graph& g, const OpinionState& x, const ModelParams& p) {
  IsolationReport rep;
  const double inv_gamma =
      p.gamma > 0.0 ? 1.0 / p.gamma : std::numeric_limits<double>::infinity();
  rep.bound = std::sqrt(std::max(p.delta, inv_gamma));
  for (NodeId i : g.persuadable()) {
    auto nb = g.neighbors(i);
    bool ok = std::any_of(nb.begin(), nb.end(),
                          [&](NodeId j) { return std::abs(x[i] - x[j]) <= rep.bound; });
    rep.nodes.push_back(i);
    rep.passes.push_back(ok);
  }
  return rep;
}

std::string spectral_report_json(const SpectralReport& r) {
  nlohmann::ordered_json j;
  j["eigenvalues"] = r.eigenvalues;
  j["classification"] = std::string(to_string(r.classification));
  j["max_imag_residual"] = r.max_imag_residual;
  j["marginal_tol"] = r.marginal_tol;
  return j.dump();
}

}  // namespace sbcm
