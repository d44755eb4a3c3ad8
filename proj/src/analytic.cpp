#include "sbcm/analytic.hpp"

#include "sbcm/dynamics.hpp"

#include "json.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>

namespace sbcm {

double g_function(double gamma, double delta) {
  const double v = omega(1.0, ModelParams{gamma, delta});
  return 2.0 * gamma * (1.0 - v) - 1.0;
}

double h_function(double gamma, double delta) {
  return 1.0 + std::exp(-gamma * (1.0 - delta)) - 2.0 * gamma;
}

double bisect(const std::function<double(double)>& f, double lo, double hi, double tol) {
  double flo = f(lo), fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0)) throw NumericalError("bisection interval does not bracket a root");
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double solve_y() {
  auto f = [](double y) { return std::exp(y - 2.0) - 0.25 * y * y; };
  return bisect(f, -1.0, 0.0, 1e-15);
}

Stability path_harmonic_stability(double gamma, double delta, double marginal_tol) {
  return classify_sign(g_function(gamma, delta), marginal_tol);
}

double path_top_eigenvalue(int n, double gamma, double delta) {
  if (n < 1) throw ValidationError("path length must be at least 1");
  const double v = omega(1.0, ModelParams{gamma, delta});
  const double s = v * g_function(gamma, delta);
  const double c = std::cos(std::numbers::pi / (n + 1));
  // Eigenvalues of tridiag(-1, 2, -1) lie in (2 - 2c, 2 + 2c).
  return s <= 0.0 ? 2.0 * s * (1.0 - c) : 2.0 * s * (1.0 + c);
}

std::string_view to_string(CrossingCase c) {
  switch (c) {
    case CrossingCase::single_crossing: return "single_crossing";
    case CrossingCase::double_crossing: return "double_crossing";
    case CrossingCase::always_stable: return "always_stable";
  }
  return "unknown";
}

int CriticalGammas::root_count() const {
  switch (kind) {
    case CrossingCase::single_crossing: return 1;
    case CrossingCase::double_crossing: return 2;
    case CrossingCase::always_stable: return 0;
  }
  return 0;
}

CriticalGammas critical_gammas(double delta) {
  if (!std::isfinite(delta) || delta < 0.0) throw ValidationError("delta must be nonnegative");
  CriticalGammas out;
  auto h = [delta](double gamma) { return h_function(gamma, delta); };
  if (delta == 1.0) {
    out.kind = CrossingCase::single_crossing;
    out.gamma_c = 1.0;
    return out;
  }
  if (delta < 1.0) {
    // h decreases from h(0) = 2 and h(2) < -2.
    out.kind = CrossingCase::single_crossing;
    out.gamma_c = bisect(h, 0.0, 2.0);
    return out;
  }
  const double e = delta - 1.0;
  const double gbar = std::log(2.0 / e) / e;
  if (!(gbar > 0.0) || h(gbar) >= 0.0) {
    out.kind = CrossingCase::always_stable;
    return out;
  }
  double hi = 2.0 * gbar;
  while (h(hi) <= 0.0) hi *= 2.0;
  out.kind = CrossingCase::double_crossing;
  out.gamma_1 = bisect(h, 0.0, gbar);
  out.gamma_2 = bisect(h, gbar, hi);
  return out;
}

Stability be_harmonic_stability(double gamma, double delta, double marginal_tol) {
  return classify_sign(g_function(gamma, delta), marginal_tol);
}

LaplacianSpectrum persuadable_laplacian_spectrum(const Graph& g) {
  const auto& pers = g.persuadable();
  const int m = static_cast<int>(pers.size());
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(m, m);
  for (int a = 0; a < m; ++a) {
    for (NodeId j : g.neighbors(pers[a])) {
      const int b = g.persuadable_index(j);
      if (b < 0) continue;
      L(a, b) = -1.0;
      L(a, a) += 1.0;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L);
  if (es.info() != Eigen::Success) throw NumericalError("Laplacian eigensolver failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

UnstableSubspace be_unstable_subspace(const Graph& g, double gamma, double delta) {
  const auto& z = g.zealots();
  if (z.size() != 2) throw ValidationError("balanced-exposure analysis needs exactly two zealots");
  auto range = g.zealot_range();
  if (range->first != -1.0 || range->second != 1.0)
    throw ValidationError("balanced-exposure analysis needs zealot opinions -1 and +1");
  int degree = -1;
  for (NodeId i : g.persuadable()) {
    if (g.zealot_degree(i) != 2)
      throw ValidationError("node " + std::to_string(i) + " is not adjacent to both zealots");
    const int d = g.degree(i) - 2;
    if (degree >= 0 && d != degree)
      throw ValidationError("persuadable subgraph is not regular (node " + std::to_string(i) +
                            ")");
    degree = d;
  }
  const ModelParams p{gamma, delta};
  const double u = omega(0.0, p), v = omega(1.0, p);
  UnstableSubspace out;
  out.threshold = 2.0 * v * g_function(gamma, delta) / u;
  auto spec = persuadable_laplacian_spectrum(g);
  std::vector<Eigen::Index> keep;
  for (Eigen::Index k = 0; k < spec.eigenvalues.size(); ++k)
    if (spec.eigenvalues[k] <= out.threshold) keep.push_back(k);
  out.eigenvectors.resize(spec.eigenvectors.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c) {
    out.eigenvalues.push_back(spec.eigenvalues[keep[c]]);
    out.eigenvectors.col(static_cast<Eigen::Index>(c)) = spec.eigenvectors.col(keep[c]);
  }
  return out;
}

std::string analytic_json(double gamma, double delta) {
  ModelParams{gamma, delta}.validate();
  const double y = solve_y();
  const auto cg = critical_gammas(delta);
  const ModelParams p{gamma, delta};
  const double u = omega(0.0, p), v = omega(1.0, p);

  nlohmann::ordered_json j;
  j["gamma"] = gamma;
  j["delta"] = delta;
  j["g"] = g_function(gamma, delta);
  j["h"] = h_function(gamma, delta);
  j["y"] = y;
  j["one_minus_y"] = 1.0 - y;
  nlohmann::ordered_json c;
  c["case"] = std::string(to_string(cg.kind));
  c["gamma_c"] = cg.gamma_c ? nlohmann::ordered_json(*cg.gamma_c) : nullptr;
  c["gamma_1"] = cg.gamma_1 ? nlohmann::ordered_json(*cg.gamma_1) : nullptr;
  c["gamma_2"] = cg.gamma_2 ? nlohmann::ordered_json(*cg.gamma_2) : nullptr;
  j["critical_gammas"] = c;
  j["path_harmonic_stability"] = std::string(to_string(path_harmonic_stability(gamma, delta)));
  nlohmann::ordered_json be;
  be["u"] = u;
  be["v"] = v;
  be["threshold"] = 2.0 * v * g_function(gamma, delta) / u;
  be["stability"] = std::string(to_string(be_harmonic_stability(gamma, delta)));
  j["balanced_exposure"] = be;
  return j.dump(2);
}

}  // namespace sbcm
