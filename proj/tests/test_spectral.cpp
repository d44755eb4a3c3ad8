#include "doctest.h"

#include "sbcm/dynamics.hpp"
#include "sbcm/spectral.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>

using namespace sbcm;

namespace {

Graph ring_with_zealots(int n) {
  std::vector<std::pair<NodeId, NodeId>> e;
  for (int i = 0; i < n; ++i) e.push_back({i, (i + 1) % n});
  e.push_back({0, n / 2});
  return build_graph(n, e, {{0, -1.0}, {n / 2, 1.0}});
}

}  // namespace

TEST_CASE("decomposition identities") {
  Graph g = ring_with_zealots(9);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  OpinionState x(g.node_count());
  for (int i = 0; i < x.size(); ++i) x[i] = u(rng);
  x = g.pinned(x);
  ModelParams p{4.0, 0.3};
  auto d = jacobian(g, x, p);
  Eigen::MatrixXd expect_M = -d.L_P;
  expect_M.diagonal() -= d.Z_P;
  CHECK((d.M_P - expect_M).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((d.L_P - (d.L1 - 2.0 * p.gamma * d.L2)).cwiseAbs().maxCoeff() < 1e-13);
  CHECK((d.L_P.rowwise().sum()).cwiseAbs().maxCoeff() < 1e-13);
  CHECK((d.M_P - d.M_P.transpose()).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((d.J_P - d.S_P.cwiseInverse().asDiagonal() * d.M_P).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("exact Jacobian matches central differences off equilibrium") {
  Graph g = ring_with_zealots(11);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    OpinionState x(g.node_count());
    for (int i = 0; i < x.size(); ++i) x[i] = u(rng);
    x = g.pinned(x);
    ModelParams p{0.5 + 2.0 * trial, 0.05 + 0.1 * trial};
    auto d = jacobian(g, x, p, true);
    CHECK(d.corrected);
    auto fd = finite_difference_jacobian(g, x, p);
    CHECK((d.J_P - fd).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("symmetric and direct spectra agree at a steady state") {
  Graph g = path_graph(6);
  OpinionState x(8);
  for (int i = 0; i < 8; ++i) x[i] = -3.5 + i;
  ModelParams p{0.7, 0.9};
  CHECK(max_abs(velocity(g, x, p)) < 1e-14);
  auto d = jacobian(g, x, p, true);
  CHECK_FALSE(d.corrected);
  auto rep = eigen_report(d);
  Eigen::EigenSolver<Eigen::MatrixXd> es(d.J_P);
  std::vector<double> direct;
  for (int k = 0; k < es.eigenvalues().size(); ++k) direct.push_back(es.eigenvalues()[k].real());
  std::sort(direct.rbegin(), direct.rend());
  REQUIRE(direct.size() == rep.eigenvalues.size());
  for (std::size_t k = 0; k < direct.size(); ++k)
    CHECK(rep.eigenvalues[k] == doctest::Approx(direct[k]).epsilon(1e-10));
  CHECK(rep.max_imag_residual < 1e-10);
  CHECK(std::is_sorted(rep.eigenvalues.rbegin(), rep.eigenvalues.rend()));
}

TEST_CASE("classification uses the marginal band") {
  SpectralReport r;
  auto d = jacobian(path_graph(1), [] {
    OpinionState x(3);
    x << -1.0, 0.0, 1.0;
    return x;
  }(), ModelParams{0.0, 1.0});
  r = eigen_report(d);
  // gamma = 0: both weights 1/2, so S = 1 and M = -1
  CHECK(r.top() == doctest::Approx(-1.0));
  CHECK(r.classification == Stability::stable);
  CHECK(classify_sign(5e-9, 1e-8) == Stability::marginal);
  CHECK(classify_sign(-2e-8, 1e-8) == Stability::stable);
}

TEST_CASE("zero total weight is reported") {
  Graph g = build_graph(3, {{0, 1}, {1, 2}}, {{0, -10.0}, {2, 10.0}});
  OpinionState x(3);
  x << -10.0, 0.0, 10.0;
  CHECK_THROWS_AS(jacobian(g, x, ModelParams{1e4, 0.1}), NumericalError);
}

TEST_CASE("instability certificate implies a positive eigenvalue") {
  Graph g = path_graph(1);  // zealots at -1 and +1
  OpinionState x(3);
  x << -1.0, 0.0, 1.0;
  ModelParams p{10.0, 0.1};
  auto node = instability_certificate(g, x, p);
  REQUIRE(node);
  CHECK(*node == 1);
  CHECK(spectral_report(g, x, p).top() > 0.0);
  // shallow sigmoid: no certificate
  CHECK_FALSE(instability_certificate(g, x, ModelParams{0.1, 0.1}));
  CHECK_FALSE(instability_certificate(g, x, ModelParams{0.0, 0.1}));
}

TEST_CASE("isolation bound") {
  Graph g = path_graph(2);  // zealots -1.5, +1.5
  OpinionState x(4);
  x << -1.5, -1.4, 1.1, 1.5;
  auto rep = isolation_check(g, x, ModelParams{4.0, 0.01});
  CHECK(rep.bound == doctest::Approx(0.5));
  CHECK(rep.all_pass());
  x[2] = 0.0;
  rep = isolation_check(g, x, ModelParams{4.0, 0.01});
  CHECK_FALSE(rep.all_pass());
  CHECK(rep.failing() == std::vector<NodeId>{2});
}
