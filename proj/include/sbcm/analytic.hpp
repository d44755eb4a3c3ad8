#pragma once

#include "sbcm/core.hpp"
#include "sbcm/graph.hpp"

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace sbcm {

/// 2 gamma (1 - v) - 1 with v = omega(1). Negative exactly when the
/// harmonic state of a path or balanced-exposure graph is stable.
double g_function(double gamma, double delta);
/// 1 + exp(-gamma (1 - delta)) - 2 gamma; positive exactly when g is negative.
double h_function(double gamma, double delta);

/// Negative root of exp(y - 2) = y^2 / 4 (about -0.5569). Paths and BE
/// graphs have a stable harmonic state for every gamma once delta > 1 - y.
double solve_y();

/// Stability of the harmonic state on a path with end zealots at -(n+1)/2
/// and (n+1)/2; independent of n.
Stability path_harmonic_stability(double gamma, double delta, double marginal_tol = 1e-8);

/// Largest eigenvalue of M_P at the harmonic state of path_graph(n). M_P is
/// s * tridiag(-1, 2, -1) with s = v * g(gamma).
double path_top_eigenvalue(int n, double gamma, double delta);

enum class CrossingCase { single_crossing, double_crossing, always_stable };

std::string_view to_string(CrossingCase c);

struct CriticalGammas {
  CrossingCase kind = CrossingCase::always_stable;
  std::optional<double> gamma_c;
  std::optional<double> gamma_1;
  std::optional<double> gamma_2;

  int root_count() const;
};

/// Values of gamma where the path harmonic state changes stability.
CriticalGammas critical_gammas(double delta);

/// Stability of x = 0 on a balanced-exposure graph with zealots -1 and +1.
Stability be_harmonic_stability(double gamma, double delta, double marginal_tol = 1e-8);

struct UnstableSubspace {
  std::vector<double> eigenvalues;  // qualifying Laplacian eigenvalues, ascending
  Eigen::MatrixXd eigenvectors;     // one column per qualifying eigenvalue
  double threshold = 0.0;

  int dimension() const { return static_cast<int>(eigenvalues.size()); }
};

/// Laplacian eigenpairs of the persuadable subgraph with eigenvalue at most
/// 2 v g(gamma) / u, where u = omega(0) and v = omega(1). Requires a
/// regular persuadable subgraph whose nodes all touch both zealots -1, +1.
UnstableSubspace be_unstable_subspace(const Graph& g, double gamma, double delta);

/// Eigenvalues (ascending) and eigenvectors of the persuadable-subgraph Laplacian.
struct LaplacianSpectrum {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;
};
LaplacianSpectrum persuadable_laplacian_spectrum(const Graph& g);

/// Bisection on [lo, hi] where f(lo) and f(hi) have opposite signs.
double bisect(const std::function<double(double)>& f, double lo, double hi, double tol = 1e-12);

std::string analytic_json(double gamma, double delta);

}  // namespace sbcm
