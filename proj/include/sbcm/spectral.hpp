#pragma once

#include "sbcm/core.hpp"
#include "sbcm/graph.hpp"

#include <Eigen/Dense>

#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace sbcm {

/// Persuadable block of the Jacobian of the velocity field and the pieces it
/// is assembled from. Rows and columns follow Graph::persuadable() order.
///
/// With R the matrix of s_i * df_i/dx_j over persuadable pairs, L_P is its
/// combinatorial Laplacian, Z_P holds the zealot couplings and
/// J_P = -S_P^{-1} (Z_P + L_P) = S_P^{-1} M_P at a steady state.
struct JacobianDecomposition {
  Eigen::MatrixXd J_P;
  Eigen::VectorXd S_P;  // diagonal of S_P
  Eigen::VectorXd Z_P;  // diagonal of Z_P
  Eigen::MatrixXd L_P;
  Eigen::MatrixXd M_P;
  Eigen::MatrixXd L1;  // Laplacian of the weights
  Eigen::MatrixXd L2;  // Laplacian of w(1-w)dx^2
  double gamma = 0.0;
  // True when J_P carries the extra terms for a non-steady state; then J_P
  // is no longer similar to a symmetric matrix.
  bool corrected = false;
};

/// `exact` adds back the terms proportional to the velocity, which vanish
/// at steady states; they are only added when the max-norm velocity
/// exceeds 1e-8. Throws NumericalError when a persuadable node has zero
/// total weight.
JacobianDecomposition jacobian(const Graph& g, const OpinionState& x, const ModelParams& p,
                               bool exact = false);

/// Central-difference Jacobian of the persuadable velocity block.
Eigen::MatrixXd finite_difference_jacobian(const Graph& g, const OpinionState& x,
                                           const ModelParams& p, double step = 1e-6);

struct SpectralReport {
  std::vector<double> eigenvalues;  // descending
  double max_imag_residual = 0.0;
  Stability classification = Stability::stable;
  double marginal_tol = 1e-8;

  double top() const { return eigenvalues.empty() ? -std::numeric_limits<double>::infinity()
                                                  : eigenvalues.front(); }
};

constexpr double kDefaultMarginalTol = 1e-8;

/// Eigenvalues from S^{-1/2} M S^{-1/2}; the imaginary residual comes from a
/// direct nonsymmetric solve on J_P. Corrected decompositions fall back to
/// the real parts of the nonsymmetric spectrum.
SpectralReport eigen_report(const JacobianDecomposition& d,
                            double marginal_tol = kDefaultMarginalTol);

SpectralReport spectral_report(const Graph& g, const OpinionState& x, const ModelParams& p,
                               double marginal_tol = kDefaultMarginalTol);

/// Lowest persuadable node i with (1 - w_ij)(x_j - x_i)^2 > 1/(2 gamma) for
/// every neighbor j; such a node forces a positive eigenvalue.
std::optional<NodeId> instability_certificate(const Graph& g, const OpinionState& x,
                                              const ModelParams& p);

struct IsolationReport {
  double bound = 0.0;  // sqrt(max(delta, 1/gamma))
  std::vector<NodeId> nodes;
  std::vector<bool> passes;

  bool all_pass() const;
  std::vector<NodeId> failing() const;
};

/// Whether each persuadable node has a neighbor within sqrt(max(delta, 1/gamma)).
/// Nodes without neighbors fail.
IsolationReport isolation_check(const Graph& g, const OpinionState& x, const ModelParams& p);

std::string spectral_report_json(const SpectralReport& r);

}  // namespace sbcm
