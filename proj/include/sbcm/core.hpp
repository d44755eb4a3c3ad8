#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace sbcm {

using NodeId = int;

// Full opinion vector, one entry per node (zealots included).
using OpinionState = Eigen::VectorXd;

/// Steepness and squared confidence bound of the sigmoidal influence.
struct ModelParams {
  double gamma = 0.0;
  double delta = 1.0;

  void validate() const;
};

enum class Stability { stable, unstable, marginal };

std::string_view to_string(Stability s);
Stability stability_from_string(std::string_view s);

// Strict-sign classification with a symmetric band around zero.
inline Stability classify_sign(double value, double marginal_tol) {
  if (value < -marginal_tol) return Stability::stable;
  if (value > marginal_tol) return Stability::unstable;
  return Stability::marginal;
}

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid graph, state or parameter input.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(std::string source, int line, const std::string& what)
      : Error(source + ":" + std::to_string(line) + ": " + what),
        source_(std::move(source)),
        line_(line) {}

  const std::string& source() const { return source_; }
  int line() const { return line_; }

 private:
  std::string source_;
  int line_;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class SingularJacobianError : public NumericalError {
 public:
  SingularJacobianError(const std::string& what, double condition)
      : NumericalError(what), condition_(condition) {}
  double condition() const { return condition_; }

 private:
  double condition_;
};

/// Newton (and its integration fallback) gave up; carries the best iterate.
class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(const std::string& what, OpinionState best, double residual)
      : NumericalError(what), best_(std::move(best)), residual_(residual) {}
  const OpinionState& best() const { return best_; }
  double residual() const { return residual_; }

 private:
  OpinionState best_;
  double residual_;
};

class IntegrationError : public NumericalError {
 public:
  IntegrationError(const std::string& what, OpinionState last, double time)
      : NumericalError(what), last_(std::move(last)), time_(time) {}
  const OpinionState& last_state() const { return last_; }
  double time() const { return time_; }

 private:
  OpinionState last_;
  double time_;
};

}  // namespace sbcm
