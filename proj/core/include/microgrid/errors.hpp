#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace microgrid {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One problem found while validating a scenario; line is 0 when the issue
/// is not tied to a particular line of the source text.
struct Issue {
  int line = 0;
  std::string message;
};

/// Raised by the scenario parser. Carries every issue found, not just the first.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<Issue> issues);

  const std::vector<Issue>& issues() const noexcept { return issues_; }

 private:
  std::vector<Issue> issues_;
};

/// Singular admittance matrix or a bus with no voltage-establishing source.
class NetworkError : public Error {
 public:
  using Error::Error;
};

/// Adaptive step size collapsed below the underflow limit.
class IntegrationError : public Error {
 public:
  IntegrationError(const std::string& what, double time);

  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// Damped Newton iteration did not reach the residual tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, int iterations, std::vector<double> residuals);

  int iterations() const noexcept { return iterations_; }
  const std::vector<double>& residuals() const noexcept { return residuals_; }

 private:
  int iterations_;
  std::vector<double> residuals_;
};

/// Wraps a failure raised while a scenario run was in progress.
class SimulationError : public Error {
 public:
  SimulationError(const std::string& what, double time);

  double time() const noexcept { return time_; }

 private:
  double time_;
};

}  // namespace microgrid
