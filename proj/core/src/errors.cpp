#include "microgrid/errors.hpp"

#include <sstream>
#include <utility>

namespace microgrid {

namespace {

std::string summarize(const std::vector<Issue>& issues) {
  std::ostringstream out;
  out << issues.size() << " validation error" << (issues.size() == 1 ? "" : "s");
  for (const auto& issue : issues) {
    out << "\n  ";
    if (issue.line > 0) out << "line " << issue.line << ": ";
    out << issue.message;
  }
  return out.str();
}

std::string with_time(const std::string& what, double time) {
  std::ostringstream out;
  out << what << " (t = " << time << " s)";
  return out.str();
}

}  // namespace

ValidationError::ValidationError(std::vector<Issue> issues)
    : Error(summarize(issues)), issues_(std::move(issues)) {}

IntegrationError::IntegrationError(const std::string& what, double time)
    : Error(with_time(what, time)), time_(time) {}

ConvergenceError::ConvergenceError(const std::string& what, int iterations,
                                   std::vector<double> residuals)
    : Error(what), iterations_(iterations), residuals_(std::move(residuals)) {}

SimulationError::SimulationError(const std::string& what, double time)
    : Error(with_time(what, time)), time_(time) {}

}  // namespace microgrid
