#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fsde {

/// A path/step budget (paths * steps * components * 8 bytes) was exceeded.
class CapacityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The solver produced a non-finite state. The whole ensemble is aborted;
/// dropping individual paths would bias Monte Carlo estimators.
class BlowUpError : public std::runtime_error {
public:
    BlowUpError(const std::string& msg, std::size_t path, std::size_t step,
                std::vector<double> last_state)
        : std::runtime_error(msg),
          path_index(path),
          step_index(step),
          last_finite_state(std::move(last_state)) {}

    std::size_t path_index;
    std::size_t step_index;
    std::vector<double> last_finite_state;
};

/// Fixed-point iteration did not reach the requested tolerance.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& msg, double residual)
        : std::runtime_error(msg), last_residual(residual) {}

    double last_residual;
};

/// The Cesaro certificate |avg(T1) - avg(2*T1)| < tol never held before the
/// doubling cap: the coefficient has no detectable time-average.
class AveragingDivergenceError : public std::runtime_error {
public:
    AveragingDivergenceError(const std::string& msg, double last_horizon,
                             double last_deviation)
        : std::runtime_error(msg),
          horizon(last_horizon),
          deviation(last_deviation) {}

    double horizon;
    double deviation;
};

/// A coefficient returned a non-finite value; the message names the point.
class EvaluationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace fsde
