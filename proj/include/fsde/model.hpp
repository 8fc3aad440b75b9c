#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "fsde/frackernel.hpp"

namespace fsde {

/// Coefficient evaluation contract. `fast_time` arrives already rescaled
/// (tau = t/epsilon); autonomous problems receive the slow time unchanged.
/// Drift writes `state_dim` values, diffusion writes `state_dim * noise_dim`
/// values row-major. Must be deterministic, side-effect free, and safe to
/// call concurrently from many worker threads.
using CoefficientFn =
    std::function<void(double fast_time, std::span<const double> state,
                       std::span<double> out)>;

/// One Caputo FSDE: order, scale, horizon, initial state and coefficients.
/// Immutable after construction.
struct FsdeProblem {
    FractionalOrder alpha;
    double epsilon;    // kNoFastTime = autonomous (coefficients see t itself)
    double horizon_T;
    std::vector<double> x0;
    std::size_t state_dim;
    std::size_t noise_dim;
    CoefficientFn drift;
    CoefficientFn diffusion;
    std::string label;

    static constexpr double kNoFastTime =
        std::numeric_limits<double>::infinity();

    bool autonomous() const { return std::isinf(epsilon); }
    double fast_time(double t) const { return autonomous() ? t : t / epsilon; }
};

/// Validating constructor; throws std::domain_error on a bad field.
FsdeProblem make_problem(FractionalOrder alpha, double epsilon, double horizon_T,
                         std::vector<double> x0, std::size_t noise_dim,
                         CoefficientFn drift, CoefficientFn diffusion,
                         std::string label);

// Built-in models.
//   example1:  dC x = (t/eps) x dt + x dB,  x0 = 0.1
FsdeProblem make_example1(FractionalOrder alpha, double epsilon, double T);
//   example2:  dC x = [2 cos^2(t/eps) sin(x) - x/2] dt + (e^{-t/eps}+1) x dB,
//              x0 = 1/2
FsdeProblem make_example2(FractionalOrder alpha, double epsilon, double T);
//   example2-homogenized:  dC y = [sin(y) - y/2] dt + y dB,  x0 = 1/2
FsdeProblem make_example2_homogenized(FractionalOrder alpha, double T);
//   example42: the oscillatory pair without the -x/2 reaction term
FsdeProblem make_example42(FractionalOrder alpha, double epsilon, double T);
FsdeProblem make_example42_homogenized(FractionalOrder alpha, double T);

/// Labels accepted by make_from_registry, in registry order.
std::vector<std::string> registry_labels();

/// Looks a built-in model up by label. Unknown labels raise
/// std::out_of_range with the list of valid labels in the message.
/// Homogenized models ignore `epsilon`.
FsdeProblem make_from_registry(const std::string& label, FractionalOrder alpha,
                               double epsilon, double T);

/// Sampling region for the assumption probes: a state box plus a fast-time
/// interval.
struct ProbeBox {
    std::vector<double> state_lo;
    std::vector<double> state_hi;
    double time_lo = 0.0;
    double time_hi = 1.0;
};

/// Monte Carlo suprema over sampled pairs; lower bounds on the true
/// constants. Sample i is a pure function of (seed, i), so estimates never
/// decrease as n_samples grows (seed-extension monotonicity).
struct LipschitzProbeReport {
    double est_state_lipschitz = 0.0;
    double est_time_lipschitz = 0.0;
    double est_growth_bound = 0.0;
    ProbeBox sample_box;
    std::size_t n_samples = 0;
};

LipschitzProbeReport probe_assumptions(const FsdeProblem& problem,
                                       const ProbeBox& box,
                                       std::size_t n_samples,
                                       std::uint64_t seed);

}  // namespace fsde
