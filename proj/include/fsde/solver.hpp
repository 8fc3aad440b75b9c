#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "fsde/brownian.hpp"
#include "fsde/model.hpp"

namespace fsde {

/// Provenance of the driving noise: enough to regenerate it exactly.
struct LatticeFingerprint {
    std::uint64_t seed = 0;
    std::string generator_id;
    std::size_t coarsen_factor = 1;
};

/// Solved trajectories, paths x (n_steps+1) x state_dim, plus grid metadata.
/// states[p][0] is always the initial value; every entry is finite (the
/// solver aborts the whole ensemble otherwise).
struct PathEnsemble {
    std::string problem_label;
    double alpha = 0.0;
    double epsilon = 0.0;
    double dt = 0.0;
    std::size_t n_paths = 0;
    std::size_t n_steps = 0;
    std::size_t state_dim = 0;
    LatticeFingerprint fingerprint;
    std::vector<double> states;  // path-major, time index 0..n_steps, dim

    double state(std::size_t path, std::size_t step, std::size_t dim) const {
        return states[(path * (n_steps + 1) + step) * state_dim + dim];
    }
    std::span<const double> state_at(std::size_t path, std::size_t step) const {
        return {states.data() + (path * (n_steps + 1) + step) * state_dim,
                state_dim};
    }
    double time(std::size_t step) const {
        return dt * static_cast<double>(step);
    }
};

struct SolveOptions {
    int threads = 0;  // 0 = auto
};

/// Euler-Maruyama over the whole lattice:
///   x_n = x0 + dt^a/Gamma(a+1) * sum_{i<n} [(n-i)^a-(n-i-1)^a] f(t_i/eps, x_i)
///            + dt^(a-1)/Gamma(a) * sum_{i<n} (n-i)^(a-1) g(t_i/eps, x_i) dB_i.
///
/// Theta(N^2) coefficient-weight products per path. f and g are evaluated
/// once per (path, step) and their values stored, so step n is two length-n
/// dot products against the shared weight table. Paths are independent and
/// written disjointly; the result does not depend on the worker count.
PathEnsemble em_solve(const FsdeProblem& problem,
                      const BrownianLattice& lattice,
                      const SolveOptions& options = {});

struct PicardResult {
    std::vector<std::vector<double>> trajectory;  // [0..n_steps][state_dim]
    std::size_t iters_used = 0;
};

/// Picard iteration on one frozen path, using the same discrete quadrature
/// as em_solve (it certifies the fixed-point identity of the discretization,
/// not the continuum limit). Starts from x^0 = x0 and stops when the sup-norm
/// update falls below tol; throws ConvergenceError after max_iters.
PicardResult picard_solve(const FsdeProblem& problem,
                          const BrownianLattice& lattice,
                          std::size_t path_index, std::size_t max_iters,
                          double tol);

/// Per-time-index empirical p-th moment: mean over paths of |x(t_n)|^p.
std::vector<double> empirical_moment(const PathEnsemble& ensemble, double p);

/// CSV export: header `path,t,x_1..x_n`, one row per (path, time index),
/// path-major then time-minor, doubles with 17 significant digits.
void write_ensemble_csv(std::ostream& os, const PathEnsemble& ensemble);

}  // namespace fsde
