#include "fsde/solver.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <mutex>
#include <ostream>
#include <stdexcept>

#include "fsde/csvio.hpp"
#include "fsde/errors.hpp"
#include "fsde/frackernel.hpp"
#include "fsde/parallel.hpp"

namespace fsde {

namespace {

void check_compatible(const FsdeProblem& problem,
                      const BrownianLattice& lattice) {
    if (lattice.noise_dim != problem.noise_dim)
        throw std::domain_error("em_solve: lattice noise_dim " +
                                std::to_string(lattice.noise_dim) +
                                " != problem noise_dim " +
                                std::to_string(problem.noise_dim));
    double h = lattice.horizon();
    double tol = 4.0 * std::numeric_limits<double>::epsilon() *
                 std::max(std::fabs(h), std::fabs(problem.horizon_T));
    if (std::fabs(h - problem.horizon_T) > tol) {
        char buf[128];
        std::snprintf(buf, sizeof(buf),
                      "em_solve: lattice horizon %.17g != problem horizon %.17g",
                      h, problem.horizon_T);
        throw std::domain_error(buf);
    }
}

struct SchemeConstants {
    double drift_scale;  // dt^alpha / Gamma(alpha+1)
    double diff_scale;   // dt^(alpha-1) / Gamma(alpha)
};

SchemeConstants scheme_constants(double alpha, double dt) {
    return {std::pow(dt, alpha) / gamma_fn(alpha + 1.0),
            std::pow(dt, alpha - 1.0) / gamma_fn(alpha)};
}

// One path of the scheme. fhist/gdb_hist are caller-provided scratch of
// N*state_dim doubles; states is the output row for this path,
// (N+1)*state_dim doubles, states[0..dim) already holding x0.
void run_path(const FsdeProblem& problem, const BrownianLattice& lattice,
              std::size_t path, const WeightTable& weights,
              const SchemeConstants& k, std::span<double> fhist,
              std::span<double> gdb_hist, std::span<double> gbuf,
              std::span<double> states) {
    const std::size_t n_dim = problem.state_dim;
    const std::size_t m = problem.noise_dim;
    const std::size_t N = lattice.n_steps;
    const double dt = lattice.dt;

    for (std::size_t n = 1; n <= N; ++n) {
        const std::size_t i = n - 1;
        const double tau = problem.fast_time(dt * static_cast<double>(i));
        std::span<const double> xi = states.subspan(i * n_dim, n_dim);

        problem.drift(tau, xi, fhist.subspan(i * n_dim, n_dim));
        problem.diffusion(tau, xi, gbuf);
        for (std::size_t d = 0; d < n_dim; ++d) {
            double acc = 0.0;
            for (std::size_t c = 0; c < m; ++c)
                acc += gbuf[d * m + c] * lattice.at(path, i, c);
            gdb_hist[i * n_dim + d] = acc;
        }

        // fresh history sums; weight on index i is w[n-i-1]
        for (std::size_t d = 0; d < n_dim; ++d) {
            double drift_acc = 0.0;
            double diff_acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                drift_acc += weights.drift_w[n - j - 1] * fhist[j * n_dim + d];
                diff_acc += weights.diff_w[n - j - 1] * gdb_hist[j * n_dim + d];
            }
            double value = problem.x0[d] + k.drift_scale * drift_acc +
                           k.diff_scale * diff_acc;
            if (!std::isfinite(value)) {
                std::vector<double> last(states.begin() + (n - 1) * n_dim,
                                         states.begin() + n * n_dim);
                char buf[160];
                std::snprintf(buf, sizeof(buf),
                              "em_solve: non-finite state on path %zu at step "
                              "%zu (t=%.17g); ensemble aborted",
                              path, n, dt * static_cast<double>(n));
                throw BlowUpError(buf, path, n, std::move(last));
            }
            states[n * n_dim + d] = value;
        }
    }
}

}  // namespace

PathEnsemble em_solve(const FsdeProblem& problem,
                      const BrownianLattice& lattice,
                      const SolveOptions& options) {
    check_compatible(problem, lattice);

    const std::size_t N = lattice.n_steps;
    const std::size_t P = lattice.n_paths;
    const std::size_t n_dim = problem.state_dim;

    PathEnsemble ensemble;
    ensemble.problem_label = problem.label;
    ensemble.alpha = problem.alpha.value();
    ensemble.epsilon = problem.epsilon;
    ensemble.dt = lattice.dt;
    ensemble.n_paths = P;
    ensemble.n_steps = N;
    ensemble.state_dim = n_dim;
    ensemble.fingerprint = {lattice.seed, lattice.generator_id,
                            lattice.coarsen_factor};
    ensemble.states.resize(P * (N + 1) * n_dim);

    const WeightTable weights = build_weights(problem.alpha, N);
    const SchemeConstants k = scheme_constants(problem.alpha.value(), lattice.dt);

    std::exception_ptr failure;
    std::mutex failure_mutex;
    parallel_for(P, options.threads, [&](std::size_t begin, std::size_t end) {
        std::vector<double> fhist(N * n_dim), gdb_hist(N * n_dim);
        std::vector<double> gbuf(n_dim * problem.noise_dim);
        try {
            for (std::size_t p = begin; p < end; ++p) {
                std::span<double> row{
                    ensemble.states.data() + p * (N + 1) * n_dim,
                    (N + 1) * n_dim};
                for (std::size_t d = 0; d < n_dim; ++d) row[d] = problem.x0[d];
                run_path(problem, lattice, p, weights, k, fhist, gdb_hist,
                         gbuf, row);
            }
        } catch (...) {
            std::lock_guard<std::mutex> lock(failure_mutex);
            if (!failure) failure = std::current_exception();
        }
    });
    if (failure) std::rethrow_exception(failure);
    return ensemble;
}

PicardResult picard_solve(const FsdeProblem& problem,
                          const BrownianLattice& lattice,
                          std::size_t path_index, std::size_t max_iters,
                          double tol) {
    check_compatible(problem, lattice);
    if (path_index >= lattice.n_paths)
        throw std::domain_error("picard_solve: path index out of range");
    if (!(tol > 0.0))
        throw std::domain_error("picard_solve: tol must be positive");
    if (max_iters < 1)
        throw std::domain_error("picard_solve: max_iters must be >= 1");

    const std::size_t N = lattice.n_steps;
    const std::size_t n_dim = problem.state_dim;
    const std::size_t m = problem.noise_dim;
    const double dt = lattice.dt;
    const WeightTable weights = build_weights(problem.alpha, N);
    const SchemeConstants k = scheme_constants(problem.alpha.value(), dt);

    std::vector<std::vector<double>> cur(N + 1, problem.x0), next(N + 1,
                                                                  problem.x0);
    std::vector<double> fhist(N * n_dim), gdb_hist(N * n_dim), gbuf(n_dim * m);

    double residual = std::numeric_limits<double>::infinity();
    for (std::size_t iter = 1; iter <= max_iters; ++iter) {
        // coefficients along the previous iterate, then one quadrature sweep
        for (std::size_t i = 0; i < N; ++i) {
            double tau = problem.fast_time(dt * static_cast<double>(i));
            problem.drift(tau, cur[i], std::span<double>{&fhist[i * n_dim], n_dim});
            problem.diffusion(tau, cur[i], gbuf);
            for (std::size_t d = 0; d < n_dim; ++d) {
                double acc = 0.0;
                for (std::size_t c = 0; c < m; ++c)
                    acc += gbuf[d * m + c] * lattice.at(path_index, i, c);
                gdb_hist[i * n_dim + d] = acc;
            }
        }
        residual = 0.0;
        for (std::size_t n = 1; n <= N; ++n) {
            for (std::size_t d = 0; d < n_dim; ++d) {
                double drift_acc = 0.0, diff_acc = 0.0;
                for (std::size_t j = 0; j < n; ++j) {
                    drift_acc += weights.drift_w[n - j - 1] * fhist[j * n_dim + d];
                    diff_acc += weights.diff_w[n - j - 1] * gdb_hist[j * n_dim + d];
                }
                next[n][d] = problem.x0[d] + k.drift_scale * drift_acc +
                             k.diff_scale * diff_acc;
                residual = std::max(residual, std::fabs(next[n][d] - cur[n][d]));
            }
        }
        cur.swap(next);
        if (residual < tol) return {std::move(cur), iter};
    }
    char buf[128];
    std::snprintf(buf, sizeof(buf),
                  "picard_solve: no convergence in %zu iterations "
                  "(last residual %.3e)",
                  max_iters, residual);
    throw ConvergenceError(buf, residual);
}

std::vector<double> empirical_moment(const PathEnsemble& ensemble, double p) {
    if (!(p >= 2.0))
        throw std::domain_error("empirical_moment: p must be >= 2");
    const std::size_t P = ensemble.n_paths;
    const std::size_t N = ensemble.n_steps;
    std::vector<double> out(N + 1, 0.0);
    std::vector<double> per_path(P);
    for (std::size_t n = 0; n <= N; ++n) {
        for (std::size_t q = 0; q < P; ++q) {
            double s = 0.0;
            for (std::size_t d = 0; d < ensemble.state_dim; ++d) {
                double v = ensemble.state(q, n, d);
                s += v * v;
            }
            per_path[q] = std::pow(std::sqrt(s), p);
        }
        out[n] = pairwise_sum(per_path) / static_cast<double>(P);
    }
    return out;
}

void write_ensemble_csv(std::ostream& os, const PathEnsemble& ensemble) {
    os << "path,t";
    for (std::size_t d = 1; d <= ensemble.state_dim; ++d) os << ",x_" << d;
    os << "\n";
    for (std::size_t p = 0; p < ensemble.n_paths; ++p) {
        for (std::size_t n = 0; n <= ensemble.n_steps; ++n) {
            os << p << ',' << format_double17(ensemble.time(n));
            for (std::size_t d = 0; d < ensemble.state_dim; ++d)
                os << ',' << format_double17(ensemble.state(p, n, d));
            os << "\n";
        }
    }
}

}  // namespace fsde
