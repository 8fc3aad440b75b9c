#include "fsde/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "fsde/brownian.hpp"
#include "fsde/csvio.hpp"
#include "fsde/parallel.hpp"
#include "fsde/rng.hpp"

namespace fsde {

namespace {

bool close_rel(double a, double b, double ulps = 4.0) {
    double tol = ulps * std::numeric_limits<double>::epsilon() *
                 std::max(std::fabs(a), std::fabs(b));
    return std::fabs(a - b) <= tol;
}

std::size_t checked_ratio(double big, double small, const char* what) {
    double q = big / small;
    auto k = static_cast<std::size_t>(std::llround(q));
    if (k < 1 || !close_rel(static_cast<double>(k) * small, big)) {
        char buf[128];
        std::snprintf(buf, sizeof(buf), "%s: %.17g is not a multiple of %.17g",
                      what, big, small);
        throw std::domain_error(buf);
    }
    return k;
}

}  // namespace

double mean_square_error(const PathEnsemble& a, const PathEnsemble& b) {
    if (a.n_paths != b.n_paths)
        throw std::domain_error("mean_square_error: path counts differ");
    if (a.state_dim != b.state_dim)
        throw std::domain_error("mean_square_error: state dims differ");
    if (a.fingerprint.seed != b.fingerprint.seed ||
        a.fingerprint.generator_id != b.fingerprint.generator_id)
        throw std::domain_error(
            "mean_square_error: ensembles do not share a lattice (common "
            "random numbers required)");
    if (!close_rel(a.dt * static_cast<double>(a.n_steps),
                   b.dt * static_cast<double>(b.n_steps)))
        throw std::domain_error("mean_square_error: horizons differ");

    const PathEnsemble& fine = a.n_steps >= b.n_steps ? a : b;
    const PathEnsemble& coarse = a.n_steps >= b.n_steps ? b : a;
    if (fine.n_steps % coarse.n_steps != 0)
        throw std::domain_error("mean_square_error: grids are not nested");
    const std::size_t stride = fine.n_steps / coarse.n_steps;

    const std::size_t P = a.n_paths;
    const std::size_t dim = a.state_dim;
    std::vector<double> per_path(P);
    double worst = 0.0;
    for (std::size_t m = 1; m <= coarse.n_steps; ++m) {
        for (std::size_t p = 0; p < P; ++p) {
            double s = 0.0;
            for (std::size_t d = 0; d < dim; ++d) {
                double diff =
                    coarse.state(p, m, d) - fine.state(p, m * stride, d);
                s += diff * diff;
            }
            per_path[p] = s;
        }
        worst = std::max(worst, pairwise_sum(per_path) / static_cast<double>(P));
    }
    return std::sqrt(worst);
}

namespace {

StudyMeta base_meta(const std::string& kind, const FsdeProblem& problem,
                    std::size_t n_paths, std::uint64_t seed) {
    StudyMeta meta;
    meta.study_kind = kind;
    meta.model_label = problem.label;
    meta.alpha = problem.alpha.value();
    meta.horizon_T = problem.horizon_T;
    meta.n_paths = n_paths;
    meta.seed = seed;
    meta.generator_id = kGeneratorId;
    return meta;
}

}  // namespace

ConvergenceTable dt_study(const FsdeProblem& problem,
                          const std::vector<double>& dt_list,
                          std::size_t n_paths, std::uint64_t seed,
                          const SolveOptions& options) {
    if (dt_list.size() < 2)
        throw std::domain_error("dt_study: need at least two dt values");
    for (std::size_t i = 0; i + 1 < dt_list.size(); ++i)
        if (!close_rel(dt_list[i], 2.0 * dt_list[i + 1]))
            throw std::domain_error(
                "dt_study: dt_list must halve between consecutive entries");

    const double T = problem.horizon_T;
    std::vector<std::size_t> steps;
    for (double dt : dt_list)
        steps.push_back(checked_ratio(T, dt, "dt_study: horizon/dt"));
    steps.push_back(steps.back() * 2);  // half-step partner of the last level

    const std::size_t finest = steps.back();
    BrownianLattice fine = generate(seed, n_paths, finest,
                                    T / static_cast<double>(finest),
                                    problem.noise_dim,
                                    GenerateOptions{.threads = options.threads});

    std::vector<PathEnsemble> solutions;
    solutions.reserve(steps.size());
    for (std::size_t n : steps)
        solutions.push_back(em_solve(problem, coarsen(fine, finest / n), options));

    ConvergenceTable table;
    table.meta = base_meta("dt", problem, n_paths, seed);
    table.meta.fixed_epsilon = problem.epsilon;
    for (std::size_t k = 0; k < dt_list.size(); ++k) {
        ConvergenceRow row;
        row.param = dt_list[k];
        row.error = mean_square_error(solutions[k], solutions[k + 1]);
        if (k > 0 && row.error > 0.0 && table.rows[k - 1].error > 0.0) {
            row.order = std::log2(table.rows[k - 1].error / row.error);
            row.prev_param = dt_list[k - 1];
        }
        table.rows.push_back(row);
    }
    return table;
}

ConvergenceTable eps_study(const std::function<FsdeProblem(double)>& factory,
                           const std::vector<double>& eps_list, double dt,
                           std::size_t n_paths, std::uint64_t seed,
                           const SolveOptions& options) {
    if (eps_list.empty()) throw std::domain_error("eps_study: empty eps list");
    for (std::size_t i = 0; i + 1 < eps_list.size(); ++i)
        if (!close_rel(2.0 * eps_list[i], eps_list[i + 1]))
            throw std::domain_error(
                "eps_study: eps_list must double between consecutive entries");

    FsdeProblem first = factory(eps_list.front());
    const double T = first.horizon_T;
    const std::size_t n_steps = checked_ratio(T, dt, "eps_study: horizon/dt");
    BrownianLattice lattice = generate(seed, n_paths, n_steps,
                                       T / static_cast<double>(n_steps),
                                       first.noise_dim,
                                       GenerateOptions{.threads = options.threads});

    std::vector<PathEnsemble> solutions;
    solutions.push_back(em_solve(first, lattice, options));
    for (std::size_t i = 1; i < eps_list.size(); ++i)
        solutions.push_back(em_solve(factory(eps_list[i]), lattice, options));
    solutions.push_back(
        em_solve(factory(2.0 * eps_list.back()), lattice, options));

    ConvergenceTable table;
    table.meta = base_meta("eps", first, n_paths, seed);
    table.meta.fixed_dt = dt;
    for (std::size_t k = 0; k < eps_list.size(); ++k) {
        ConvergenceRow row;
        row.param = eps_list[k];
        row.error = mean_square_error(solutions[k], solutions[k + 1]);
        if (k > 0 && row.error > 0.0 && table.rows[k - 1].error > 0.0) {
            row.order = std::log2(row.error / table.rows[k - 1].error);
            row.prev_param = eps_list[k - 1];
        }
        table.rows.push_back(row);
    }
    return table;
}

ComparisonCurves homogenization_comparison(const FsdeProblem& problem,
                                           const FsdeProblem& homogenized,
                                           double dt_coarse, double dt_ref,
                                           std::size_t n_paths,
                                           std::uint64_t seed,
                                           const SolveOptions& options) {
    if (problem.x0 != homogenized.x0 ||
        problem.alpha.value() != homogenized.alpha.value() ||
        !close_rel(problem.horizon_T, homogenized.horizon_T))
        throw std::domain_error(
            "homogenization_comparison: problems must share x0, alpha and T");
    const std::size_t k = checked_ratio(dt_coarse, dt_ref,
                                        "homogenization_comparison: dt ratio");
    const double T = problem.horizon_T;
    const std::size_t n_ref = checked_ratio(T, dt_ref,
                                            "homogenization_comparison: T/dt");

    BrownianLattice fine =
        generate(seed, n_paths, n_ref, T / static_cast<double>(n_ref),
                 problem.noise_dim, GenerateOptions{.threads = options.threads});
    BrownianLattice coarse = coarsen(fine, k);

    PathEnsemble ref = em_solve(problem, fine, options);
    PathEnsemble xc = em_solve(problem, coarse, options);
    PathEnsemble yc = em_solve(homogenized, coarse, options);

    ComparisonCurves curves;
    curves.meta = base_meta("compare", problem, n_paths, seed);
    curves.meta.fixed_dt = dt_coarse;
    curves.meta.fixed_epsilon = problem.epsilon;

    const std::size_t P = n_paths;
    const std::size_t dim = problem.state_dim;
    std::vector<double> per_path(P);
    for (std::size_t m = 0; m <= coarse.n_steps; ++m) {
        curves.t.push_back(xc.time(m));
        for (int which = 0; which < 2; ++which) {
            const PathEnsemble& c = which == 0 ? xc : yc;
            for (std::size_t p = 0; p < P; ++p) {
                double s = 0.0;
                for (std::size_t d = 0; d < dim; ++d) {
                    double diff = c.state(p, m, d) - ref.state(p, m * k, d);
                    s += diff * diff;
                }
                per_path[p] = s;
            }
            double rms =
                std::sqrt(pairwise_sum(per_path) / static_cast<double>(P));
            (which == 0 ? curves.ex : curves.ey).push_back(rms);
        }
    }
    return curves;
}

ConvergenceTable mu_study(const std::function<FsdeProblem(double)>& factory,
                          const FsdeProblem& homogenized,
                          const std::vector<double>& eps_list, double dt_ref,
                          std::size_t n_paths, std::uint64_t seed,
                          const SolveOptions& options) {
    if (eps_list.empty()) throw std::domain_error("mu_study: empty eps list");

    const double T = homogenized.horizon_T;
    const std::size_t n_steps = checked_ratio(T, dt_ref, "mu_study: T/dt");
    if (n_steps % 2 != 0)
        throw std::domain_error(
            "mu_study: T/dt_ref must be even for the discretization check");
    BrownianLattice lattice =
        generate(seed, n_paths, n_steps, T / static_cast<double>(n_steps),
                 homogenized.noise_dim,
                 GenerateOptions{.threads = options.threads});

    PathEnsemble hom = em_solve(homogenized, lattice, options);

    ConvergenceTable table;
    table.meta = base_meta("mu", homogenized, n_paths, seed);
    table.meta.fixed_dt = dt_ref;

    double largest_eps = eps_list.front();
    double gap_at_largest = 0.0;
    for (std::size_t i = 0; i < eps_list.size(); ++i) {
        FsdeProblem problem = factory(eps_list[i]);
        PathEnsemble sol = em_solve(problem, lattice, options);
        ConvergenceRow row;
        row.param = eps_list[i];
        row.error = mean_square_error(sol, hom);
        if (eps_list[i] >= largest_eps) {
            largest_eps = eps_list[i];
            gap_at_largest = row.error;
        }
        if (i > 0) {
            double prev = table.rows.back().error;
            // E^2 ~ eps^mu  =>  mu = d log E^2 / d log eps
            if (row.error > 0.0 && prev > 0.0) {
                row.order = 2.0 * (std::log(row.error) - std::log(prev)) /
                            (std::log(eps_list[i]) - std::log(eps_list[i - 1]));
                row.prev_param = eps_list[i - 1];
            }
        }
        table.rows.push_back(row);
    }

    // preliminary check: the dt error must sit below the homogenization gap
    {
        FsdeProblem probe = factory(largest_eps);
        PathEnsemble at_ref = em_solve(probe, lattice, options);
        PathEnsemble at_2ref = em_solve(probe, coarsen(lattice, 2), options);
        double disc = mean_square_error(at_ref, at_2ref);
        if (!(disc < 0.5 * gap_at_largest)) table.meta.disc_check_warning = true;
    }
    return table;
}

namespace {

void write_meta(std::ostream& os, const StudyMeta& meta) {
    os << "# metadata: study=" << meta.study_kind
       << " model=" << meta.model_label
       << " alpha=" << format_double17(meta.alpha)
       << " T=" << format_double17(meta.horizon_T)
       << " n_paths=" << meta.n_paths << " seed=" << meta.seed
       << " generator=" << meta.generator_id;
    if (meta.fixed_dt) os << " dt=" << format_double17(*meta.fixed_dt);
    if (meta.fixed_epsilon && std::isfinite(*meta.fixed_epsilon))
        os << " epsilon=" << format_double17(*meta.fixed_epsilon);
    if (!meta.config_hash.empty()) os << " config=" << meta.config_hash;
    if (meta.disc_check_warning)
        os << "\n# warning: discretization error is not below half the "
              "smallest homogenization gap; mu estimates may be contaminated";
    os << "\n";
}

}  // namespace

void write_table_csv(std::ostream& os, const ConvergenceTable& table) {
    write_meta(os, table.meta);
    os << "param,error,order\n";
    for (const auto& row : table.rows) {
        os << format_double17(row.param) << ',' << format_double17(row.error)
           << ',';
        if (row.order) os << format_double17(*row.order);
        os << "\n";
    }
}

void write_curves_csv(std::ostream& os, const ComparisonCurves& curves) {
    write_meta(os, curves.meta);
    os << "t,Ex,Ey\n";
    for (std::size_t i = 0; i < curves.t.size(); ++i)
        os << format_double17(curves.t[i]) << ','
           << format_double17(curves.ex[i]) << ','
           << format_double17(curves.ey[i]) << "\n";
}

}  // namespace fsde
