#include "fsde/model.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "fsde/errors.hpp"
#include "fsde/rng.hpp"

namespace fsde {

FsdeProblem make_problem(FractionalOrder alpha, double epsilon, double horizon_T,
                         std::vector<double> x0, std::size_t noise_dim,
                         CoefficientFn drift, CoefficientFn diffusion,
                         std::string label) {
    if (!(epsilon > 0.0))  // +inf sentinel passes
        throw std::domain_error("FsdeProblem: epsilon must be positive");
    if (!(horizon_T > 0.0))
        throw std::domain_error("FsdeProblem: horizon_T must be positive");
    if (x0.empty())
        throw std::domain_error("FsdeProblem: state dimension must be >= 1");
    if (noise_dim < 1)
        throw std::domain_error("FsdeProblem: noise dimension must be >= 1");
    if (!drift || !diffusion)
        throw std::domain_error("FsdeProblem: missing coefficient function");

    std::size_t n = x0.size();
    return FsdeProblem{alpha,       epsilon,          horizon_T,
                       std::move(x0), n,              noise_dim,
                       std::move(drift), std::move(diffusion),
                       std::move(label)};
}

namespace {

constexpr double kLambda = 0.5;

// Oscillatory drift of the section-4.2 pair; `reaction` adds the -lambda*x
// term that turns it into example2.
CoefficientFn oscillatory_drift(bool reaction) {
    return [reaction](double tau, std::span<const double> x,
                      std::span<double> out) {
        double c = std::cos(tau);
        out[0] = 2.0 * c * c * std::sin(x[0]);
        if (reaction) out[0] -= kLambda * x[0];
    };
}

CoefficientFn decaying_diffusion() {
    return [](double tau, std::span<const double> x, std::span<double> out) {
        // exp underflows to 0 for large tau; that is the intended limit
        out[0] = (std::exp(-tau) + 1.0) * x[0];
    };
}

}  // namespace

FsdeProblem make_example1(FractionalOrder alpha, double epsilon, double T) {
    return make_problem(
        alpha, epsilon, T, {0.1}, 1,
        [](double tau, std::span<const double> x, std::span<double> out) {
            out[0] = tau * x[0];
        },
        [](double, std::span<const double> x, std::span<double> out) {
            out[0] = x[0];
        },
        "example1");
}

FsdeProblem make_example2(FractionalOrder alpha, double epsilon, double T) {
    return make_problem(alpha, epsilon, T, {0.5}, 1, oscillatory_drift(true),
                        decaying_diffusion(), "example2");
}

FsdeProblem make_example2_homogenized(FractionalOrder alpha, double T) {
    return make_problem(
        alpha, FsdeProblem::kNoFastTime, T, {0.5}, 1,
        [](double, std::span<const double> y, std::span<double> out) {
            out[0] = std::sin(y[0]) - kLambda * y[0];
        },
        [](double, std::span<const double> y, std::span<double> out) {
            out[0] = y[0];
        },
        "example2-homogenized");
}

FsdeProblem make_example42(FractionalOrder alpha, double epsilon, double T) {
    return make_problem(alpha, epsilon, T, {0.5}, 1, oscillatory_drift(false),
                        decaying_diffusion(), "example42");
}

FsdeProblem make_example42_homogenized(FractionalOrder alpha, double T) {
    return make_problem(
        alpha, FsdeProblem::kNoFastTime, T, {0.5}, 1,
        [](double, std::span<const double> y, std::span<double> out) {
            out[0] = std::sin(y[0]);
        },
        [](double, std::span<const double> y, std::span<double> out) {
            out[0] = y[0];
        },
        "example42-homogenized");
}

std::vector<std::string> registry_labels() {
    return {"example1", "example2", "example2-homogenized", "example42",
            "example42-homogenized"};
}

FsdeProblem make_from_registry(const std::string& label, FractionalOrder alpha,
                               double epsilon, double T) {
    if (label == "example1") return make_example1(alpha, epsilon, T);
    if (label == "example2") return make_example2(alpha, epsilon, T);
    if (label == "example2-homogenized")
        return make_example2_homogenized(alpha, T);
    if (label == "example42") return make_example42(alpha, epsilon, T);
    if (label == "example42-homogenized")
        return make_example42_homogenized(alpha, T);

    std::string msg = "unknown model label \"" + label + "\"; known labels:";
    for (const auto& l : registry_labels()) msg += " " + l;
    throw std::out_of_range(msg);
}

namespace {

double norm2(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

void check_finite(std::span<const double> v, const char* which, double tau,
                  std::span<const double> x) {
    for (double value : v) {
        if (!std::isfinite(value)) {
            char buf[192];
            int off = std::snprintf(
                buf, sizeof(buf),
                "probe_assumptions: non-finite %s value at fast_time=%.17g, x=(",
                which, tau);
            for (std::size_t i = 0; i < x.size() && off < 170; ++i)
                off += std::snprintf(buf + off, sizeof(buf) - off, "%s%.6g",
                                     i ? "," : "", x[i]);
            std::snprintf(buf + off, sizeof(buf) - off, ")");
            throw EvaluationError(buf);
        }
    }
}

}  // namespace

LipschitzProbeReport probe_assumptions(const FsdeProblem& problem,
                                       const ProbeBox& box,
                                       std::size_t n_samples,
                                       std::uint64_t seed) {
    const std::size_t n = problem.state_dim;
    if (box.state_lo.size() != n || box.state_hi.size() != n)
        throw std::domain_error("probe_assumptions: box dimension mismatch");
    for (std::size_t d = 0; d < n; ++d)
        if (!(box.state_lo[d] < box.state_hi[d]))
            throw std::domain_error("probe_assumptions: degenerate state box");
    if (!(box.time_lo < box.time_hi))
        throw std::domain_error("probe_assumptions: degenerate time range");
    if (n_samples < 2)
        throw std::domain_error("probe_assumptions: need n_samples >= 2");

    const std::size_t m = problem.noise_dim;
    std::vector<double> x(n), y(n), zero(n, 0.0);
    std::vector<double> fx(n), fy(n), gx(n * m), gy(n * m);
    std::vector<double> buf(n), gbuf(n * m);

    LipschitzProbeReport report;
    report.sample_box = box;
    report.n_samples = n_samples;

    auto uniform = [&](std::uint64_t i, std::uint64_t field, double lo,
                       double hi) {
        return lo + (hi - lo) * rng::counter_uniform(seed, i, field, 0);
    };

    for (std::uint64_t i = 0; i < n_samples; ++i) {
        double t = uniform(i, 0, box.time_lo, box.time_hi);
        double s = uniform(i, 1, box.time_lo, box.time_hi);
        for (std::size_t d = 0; d < n; ++d) {
            x[d] = uniform(i, 2 + d, box.state_lo[d], box.state_hi[d]);
            y[d] = uniform(i, 2 + n + d, box.state_lo[d], box.state_hi[d]);
        }

        problem.drift(t, x, fx);
        problem.drift(t, y, fy);
        problem.diffusion(t, x, gx);
        problem.diffusion(t, y, gy);
        check_finite(fx, "drift", t, x);
        check_finite(gx, "diffusion", t, x);
        check_finite(fy, "drift", t, y);
        check_finite(gy, "diffusion", t, y);

        double dx = 0.0;
        for (std::size_t d = 0; d < n; ++d) dx += (x[d] - y[d]) * (x[d] - y[d]);
        dx = std::sqrt(dx);
        if (dx > 0.0) {
            for (std::size_t d = 0; d < n; ++d) buf[d] = fx[d] - fy[d];
            double rf = norm2(buf) / dx;
            for (std::size_t k = 0; k < n * m; ++k) gbuf[k] = gx[k] - gy[k];
            double rg = norm2(gbuf) / dx;
            report.est_state_lipschitz =
                std::max({report.est_state_lipschitz, rf, rg});
        }

        if (std::fabs(t - s) > 0.0) {
            problem.drift(s, x, fy);
            problem.diffusion(s, x, gy);
            check_finite(fy, "drift", s, x);
            check_finite(gy, "diffusion", s, x);
            for (std::size_t d = 0; d < n; ++d) buf[d] = fx[d] - fy[d];
            double rf = norm2(buf) / std::fabs(t - s);
            for (std::size_t k = 0; k < n * m; ++k) gbuf[k] = gx[k] - gy[k];
            double rg = norm2(gbuf) / std::fabs(t - s);
            report.est_time_lipschitz =
                std::max({report.est_time_lipschitz, rf, rg});
        }

        problem.drift(t, zero, buf);
        problem.diffusion(t, zero, gbuf);
        check_finite(buf, "drift", t, zero);
        check_finite(gbuf, "diffusion", t, zero);
        report.est_growth_bound =
            std::max({report.est_growth_bound, norm2(buf), norm2(gbuf)});
    }
    return report;
}

}  // namespace fsde
