#include "fsde/homogenize.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <stdexcept>

#include "fsde/csvio.hpp"
#include "fsde/errors.hpp"
#include "fsde/rng.hpp"

namespace fsde {

namespace {

void check_finite_coef(std::span<const double> values, double s,
                       std::span<const double> x) {
    for (double v : values) {
        if (!std::isfinite(v)) {
            char buf[160];
            std::snprintf(buf, sizeof(buf),
                          "averaging: non-finite coefficient value at s=%.17g, "
                          "x[0]=%.17g",
                          s, x.empty() ? 0.0 : x[0]);
            throw EvaluationError(buf);
        }
    }
}

}  // namespace

std::vector<double> average_coefficient(const CoefficientFn& coef,
                                        std::span<const double> x,
                                        std::size_t out_dim, double T1,
                                        std::size_t n_quad) {
    if (!(T1 > 0.0))
        throw std::domain_error("average_coefficient: T1 must be positive");
    if (n_quad < 2)
        throw std::domain_error("average_coefficient: n_quad must be >= 2");

    const double h = T1 / static_cast<double>(n_quad);
    std::vector<double> acc(out_dim, 0.0);
    std::vector<double> value(out_dim);
    for (std::size_t j = 0; j <= n_quad; ++j) {
        double s = (j == n_quad) ? T1 : h * static_cast<double>(j);
        coef(s, x, value);
        check_finite_coef(value, s, x);
        double w = (j == 0 || j == n_quad) ? 0.5 : 1.0;
        for (std::size_t d = 0; d < out_dim; ++d) acc[d] += w * value[d];
    }
    for (double& a : acc) a *= h / T1;
    return acc;
}

// ---------------------------------------------------------------------------
// AveragedCoefficient

struct AveragedCoefficient::Impl {
    Backend backend = Backend::direct;
    std::size_t out_dim = 0;
    CesaroCertificate certificate;

    // closed_form
    CoefficientFn closed_form;

    // cached_spline (state_dim == 1): uniform nodes over [x_lo, x_hi],
    // values[node * out_dim + d]
    double x_lo = 0.0, x_hi = 0.0;
    std::size_t nodes = 0;
    std::vector<double> node_values;

    // direct
    CoefficientFn base;
    double horizon = 0.0;
    std::size_t quad_panels = 0;

    void eval(std::span<const double> x, std::span<double> out) const;
};

void AveragedCoefficient::Impl::eval(std::span<const double> x,
                                     std::span<double> out) const {
    switch (backend) {
        case Backend::closed_form:
            closed_form(0.0, x, out);
            return;
        case Backend::cached_spline: {
            const double h = (x_hi - x_lo) / static_cast<double>(nodes - 1);
            double u = (x[0] - x_lo) / h;
            auto node = [&](std::ptrdiff_t j, std::size_t d) {
                j = std::clamp<std::ptrdiff_t>(
                    j, 0, static_cast<std::ptrdiff_t>(nodes) - 1);
                return node_values[static_cast<std::size_t>(j) * out_dim + d];
            };
            if (u <= 0.0) {  // linear extrapolation from the end slope
                for (std::size_t d = 0; d < out_dim; ++d)
                    out[d] = node(0, d) + u * (node(1, d) - node(0, d));
                return;
            }
            if (u >= static_cast<double>(nodes - 1)) {
                double v = u - static_cast<double>(nodes - 1);
                auto last = static_cast<std::ptrdiff_t>(nodes) - 1;
                for (std::size_t d = 0; d < out_dim; ++d)
                    out[d] =
                        node(last, d) + v * (node(last, d) - node(last - 1, d));
                return;
            }
            auto j = static_cast<std::ptrdiff_t>(u);
            double t = u - static_cast<double>(j);
            // Catmull-Rom with clamped end nodes
            for (std::size_t d = 0; d < out_dim; ++d) {
                double p0 = node(j - 1, d), p1 = node(j, d), p2 = node(j + 1, d),
                       p3 = node(j + 2, d);
                out[d] = p1 + 0.5 * t *
                                  (p2 - p0 +
                                   t * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 +
                                        t * (3.0 * (p1 - p2) + p3 - p0)));
            }
            return;
        }
        case Backend::direct: {
            auto avg = average_coefficient(base, x, out_dim, horizon,
                                           quad_panels);
            std::copy(avg.begin(), avg.end(), out.begin());
            return;
        }
    }
}

AveragedCoefficient::AveragedCoefficient(std::shared_ptr<const Impl> impl)
    : impl_(std::move(impl)) {}

void AveragedCoefficient::operator()(double, std::span<const double> x,
                                     std::span<double> out) const {
    impl_->eval(x, out);
}

AveragedCoefficient::Backend AveragedCoefficient::backend() const {
    return impl_->backend;
}

const CesaroCertificate& AveragedCoefficient::certificate() const {
    return impl_->certificate;
}

std::size_t AveragedCoefficient::out_dim() const { return impl_->out_dim; }

AveragedCoefficient AveragedCoefficient::from_closed_form(CoefficientFn fn,
                                                          std::size_t out_dim) {
    auto impl = std::make_shared<Impl>();
    impl->backend = Backend::closed_form;
    impl->out_dim = out_dim;
    impl->closed_form = std::move(fn);
    return AveragedCoefficient(std::move(impl));
}

// ---------------------------------------------------------------------------
// Certificate and builder

namespace {

constexpr std::size_t kMaxPanels = std::size_t{1} << 22;

std::size_t panels_for(double T1, double panel_width) {
    auto p = static_cast<std::size_t>(std::ceil(T1 / panel_width));
    return std::clamp<std::size_t>(p, 2, kMaxPanels);
}

std::vector<std::vector<double>> probe_lattice(const AveragingOptions& opt,
                                               std::size_t dim) {
    if (opt.probe_lo.size() != dim || opt.probe_hi.size() != dim)
        throw std::domain_error(
            "averaging: probe box dimension does not match the state");
    for (std::size_t d = 0; d < dim; ++d)
        if (!(opt.probe_lo[d] < opt.probe_hi[d]))
            throw std::domain_error("averaging: degenerate probe box");
    std::size_t count = std::max<std::size_t>(opt.probe_points, 2);

    std::vector<std::vector<double>> points;
    if (dim == 1) {
        for (std::size_t i = 0; i < count; ++i) {
            double t = static_cast<double>(i) / static_cast<double>(count - 1);
            points.push_back({opt.probe_lo[0] +
                              t * (opt.probe_hi[0] - opt.probe_lo[0])});
        }
        return points;
    }
    // multi-D: box center plus seeded interior samples
    std::vector<double> center(dim);
    for (std::size_t d = 0; d < dim; ++d)
        center[d] = 0.5 * (opt.probe_lo[d] + opt.probe_hi[d]);
    points.push_back(center);
    for (std::size_t i = 1; i < count; ++i) {
        std::vector<double> p(dim);
        for (std::size_t d = 0; d < dim; ++d) {
            double u = rng::counter_uniform(0xA5EBA11u, i, d, 0);
            p[d] = opt.probe_lo[d] + u * (opt.probe_hi[d] - opt.probe_lo[d]);
        }
        points.push_back(std::move(p));
    }
    return points;
}

/// Runs the doubling ladder: computes avg at T1_start * 2^k for each probe
/// point, reusing rung k+1 as "avg(2*T1)" of rung k, until the deviation
/// falls below tol at every probe. Returns (certified horizon, deviation,
/// panels at that horizon).
CesaroCertificate certify(const CoefficientFn& coef, std::size_t out_dim,
                          const std::vector<std::vector<double>>& probes,
                          const AveragingOptions& opt,
                          const std::string& what) {
    const double width = opt.T1_start / static_cast<double>(opt.n_quad);
    double T1 = opt.T1_start;

    std::vector<std::vector<double>> prev;  // avg at current T1, per probe
    prev.reserve(probes.size());
    for (const auto& x : probes)
        prev.push_back(
            average_coefficient(coef, x, out_dim, T1, panels_for(T1, width)));

    double deviation = 0.0;
    for (std::size_t k = 0; k < opt.max_doublings; ++k) {
        double T2 = 2.0 * T1;
        deviation = 0.0;
        std::vector<std::vector<double>> next;
        next.reserve(probes.size());
        for (std::size_t i = 0; i < probes.size(); ++i) {
            next.push_back(average_coefficient(coef, probes[i], out_dim, T2,
                                               panels_for(T2, width)));
            for (std::size_t d = 0; d < out_dim; ++d)
                deviation =
                    std::max(deviation, std::fabs(next[i][d] - prev[i][d]));
        }
        if (deviation < opt.tol)
            return {T2, opt.tol, deviation, panels_for(T2, width)};
        prev = std::move(next);
        T1 = T2;
    }
    char buf[192];
    std::snprintf(buf, sizeof(buf),
                  "averaging diverges for %s: |avg(T1)-avg(2*T1)| = %.3e "
                  "still exceeds tol %.3e at T1 = %.6g (cap 2^%zu * %.6g); "
                  "the coefficient has no detectable time-average",
                  what.c_str(), deviation, opt.tol, T1, opt.max_doublings,
                  opt.T1_start);
    throw AveragingDivergenceError(buf, T1, deviation);
}

struct ClosedFormAverages {
    CoefficientFn drift;
    CoefficientFn diffusion;
};

/// Exact averages for the built-in registry models (the EM loop calls the
/// homogenized coefficient n_paths * N times, so built-ins skip the cache).
std::optional<ClosedFormAverages> closed_form_for(const std::string& label) {
    if (label == "example2") {
        return ClosedFormAverages{
            [](double, std::span<const double> y, std::span<double> out) {
                out[0] = std::sin(y[0]) - 0.5 * y[0];
            },
            [](double, std::span<const double> y, std::span<double> out) {
                out[0] = y[0];
            }};
    }
    if (label == "example42") {
        return ClosedFormAverages{
            [](double, std::span<const double> y, std::span<double> out) {
                out[0] = std::sin(y[0]);
            },
            [](double, std::span<const double> y, std::span<double> out) {
                out[0] = y[0];
            }};
    }
    return std::nullopt;
}

AveragedCoefficient build_averaged(const CoefficientFn& coef,
                                   std::size_t out_dim, std::size_t state_dim,
                                   const AveragingOptions& opt,
                                   const std::string& what,
                                   CoefficientFn closed_form) {
    auto probes = probe_lattice(opt, state_dim);
    CesaroCertificate cert = certify(coef, out_dim, probes, opt, what);

    auto impl = std::make_shared<AveragedCoefficient::Impl>();
    impl->out_dim = out_dim;
    impl->certificate = cert;

    if (closed_form && opt.allow_closed_form) {
        impl->backend = AveragedCoefficient::Backend::closed_form;
        impl->closed_form = std::move(closed_form);
        return AveragedCoefficient(std::move(impl));
    }
    if (state_dim == 1 && opt.cache_nodes >= 4) {
        // cache over the probe box widened by 25% a side; EM paths stray
        double lo = opt.probe_lo[0], hi = opt.probe_hi[0];
        double margin = 0.25 * (hi - lo);
        impl->backend = AveragedCoefficient::Backend::cached_spline;
        impl->x_lo = lo - margin;
        impl->x_hi = hi + margin;
        impl->nodes = opt.cache_nodes;
        impl->node_values.resize(opt.cache_nodes * out_dim);
        for (std::size_t i = 0; i < opt.cache_nodes; ++i) {
            double t = static_cast<double>(i) /
                       static_cast<double>(opt.cache_nodes - 1);
            double xv = impl->x_lo + t * (impl->x_hi - impl->x_lo);
            std::vector<double> x{xv};
            auto avg = average_coefficient(coef, x, out_dim, cert.horizon,
                                           cert.quad_panels);
            std::copy(avg.begin(), avg.end(),
                      impl->node_values.begin() + i * out_dim);
        }
        return AveragedCoefficient(std::move(impl));
    }
    impl->backend = AveragedCoefficient::Backend::direct;
    impl->base = coef;
    impl->horizon = cert.horizon;
    impl->quad_panels = cert.quad_panels;
    return AveragedCoefficient(std::move(impl));
}

}  // namespace

AveragedCoefficient make_averaged_coefficient(const FsdeProblem& problem,
                                              ProfileKind kind,
                                              const AveragingOptions& options) {
    auto closed = closed_form_for(problem.label);
    bool is_drift = kind == ProfileKind::drift;
    std::size_t out_dim = is_drift ? problem.state_dim
                                   : problem.state_dim * problem.noise_dim;
    return build_averaged(
        is_drift ? problem.drift : problem.diffusion, out_dim,
        problem.state_dim, options,
        problem.label + (is_drift ? " drift" : " diffusion"),
        closed ? (is_drift ? closed->drift : closed->diffusion)
               : CoefficientFn{});
}

FsdeProblem build_homogenized_problem(const FsdeProblem& problem,
                                      const AveragingOptions& options) {
    AveragedCoefficient drift =
        make_averaged_coefficient(problem, ProfileKind::drift, options);
    AveragedCoefficient diffusion =
        make_averaged_coefficient(problem, ProfileKind::diffusion, options);

    return make_problem(
        problem.alpha, FsdeProblem::kNoFastTime, problem.horizon_T, problem.x0,
        problem.noise_dim,
        [drift](double t, std::span<const double> x, std::span<double> out) {
            drift(t, x, out);
        },
        [diffusion](double t, std::span<const double> x, std::span<double> out) {
            diffusion(t, x, out);
        },
        problem.label + "-homogenized");
}

// ---------------------------------------------------------------------------
// Averaging profiles

namespace {

/// Integral of (T1-s)^beta against the piecewise-linear interpolant of
/// residual samples r_0..r_M on the uniform grid s_j = j*h, h = T1/M.
/// Kernel moments per panel are exact, so the rule is exact for constant
/// residuals: int_0^{T1} (T1-s)^beta ds = T1^(beta+1)/(beta+1).
double kernel_weighted_integral(std::span<const double> r, double T1,
                                double beta) {
    const std::size_t M = r.size() - 1;
    const double h = T1 / static_cast<double>(M);
    const double b1 = beta + 1.0;
    const double b2 = beta + 2.0;
    double acc = 0.0;
    double u_hi_pow1 = std::pow(T1, b1);  // (T1 - s_0)^(beta+1)
    double u_hi_pow2 = std::pow(T1, b2);
    for (std::size_t j = 0; j < M; ++j) {
        double s_j = h * static_cast<double>(j);
        double u_lo = T1 - (h * static_cast<double>(j + 1));
        if (j + 1 == M) u_lo = 0.0;
        double u_lo_pow1 = u_lo > 0.0 ? std::pow(u_lo, b1) : 0.0;
        double u_lo_pow2 = u_lo > 0.0 ? std::pow(u_lo, b2) : 0.0;
        double m0 = (u_hi_pow1 - u_lo_pow1) / b1;
        double m1 = T1 * m0 - (u_hi_pow2 - u_lo_pow2) / b2;  // int u^b * s
        double slope = (r[j + 1] - r[j]) / h;
        acc += r[j] * m0 + slope * (m1 - s_j * m0);
        u_hi_pow1 = u_lo_pow1;
        u_hi_pow2 = u_lo_pow2;
    }
    return acc;
}

struct ResidualSampler {
    const CoefficientFn& coef;
    const AveragedCoefficient& avg;
    std::size_t out_dim;

    // residual vector coef(s,x) - avg(x) into `out`
    void operator()(double s, std::span<const double> x,
                    std::span<double> out, std::span<double> scratch) const {
        coef(s, x, out);
        check_finite_coef(out, s, x);
        avg(0.0, x, scratch);
        for (std::size_t d = 0; d < out_dim; ++d) out[d] -= scratch[d];
    }
};

double one_plus_norm2(std::span<const double> x) {
    double s = 1.0;
    for (double v : x) s += v * v;
    return s;
}

void validate_profile_grids(std::span<const double> t1_grid,
                            const std::vector<std::vector<double>>& x_grid,
                            std::size_t n_quad) {
    if (t1_grid.empty() || x_grid.empty())
        throw std::domain_error("profile: empty grid");
    for (std::size_t i = 0; i + 1 < t1_grid.size(); ++i)
        if (!(t1_grid[i] < t1_grid[i + 1]))
            throw std::domain_error("profile: t1_grid must strictly increase");
    if (!(t1_grid.front() > 0.0))
        throw std::domain_error("profile: T1 values must be positive");
    if (n_quad < 2)
        throw std::domain_error("profile: n_quad must be >= 2");
}

}  // namespace

AveragingProfile weak_profile(const CoefficientFn& coef,
                              const AveragedCoefficient& avg,
                              FractionalOrder alpha, ProfileKind kind,
                              std::span<const double> t1_grid,
                              const std::vector<std::vector<double>>& x_grid,
                              std::size_t n_quad) {
    validate_profile_grids(t1_grid, x_grid, n_quad);
    const double a = alpha.value();
    const std::size_t out_dim = avg.out_dim();
    ResidualSampler residual{coef, avg, out_dim};

    AveragingProfile profile;
    profile.alpha = a;
    profile.kind = kind;
    profile.weak = true;
    profile.t1_grid.assign(t1_grid.begin(), t1_grid.end());
    profile.x_grid = x_grid;

    std::vector<double> rbuf(out_dim), scratch(out_dim);
    std::vector<std::vector<double>> comp(out_dim,
                                          std::vector<double>(n_quad + 1));
    std::vector<double> sq(n_quad + 1);

    for (double T1 : t1_grid) {
        const double h = T1 / static_cast<double>(n_quad);
        double worst = 0.0;
        for (const auto& x : x_grid) {
            for (std::size_t j = 0; j <= n_quad; ++j) {
                double s = (j == n_quad) ? T1 : h * static_cast<double>(j);
                residual(s, x, rbuf, scratch);
                for (std::size_t d = 0; d < out_dim; ++d) comp[d][j] = rbuf[d];
                if (kind == ProfileKind::diffusion) {
                    double n2 = 0.0;
                    for (double v : rbuf) n2 += v * v;
                    sq[j] = n2;
                }
            }
            double value;
            if (kind == ProfileKind::drift) {
                double norm2 = 0.0;
                for (std::size_t d = 0; d < out_dim; ++d) {
                    double I = kernel_weighted_integral(comp[d], T1, a - 1.0);
                    norm2 += I * I;
                }
                value = norm2 / std::pow(T1, 2.0 * a);
            } else {
                double I = kernel_weighted_integral(sq, T1, 2.0 * (a - 1.0));
                value = I * std::pow(T1, 1.0 - 2.0 * a);
            }
            worst = std::max(worst, value / one_plus_norm2(x));
        }
        profile.values.push_back(worst);
    }
    return profile;
}

AveragingProfile strong_profile(const CoefficientFn& coef,
                                const AveragedCoefficient& avg,
                                ProfileKind kind,
                                std::span<const double> t1_grid,
                                const std::vector<std::vector<double>>& x_grid,
                                std::size_t n_quad) {
    validate_profile_grids(t1_grid, x_grid, n_quad);
    const std::size_t out_dim = avg.out_dim();
    ResidualSampler residual{coef, avg, out_dim};

    AveragingProfile profile;
    profile.alpha = 0.0;
    profile.kind = kind;
    profile.weak = false;
    profile.t1_grid.assign(t1_grid.begin(), t1_grid.end());
    profile.x_grid = x_grid;

    std::vector<double> rbuf(out_dim), scratch(out_dim), sq(n_quad + 1);
    for (double T1 : t1_grid) {
        const double h = T1 / static_cast<double>(n_quad);
        double worst = 0.0;
        for (const auto& x : x_grid) {
            for (std::size_t j = 0; j <= n_quad; ++j) {
                double s = (j == n_quad) ? T1 : h * static_cast<double>(j);
                residual(s, x, rbuf, scratch);
                double n2 = 0.0;
                for (double v : rbuf) n2 += v * v;
                sq[j] = n2;
            }
            // beta = 0 reduces the product rule to the exact trapezoid
            double I = kernel_weighted_integral(sq, T1, 0.0);
            worst = std::max(worst, I / T1 / one_plus_norm2(x));
        }
        profile.values.push_back(worst);
    }
    return profile;
}

double balanced_step(FractionalOrder alpha, double epsilon) {
    const double a = alpha.value();
    if (a >= 1.0)
        throw std::domain_error(
            "balanced_step: alpha = 1 is the classical regime; the exponent "
            "2/(3-2*alpha) assumes alpha < 1");
    if (!(epsilon > 0.0) || std::isinf(epsilon))
        throw std::domain_error("balanced_step: epsilon must be finite and > 0");
    return std::pow(epsilon, 2.0 / (3.0 - 2.0 * a));
}

void write_profile_csv(std::ostream& os, const AveragingProfile& weak_drift,
                       const AveragingProfile& weak_diffusion,
                       const AveragingProfile& strong_drift,
                       const AveragingProfile& strong_diffusion) {
    const auto& grid = weak_drift.t1_grid;
    for (const auto* p : {&weak_diffusion, &strong_drift, &strong_diffusion})
        if (p->t1_grid != grid)
            throw std::domain_error("write_profile_csv: T1 grids differ");
    os << "T1,weak_drift,weak_diffusion,strong_drift,strong_diffusion\n";
    for (std::size_t i = 0; i < grid.size(); ++i) {
        os << format_double17(grid[i]) << ','
           << format_double17(weak_drift.values[i]) << ','
           << format_double17(weak_diffusion.values[i]) << ','
           << format_double17(strong_drift.values[i]) << ','
           << format_double17(strong_diffusion.values[i]) << "\n";
    }
}

}  // namespace fsde
