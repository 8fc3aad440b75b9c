#pragma once

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "fsde/frackernel.hpp"
#include "fsde/model.hpp"

namespace fsde {

/// Composite-trapezoid approximation of (1/T1) * int_0^{T1} coef(s, x) ds,
/// component-wise. Exact on coefficients constant in s.
std::vector<double> average_coefficient(const CoefficientFn& coef,
                                        std::span<const double> x,
                                        std::size_t out_dim, double T1,
                                        std::size_t n_quad);

/// Stopping evidence for the time-average: the doubling rule
/// |avg(T1) - avg(2*T1)| < tolerance held at every probe point at horizon
/// `horizon`. For means with monotone 1/T1-type tails the reported value
/// carries roughly tolerance-level accuracy; slowly decaying oscillatory
/// means can stop on a lucky phase where the deviation dips while the bias
/// is one to two orders larger, so drive `tol` below the accuracy actually
/// needed.
struct CesaroCertificate {
    double horizon = 0.0;
    double tolerance = 0.0;
    double max_deviation = 0.0;
    std::size_t quad_panels = 0;
};

struct AveragingOptions {
    double T1_start = 64.0;
    double tol = 1e-4;
    std::size_t n_quad = 1280;       // panels at T1_start; width kept fixed
    std::size_t max_doublings = 20;  // certificate cap at 2^20 * T1_start
    std::vector<double> probe_lo;    // x probe box
    std::vector<double> probe_hi;
    std::size_t probe_points = 9;
    std::size_t cache_nodes = 1025;  // spline cache resolution (1-D states)
    bool allow_closed_form = true;   // exact overrides for built-in models
};

/// A coefficient with the fast-time argument integrated out. Evaluation
/// ignores its fast-time parameter. Closed-form overrides exist for the
/// built-in models; otherwise 1-D problems evaluate a Catmull-Rom spline
/// cached over the probe box (linear extrapolation beyond it, since EM paths
/// may wander outside), and higher dimensions fall back to quadrature per
/// call.
class AveragedCoefficient {
public:
    enum class Backend { closed_form, cached_spline, direct };

    void operator()(double fast_time, std::span<const double> x,
                    std::span<double> out) const;

    Backend backend() const;
    const CesaroCertificate& certificate() const;
    std::size_t out_dim() const;

    /// Wraps an already-averaged closed form (test and CLI helper); the
    /// certificate is vacuous (deviation 0).
    static AveragedCoefficient from_closed_form(CoefficientFn fn,
                                                std::size_t out_dim);

    struct Impl;
    explicit AveragedCoefficient(std::shared_ptr<const Impl> impl);

private:
    std::shared_ptr<const Impl> impl_;
};

/// Builds the autonomous counterpart of `problem`: same order, horizon and
/// initial state, drift/diffusion replaced by their certified time-averages.
/// Throws AveragingDivergenceError when the certificate still fails at the
/// doubling cap (e.g. drift t*x, whose running mean grows like T1/2).
FsdeProblem build_homogenized_problem(const FsdeProblem& problem,
                                      const AveragingOptions& options);

/// Builds just the averaged coefficient for one of the problem's two roles.
enum class ProfileKind { drift, diffusion };
AveragedCoefficient make_averaged_coefficient(const FsdeProblem& problem,
                                              ProfileKind kind,
                                              const AveragingOptions& options);

/// Residual-decay profiles over an averaging-horizon grid. Values are
/// normalized by (1 + |x|^2) and maximized over x_grid:
///   weak drift:      | T1^{-a} int_0^{T1} (T1-s)^{a-1} (f - fbar) ds |^2
///   weak diffusion:  T1^{1-2a} int_0^{T1} (T1-s)^{2(a-1)} |g - gbar|^2 ds
///   strong (either): (1/T1)    int_0^{T1} |coef - avg|^2 ds
/// The singular kernels are product-integrated: exact kernel moments against
/// a piecewise-linear interpolant of the residual (naive sampling of
/// (T1-s)^{a-1} near s = T1 diverges, 2(a-1) being in (-1, 0)).
struct AveragingProfile {
    double alpha = 0.0;  // 0 for strong profiles (kernel-free)
    ProfileKind kind = ProfileKind::drift;
    bool weak = true;
    std::vector<double> t1_grid;
    std::vector<std::vector<double>> x_grid;
    std::vector<double> values;  // one per T1: max over x_grid
};

AveragingProfile weak_profile(const CoefficientFn& coef,
                              const AveragedCoefficient& avg,
                              FractionalOrder alpha, ProfileKind kind,
                              std::span<const double> t1_grid,
                              const std::vector<std::vector<double>>& x_grid,
                              std::size_t n_quad);

AveragingProfile strong_profile(const CoefficientFn& coef,
                                const AveragedCoefficient& avg,
                                ProfileKind kind,
                                std::span<const double> t1_grid,
                                const std::vector<std::vector<double>>& x_grid,
                                std::size_t n_quad);

/// Step size equating the two error contributions of the scheme:
/// dt = eps^{2/(3-2a)}. The exponent formula assumes the strictly fractional
/// regime, so alpha = 1 is rejected.
double balanced_step(FractionalOrder alpha, double epsilon);

/// Profile CSV: `T1,weak_drift,weak_diffusion,strong_drift,strong_diffusion`
/// per row, 17-digit doubles. All four profiles must share one T1 grid.
void write_profile_csv(std::ostream& os, const AveragingProfile& weak_drift,
                       const AveragingProfile& weak_diffusion,
                       const AveragingProfile& strong_drift,
                       const AveragingProfile& strong_diffusion);

}  // namespace fsde
