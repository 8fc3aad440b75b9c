#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fsde {

/// Caputo order alpha, restricted to (1/2, 1]. alpha = 1 is the classical
/// degenerate case and is admitted for cross-checks against plain
/// Euler-Maruyama.
class FractionalOrder {
public:
    explicit FractionalOrder(double alpha);
    double value() const { return alpha_; }

private:
    double alpha_;
};

/// Precomputed convolution weights for one (alpha, N) pair:
///   drift_w[j] = (j+1)^alpha - j^alpha        (integrated drift kernel)
///   diff_w[j]  = (j+1)^(alpha-1)              (left-point diffusion kernel)
/// At step n the weight on history index i is drift_w[n-i-1] / diff_w[n-i-1].
/// Built once and shared read-only across paths; the O(N^2) inner loop must
/// not recompute powers.
struct WeightTable {
    double alpha = 0.0;
    std::vector<double> drift_w;
    std::vector<double> diff_w;

    std::size_t size() const { return drift_w.size(); }
};

WeightTable build_weights(FractionalOrder order, std::size_t n_steps);

/// Product-integration approximation of the Riemann-Liouville integral
/// I^alpha f on the uniform grid t_j = j*dt:
///   out[n] = dt^alpha / Gamma(alpha+1) *
///            sum_{i<n} [(n-i)^alpha - (n-i-1)^alpha] * f(t_i),   out[0] = 0.
/// The rule integrates the kernel exactly against a piecewise-constant
/// (left-endpoint) interpolant, so it is exact for constant f.
std::vector<double> rl_integral(std::span<const double> samples,
                                FractionalOrder order, double dt);

/// Gamma function for x > 0, relative error below 1e-13 on (0, 50].
double gamma_fn(double x);

/// Mittag-Leffler function E_alpha(z) = sum_k z^k / Gamma(alpha*k + 1),
/// summed directly in extended precision with Kahan compensation.
///
/// Deterministic oracle for the linear Caputo equation; deliberately narrow.
/// Admitted regime: |z| <= 50, truncated at 700 terms (far beyond the tail
/// for any admitted input), and guarded by a running roundoff estimate
/// sum_k |term_k| * 1e-16 <= 5e-13. In practice that admits |z| up to about
/// 8 near alpha = 1 (tighter for smaller alpha, where the terms peak
/// higher); inputs past the guard raise std::range_error rather than losing
/// digits silently. Absolute error inside the regime is below 1e-12.
double mittag_leffler(FractionalOrder order, double z);

namespace detail {
/// (j+1)^alpha - j^alpha evaluated directly as a difference of powers.
/// For j >= 1 the two powers are within a factor 2^alpha <= 2 of each other,
/// so the subtraction is exact (Sterbenz) and the only rounding comes from
/// std::pow itself. Exposed unvalidated so the closed form can be checked at
/// boundary alphas the public type rejects.
double power_difference(double alpha, std::size_t j);
}  // namespace detail

}  // namespace fsde
