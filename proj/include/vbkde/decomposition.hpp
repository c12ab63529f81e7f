#pragma once

// Linearization diagnostics for the two-stage estimator: pilot deviation
// D(t;h1) and bias b(t;h1), the relative pilot error delta_n, the dominant
// linear term epsilon_1, the empirical-process term T(t;h1,h2), and the
// sup gap |true - ideal - T| over a region grid.

#include <cmath>
#include <memory>
#include <stdexcept>
#include <vector>

#include "bandwidth.hpp"
#include "density.hpp"
#include "estimators.hpp"
#include "kernel.hpp"
#include "quadrature.hpp"

namespace vbkde {

/// L(z) = K(z) + z K'(z) = d/dz [z K(z)].
inline double L_fn(const Kernel& k, double z) {
    return k.eval(z, 0) + z * k.eval(z, 1);
}

/// L1(z) = z K'(z).
inline double L1_fn(const Kernel& k, double z) {
    return z * k.eval(z, 1);
}

class DecompContext {
public:
    DecompContext(const Sample& sample, const DensityModel& density,
                  const Kernel& kernel, BandwidthPair bw, double B,
                  double region_r)
        : sample_(&sample), density_(&density), kernel_(&kernel), bw_(bw),
          B_(B), region_r_(region_r), sorted_(sample) {
        if (!(B >= kernel.half_width() / std::sqrt(region_r)))
            throw std::invalid_argument("DecompContext requires B >= T/sqrt(r)");
    }

    const Sample& sample() const { return *sample_; }
    const DensityModel& density() const { return *density_; }
    const Kernel& kernel() const { return *kernel_; }
    const BandwidthPair& bandwidths() const { return bw_; }
    double B() const { return B_; }
    double region_r() const { return region_r_; }
    const SortedSample& sorted() const { return sorted_; }

    /// Build the per-sample-point pilot deviation cache eagerly (one
    /// expected-pilot quadrature per distinct sample point); call before
    /// any parallel section.
    void build_caches() const {
        if (!dev_at_points_.empty()) return;
        dev_at_points_.resize(sample_->n());
        for (std::size_t i = 0; i < sample_->n(); ++i) {
            double x = sample_->observations[i];
            dev_at_points_[i] =
                classical_kde_fast(sorted_, bw_.h1, *kernel_, x) -
                expected_pilot_value(x);
        }
    }

    const std::vector<double>& dev_cache() const {
        build_caches();
        return dev_at_points_;
    }

    /// E f_hat(t;h1) = int K(u) f(t - h1 u) du, adaptive to 1e-10.
    double expected_pilot_value(double t) const {
        const Kernel& k = *kernel_;
        const DensityModel& d = *density_;
        double T = k.half_width(), h1 = bw_.h1;
        return adaptive_integrate(
            [&](double u) { return k(u) * d.eval(t - h1 * u, 0); }, -T, T, 1e-10);
    }

private:
    const Sample* sample_;
    const DensityModel* density_;
    const Kernel* kernel_;
    BandwidthPair bw_;
    double B_;
    double region_r_;
    SortedSample sorted_;
    mutable std::vector<double> dev_at_points_;
};

inline double expected_pilot(double t, const DecompContext& ctx) {
    return ctx.expected_pilot_value(t);
}

inline double dev_D(double t, const DecompContext& ctx) {
    return classical_kde_fast(ctx.sorted(), ctx.bandwidths().h1, ctx.kernel(), t) -
           ctx.expected_pilot_value(t);
}

inline double bias_b(double t, const DecompContext& ctx) {
    return ctx.expected_pilot_value(t) - ctx.density().eval(t, 0);
}

inline double delta_eval(double t, const DecompContext& ctx) {
    double f = ctx.density().eval(t, 0);
    if (f <= 1e-12)
        throw std::domain_error("delta_eval requires f(t) > 1e-12");
    double fhat = classical_kde_fast(ctx.sorted(), ctx.bandwidths().h1,
                                     ctx.kernel(), t);
    return (std::sqrt(fhat) - std::sqrt(f)) / std::sqrt(f);
}

/// Dominant linear term: (1/(n h2)) sum_i L(.) f^{-1/2}(X_i) D(X_i) 1{|t-X_i|<h2 B}.
/// `dev_override` substitutes the cached pilot deviations (tests use it to
/// force D to zero or rescale it).
inline double epsilon1_eval(double t, const DecompContext& ctx,
                            const std::vector<double>* dev_override = nullptr) {
    const Sample& s = ctx.sample();
    const Kernel& k = ctx.kernel();
    const DensityModel& d = ctx.density();
    const double h2 = ctx.bandwidths().h2, B = ctx.B();
    const std::vector<double>& dev = dev_override ? *dev_override : ctx.dev_cache();
    double sum = 0.0;
    for (std::size_t i = 0; i < s.n(); ++i) {
        double x = s.observations[i];
        if (!(std::abs(t - x) < h2 * B)) continue;
        double f = d.eval(x, 0);
        if (f <= 1e-12)
            throw std::domain_error("epsilon1: density vanishes at sample point");
        double rf = std::sqrt(f);
        sum += L_fn(k, (t - x) * rf / h2) / rf * dev[i];
    }
    return sum / (s.n() * h2);
}

/// Empirical-process term T(t;h1,h2): the leading approximation to the
/// true-minus-ideal difference. Averaging the Hoeffding projection of the
/// double sum against the density collapses it to
///   (1/(2 h2)) int f^{1/2}(x) D(x) L((t-x)f^{1/2}(x)/h2) dx
/// over the window |t-x| <= h2 B (the factor 1/2 comes from linearizing
/// sqrt(fhat) = sqrt(f)(1 + D/(2f) + ...)); the pilot expectation inside D
/// supplies the inner quadrature.
inline double T_eval(double t, const DecompContext& ctx) {
    const Kernel& k = ctx.kernel();
    const DensityModel& d = ctx.density();
    const double h1 = ctx.bandwidths().h1, h2 = ctx.bandwidths().h2;
    const double B = ctx.B();
    auto integrand = [&](double x) {
        double f = d.eval(x, 0);
        if (f <= 1e-12)
            throw std::domain_error("T_eval: density vanishes in window");
        double rf = std::sqrt(f);
        double D = classical_kde_fast(ctx.sorted(), h1, k, x) -
                   ctx.expected_pilot_value(x);
        return 0.5 * rf * D * L_fn(k, (t - x) * rf / h2);
    };
    // Panels no wider than half the pilot bandwidth: D varies at scale h1.
    double width = std::min(h1, h2) / 2.0;
    return composite_gl(integrand, t - h2 * B, t + h2 * B, width, 16) / h2;
}

/// sup over the grid of |true two-stage - ideal - T|.
inline double linearization_gap(const DecompContext& ctx,
                                const std::vector<double>& grid) {
    const Sample& s = ctx.sample();
    auto pilots = pilot_at_points(s, ctx.bandwidths().h1, ctx.kernel());
    std::vector<double> fvals(s.n());
    for (std::size_t i = 0; i < s.n(); ++i)
        fvals[i] = ctx.density().eval(s.observations[i], 0);
    auto wp_true = detail::sorted_with_roots(s, pilots);
    auto wp_ideal = detail::sorted_with_roots(s, fvals);
    double h2 = ctx.bandwidths().h2, B = ctx.B();
    double worst = 0.0;
    for (double t : grid) {
        double tru = detail::variable_bw_point(wp_true, h2, B, ctx.kernel(), t);
        double ideal = detail::variable_bw_point(wp_ideal, h2, B, ctx.kernel(), t);
        worst = std::max(worst, std::abs(tru - ideal - T_eval(t, ctx)));
    }
    return worst;
}

}  // namespace vbkde
