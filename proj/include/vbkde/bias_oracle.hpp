#pragma once

// Deterministic bias machinery for the ideal estimator: the expected curve
// tilde_f(t;h), the integrand family g_{t,w}(u) = f^{3/2}(t+u) K(w f^{1/2}(t+u))
// with closed-form derivatives up to order four, the moment-cancellation
// integrals, and the fourth-order bias functional H(t,f,K).

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "density.hpp"
#include "kernel.hpp"
#include "quadrature.hpp"
#include "regions.hpp"

namespace vbkde {

namespace detail {

/// Derivatives 0..4 of p(u)^a from derivatives 0..4 of p(u)
/// (Faa di Bruno with power outer function).
inline std::array<double, 5> power_derivs(const std::array<double, 5>& p, double a) {
    const double q0 = std::pow(p[0], a);
    const double qm1 = a * std::pow(p[0], a - 1.0);
    const double qm2 = a * (a - 1.0) * std::pow(p[0], a - 2.0);
    const double qm3 = a * (a - 1.0) * (a - 2.0) * std::pow(p[0], a - 3.0);
    const double qm4 = a * (a - 1.0) * (a - 2.0) * (a - 3.0) * std::pow(p[0], a - 4.0);
    std::array<double, 5> q;
    q[0] = q0;
    q[1] = qm1 * p[1];
    q[2] = qm2 * p[1] * p[1] + qm1 * p[2];
    q[3] = qm3 * p[1] * p[1] * p[1] + 3.0 * qm2 * p[1] * p[2] + qm1 * p[3];
    q[4] = qm4 * p[1] * p[1] * p[1] * p[1] + 6.0 * qm3 * p[1] * p[1] * p[2] +
           qm2 * (3.0 * p[2] * p[2] + 4.0 * p[1] * p[3]) + qm1 * p[4];
    return q;
}

}  // namespace detail

struct GEvalContext {
    double t = 0.0;
    double w = 0.0;
    const DensityModel* density = nullptr;
    const Kernel* kernel = nullptr;
    /// Bandwidth-variation exponent; 1/2 is the square-root law. Other
    /// values exist only to probe that the i=2 cancellation fails for them.
    double alpha = 0.5;
};

/// g^(order)(u) assembled from the closed-form product/chain expansion.
inline double g_eval(const GEvalContext& ctx, double u, int order) {
    if (order < 0 || order > 4)
        throw std::domain_error("g_eval order must be in 0..4");
    const DensityModel& d = *ctx.density;
    const Kernel& K = *ctx.kernel;

    std::array<double, 5> p;
    for (int k = 0; k <= 4; ++k) p[k] = d.eval(ctx.t + u, k);

    if (order == 0) {
        // No division by f needed here.
        double s0 = ctx.w * std::pow(p[0], ctx.alpha);
        return std::pow(p[0], ctx.alpha + 1.0) * K(s0);
    }
    if (p[0] < 1e-12)
        throw std::domain_error("g_eval: density too small at t+u");

    const auto r = detail::power_derivs(p, ctx.alpha + 1.0);
    auto s = detail::power_derivs(p, ctx.alpha);
    for (double& v : s) v *= ctx.w;

    std::array<double, 5> Kd;
    for (int j = 0; j <= 4; ++j) Kd[j] = K.eval(s[0], j);

    switch (order) {
        case 1:
            return r[1] * Kd[0] + r[0] * s[1] * Kd[1];
        case 2:
            return r[2] * Kd[0] + (2.0 * r[1] * s[1] + r[0] * s[2]) * Kd[1] +
                   r[0] * s[1] * s[1] * Kd[2];
        case 3:
            return r[3] * Kd[0] +
                   (3.0 * r[2] * s[1] + 3.0 * r[1] * s[2] + r[0] * s[3]) * Kd[1] +
                   3.0 * (r[1] * s[1] * s[1] + r[0] * s[1] * s[2]) * Kd[2] +
                   r[0] * s[1] * s[1] * s[1] * Kd[3];
        default: {
            double s1 = s[1];
            return r[4] * Kd[0] +
                   (4.0 * r[3] * s1 + 6.0 * r[2] * s[2] + 4.0 * r[1] * s[3] +
                    r[0] * s[4]) * Kd[1] +
                   (6.0 * r[2] * s1 * s1 + 12.0 * r[1] * s1 * s[2] +
                    4.0 * r[0] * s1 * s[3] + 3.0 * r[0] * s[2] * s[2]) * Kd[2] +
                   (4.0 * r[1] * s1 * s1 * s1 + 6.0 * r[0] * s1 * s1 * s[2]) * Kd[3] +
                   r[0] * s1 * s1 * s1 * s1 * Kd[4];
        }
    }
}

/// Expected ideal estimator: integral of g_{t,w}(hw) over w in [-B,B].
inline double tilde_f(double t, double h, const DensityModel& d,
                      const Kernel& k, double B, double abstol = 1e-10) {
    if (!(h > 0.0) || !(B > 0.0))
        throw std::invalid_argument("tilde_f requires h > 0 and B > 0");
    auto integrand = [&](double w) {
        double ft = d.eval(t + h * w, 0);
        if (ft <= 0.0) return 0.0;
        double rt = std::sqrt(ft);
        return ft * rt * k(w * rt);
    };
    return adaptive_integrate(integrand, -B, B, abstol);
}

namespace detail {

// Integrate phi(w) over [-B,B], splitting at +-edge where the kernel
// argument w*f^alpha(t) crosses the support boundary.
template <class F>
double integrate_w(F&& phi, double B, double edge) {
    double total = 0.0;
    std::vector<double> cuts{-B};
    if (edge > 0.0 && edge < B) {
        cuts.push_back(-edge);
        cuts.push_back(edge);
    }
    cuts.push_back(B);
    for (std::size_t j = 1; j < cuts.size(); ++j)
        total += adaptive_integrate(phi, cuts[j - 1], cuts[j], 1e-12);
    return total;
}

}  // namespace detail

/// Integral of w^i g_{t,w}^(i)(0) dw over [-B,B]; vanishes for i=1,2,3
/// when B covers the kernel support scaled by f^{-1/2}(t).
inline double moment_cancellation(double t, const DensityModel& d,
                                  const Kernel& k, double B, int i,
                                  double alpha = 0.5) {
    if (i < 1 || i > 3)
        throw std::domain_error("moment_cancellation index must be 1..3");
    double ft = d.eval(t, 0);
    if (!(ft > 0.0))
        throw std::domain_error("moment_cancellation requires f(t) > 0");
    double edge = k.half_width() / std::pow(ft, alpha);
    auto phi = [&](double w) {
        GEvalContext ctx{t, w, &d, &k, alpha};
        return std::pow(w, i) * g_eval(ctx, 0.0, i);
    };
    return detail::integrate_w(phi, B, edge);
}

/// Fourth-order bias functional H(t,f,K) in closed form.
inline double H_eval(double t, const DensityModel& d, const Kernel& k) {
    double f = d.eval(t, 0);
    if (f <= 1e-12)
        throw std::domain_error("H_eval requires f(t) > 1e-12");
    double f1 = d.eval(t, 1), f2 = d.eval(t, 2), f3 = d.eval(t, 3),
           f4 = d.eval(t, 4);
    double mu4 = k.moment(4);
    double f1sq = f1 * f1;
    double bracket = f1sq * f1sq / std::pow(f, 5) -
                     1.5 * f1sq * f2 / std::pow(f, 4) +
                     (4.0 * f1 * f3 + 3.0 * f2 * f2) / (12.0 * f * f * f) -
                     f4 / (24.0 * f * f);
    return bracket * mu4;
}

/// Same functional from the quadrature route (1/24) * int w^4 g''''(0) dw.
inline double H_from_g(double t, const DensityModel& d, const Kernel& k) {
    double ft = d.eval(t, 0);
    double edge = k.half_width() / std::sqrt(ft);
    double B = edge + 1.0;
    auto phi = [&](double w) {
        GEvalContext ctx{t, w, &d, &k};
        double w2 = w * w;
        return w2 * w2 * g_eval(ctx, 0.0, 4);
    };
    return detail::integrate_w(phi, B, edge) / 24.0;
}

struct BiasRatioRow {
    double h = 0.0;
    double sup_dev = 0.0;   // sup over grid of |(tilde_f - f)/h^4 - H|
    double argmax_t = 0.0;
};

/// Deviation of (tilde - f)/h^4 from H over a grid, with a pluggable tilde
/// (tests substitute the exact identity f + h^4 H).
template <class TildeFn>
double sup_bias_dev(const DensityModel& d, const Kernel& k,
                    const std::vector<double>& grid, double h, TildeFn&& tilde,
                    double* argmax = nullptr) {
    double worst = 0.0, at = grid.empty() ? 0.0 : grid.front();
    for (double t : grid) {
        double dev = std::abs((tilde(t, h) - d.eval(t, 0)) / (h * h * h * h) -
                              H_eval(t, d, k));
        if (dev > worst) {
            worst = dev;
            at = t;
        }
    }
    if (argmax) *argmax = at;
    return worst;
}

/// Bias-law table over decreasing h: each row holds the sup deviation over
/// a D_r grid with at least min_points points.
inline std::vector<BiasRatioRow> bias_ratio_curve(
    const DensityModel& d, const Kernel& k, double r, double B,
    const std::vector<double>& h_list, int min_points = 400) {
    if (!(B >= k.half_width() / std::sqrt(r)))
        throw std::invalid_argument("bias_ratio_curve requires B >= T/sqrt(r)");
    for (std::size_t j = 1; j < h_list.size(); ++j)
        if (!(h_list[j] < h_list[j - 1]))
            throw std::invalid_argument("h_list must be decreasing");
    Region reg = region_oracle(d, r);
    double total_len = 0.0;
    for (const auto& iv : reg.intervals) total_len += iv.length();
    std::vector<BiasRatioRow> rows;
    for (double h : h_list) {
        double spacing = std::min({0.01, h / 4.0, total_len / (min_points + 1.0)});
        auto grid = region_grid(reg, spacing);
        BiasRatioRow row;
        row.h = h;
        row.sup_dev = sup_bias_dev(
            d, k, grid, h,
            [&](double t, double hh) { return tilde_f(t, hh, d, k, B); },
            &row.argmax_t);
        rows.push_back(row);
    }
    return rows;
}

}  // namespace vbkde
