#pragma once

// Compact-support polynomial kernels with closed-form derivatives and
// quadrature moments. The built-in kernel is the normalized quintic
// K(x) = (693/512)(1-x^2)^5 on [-1,1]; its zero of order five at the
// endpoints gives four continuous derivatives that vanish there.

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "quadrature.hpp"

namespace vbkde {

class Kernel {
public:
    /// Build from monomial coefficients of K on [-half_width, half_width];
    /// K is 0 outside. Validates unit mass, symmetry and nonnegativity.
    Kernel(std::vector<double> coefficients, double half_width,
           std::string name = "custom")
        : half_width_(half_width), name_(std::move(name)) {
        if (!(half_width > 0.0))
            throw std::invalid_argument("kernel half_width must be positive");
        deriv_coef_[0] = std::move(coefficients);
        for (int k = 1; k <= 4; ++k)
            deriv_coef_[k] = differentiate(deriv_coef_[k - 1]);
        validate();
    }

    static const Kernel& quintic() {
        static const Kernel k = make_quintic();
        return k;
    }

    double half_width() const { return half_width_; }
    const std::string& name() const { return name_; }
    bool order4_smooth() const { return order4_smooth_; }
    const std::array<double, 5>& sup_norms() const { return sup_norms_; }
    double tv_norm() const { return tv_norm_; }

    /// K^(order)(x), exactly 0 for |x| >= half_width.
    double eval(double x, int order) const {
        if (order < 0 || order > 4)
            throw std::domain_error("kernel derivative order must be in 0..4");
        if (std::abs(x) >= half_width_) return 0.0;
        return horner(deriv_coef_[order], x);
    }

    double operator()(double x) const {
        if (std::abs(x) >= half_width_) return 0.0;
        return horner(deriv_coef_[0], x);
    }

    /// p-th moment: integral of v^p K(v) dv on the support.
    /// Composite Gauss-Legendre, 64 nodes per panel, panels <= T/8.
    double moment(int p) const {
        if (p < 0 || p > 8)
            throw std::domain_error("kernel moment order must be in 0..8");
        auto f = [&](double v) { return std::pow(v, p) * (*this)(v); };
        return composite_gl(f, -half_width_, half_width_, half_width_ / 8.0, 64);
    }

    /// Total variation of K on the real line (exact between critical points).
    double total_variation() const { return tv_norm_; }

private:
    static Kernel make_quintic() {
        // (693/512)(1-x^2)^5 expanded in monomials.
        const double c = 693.0 / 512.0;
        // (1-x^2)^5 = 1 -5x^2 +10x^4 -10x^6 +5x^8 -x^10
        std::vector<double> coef(11, 0.0);
        coef[0] = c;
        coef[2] = -5 * c;
        coef[4] = 10 * c;
        coef[6] = -10 * c;
        coef[8] = 5 * c;
        coef[10] = -c;
        return Kernel(std::move(coef), 1.0, "quintic");
    }

    static double horner(const std::vector<double>& c, double x) {
        double v = 0.0;
        for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * x + *it;
        return v;
    }

    static std::vector<double> differentiate(const std::vector<double>& c) {
        if (c.size() <= 1) return {0.0};
        std::vector<double> d(c.size() - 1);
        for (std::size_t j = 1; j < c.size(); ++j) d[j - 1] = j * c[j];
        return d;
    }

    void validate() {
        const double T = half_width_;
        double mass = composite_gl([&](double x) { return (*this)(x); },
                                   -T, T, T / 8.0, 64);
        if (std::abs(mass - 1.0) > 1e-8)
            throw std::invalid_argument("kernel does not integrate to 1 (got " +
                                        std::to_string(mass) + ")");
        const int grid_n = 4096;
        for (int i = 0; i <= grid_n; ++i) {
            double x = -T + 2.0 * T * i / grid_n;
            if ((*this)(x) < -1e-12)
                throw std::invalid_argument("kernel is negative on its support");
            if (std::abs((*this)(x) - (*this)(-x)) > 1e-12)
                throw std::invalid_argument("kernel is not symmetric");
        }
        order4_smooth_ = true;
        for (int k = 0; k <= 4; ++k) {
            double at_edge = horner(deriv_coef_[k], T);
            if (std::abs(at_edge) > 1e-9) order4_smooth_ = false;
        }
        // Sup norms on a fine grid of the open support.
        for (int k = 0; k <= 4; ++k) {
            double m = 0.0;
            const int n = 100000;
            for (int i = 1; i < n; ++i) {
                double x = -T + 2.0 * T * i / n;
                m = std::max(m, std::abs(horner(deriv_coef_[k], x)));
            }
            sup_norms_[k] = m;
        }
        tv_norm_ = compute_tv();
    }

    // TV = sum of |K| swings between consecutive critical points of K',
    // located by sign-change scan plus bisection.
    double compute_tv() const {
        const double T = half_width_;
        std::vector<double> crit{-T};
        const int scan = 20000;
        double prev_x = -T;
        double prev_sign = 0.0;  // sign of the last nonzero K' sample
        for (int i = 1; i <= scan; ++i) {
            double x = -T + 2.0 * T * i / scan;
            double v = horner(deriv_coef_[1], x);
            if (v == 0.0) {
                crit.push_back(x);
            } else if (prev_sign != 0.0 && prev_sign * v < 0.0) {
                double a = prev_x, b = x;
                for (int it = 0; it < 80; ++it) {
                    double m = 0.5 * (a + b);
                    double fm = horner(deriv_coef_[1], m);
                    if (fm == 0.0 || (fm > 0.0) == (prev_sign > 0.0)) a = m;
                    else b = m;
                }
                crit.push_back(0.5 * (a + b));
            }
            if (v != 0.0) {
                prev_sign = v > 0.0 ? 1.0 : -1.0;
                prev_x = x;
            }
        }
        crit.push_back(T);
        double tv = 0.0;
        for (std::size_t j = 1; j < crit.size(); ++j)
            tv += std::abs((*this)(crit[j]) - (*this)(crit[j - 1]));
        // Jumps at the support boundary for kernels not vanishing there.
        tv += std::abs(horner(deriv_coef_[0], -T)) + std::abs(horner(deriv_coef_[0], T));
        // The scan above evaluates eval() which is 0 at +-T already; the two
        // boundary terms account for a discontinuous edge. For C^0 kernels
        // they are ~0 and harmless.
        return tv;
    }

    double half_width_;
    std::string name_;
    std::array<std::vector<double>, 5> deriv_coef_;
    std::array<double, 5> sup_norms_{};
    double tv_norm_ = 0.0;
    bool order4_smooth_ = false;
};

inline double kernel_eval(const Kernel& k, double x, int order) {
    return k.eval(x, order);
}

inline double kernel_moment(const Kernel& k, int p) { return k.moment(p); }

inline double kernel_tv(const Kernel& k) { return k.total_variation(); }

}  // namespace vbkde
