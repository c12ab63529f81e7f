#pragma once

// Analytic test densities with closed-form derivatives f..f'''' and exact
// counter-based samplers, plus certification against smoothness classes
// (uniform derivative bound C, modulus z for the fourth derivative).

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "quadrature.hpp"
#include "rng.hpp"

namespace vbkde {

class DensityModel {
public:
    virtual ~DensityModel() = default;

    /// f^(order)(x) for order 0..4.
    virtual double eval(double x, int order) const = 0;
    /// Draw `index`-th observation of the stream keyed by `seed`.
    virtual double sample_one(std::uint64_t seed, std::uint64_t index) const = 0;
    virtual double cdf(double x) const = 0;
    virtual std::string name() const = 0;
    /// Interval outside which f is (numerically) zero; used for scans.
    virtual std::pair<double, double> support() const = 0;

    /// Documented uniform bound for |f^(k)|, k=0..4.
    double deriv_bound() const { return deriv_bound_; }
    /// Slope L of the documented modulus z(d) = L*d for f''''.
    double modulus_slope() const { return modulus_slope_; }
    double modulus(double delta) const { return modulus_slope_ * delta; }

protected:
    double deriv_bound_ = 0.0;
    double modulus_slope_ = 0.0;
};

inline double density_eval(const DensityModel& d, double x, int order) {
    if (order < 0 || order > 4)
        throw std::domain_error("density derivative order must be in 0..4");
    return d.eval(x, order);
}

namespace detail {

// Probabilists' Hermite polynomials He_0..He_4.
inline double hermite(int k, double z) {
    switch (k) {
        case 0: return 1.0;
        case 1: return z;
        case 2: return z * z - 1.0;
        case 3: return z * (z * z - 3.0);
        case 4: return (z * z - 6.0) * z * z + 3.0;
        default: throw std::domain_error("hermite order out of range");
    }
}

inline double std_normal_pdf(double z) {
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
}

}  // namespace detail

class NormalDensity : public DensityModel {
public:
    NormalDensity(double mean = 0.0, double sd = 1.0, std::string name = "normal")
        : mean_(mean), sd_(sd), name_(std::move(name)) {
        // |f^(k)| <= max_z |He_k(z) phi(z)| / sd^(k+1); for sd=1 the max over
        // k=0..4 is ||f''''||_inf = 3 phi(0) ~= 1.19683.
        deriv_bound_ = 1.25 / std::pow(sd_, 5);
        modulus_slope_ = 2.4 / std::pow(sd_, 6);
    }

    double eval(double x, int order) const override {
        double z = (x - mean_) / sd_;
        double sign = (order % 2 == 0) ? 1.0 : -1.0;
        return sign * detail::hermite(order, z) * detail::std_normal_pdf(z) /
               std::pow(sd_, order + 1);
    }

    double sample_one(std::uint64_t seed, std::uint64_t index) const override {
        return mean_ + sd_ * counter_normal(seed, index);
    }

    double cdf(double x) const override {
        return 0.5 * std::erfc(-(x - mean_) / (sd_ * std::sqrt(2.0)));
    }

    std::string name() const override { return name_; }
    std::pair<double, double> support() const override {
        return {mean_ - 12.0 * sd_, mean_ + 12.0 * sd_};
    }

    double mean() const { return mean_; }
    double sd() const { return sd_; }

private:
    double mean_, sd_;
    std::string name_;
};

/// Finite normal mixture; component choice and component draw both come
/// from the counter stream so sampling stays index-addressable.
class NormalMixtureDensity : public DensityModel {
public:
    NormalMixtureDensity(std::vector<double> weights, std::vector<double> means,
                         std::vector<double> sds, std::string name = "mixture")
        : w_(std::move(weights)), mu_(std::move(means)), sd_(std::move(sds)),
          name_(std::move(name)) {
        if (w_.size() != mu_.size() || w_.size() != sd_.size() || w_.empty())
            throw std::invalid_argument("mixture parameter arrays must match");
        double tot = 0.0;
        for (double w : w_) {
            if (w < 0.0) throw std::invalid_argument("mixture weights must be >= 0");
            tot += w;
        }
        if (std::abs(tot - 1.0) > 1e-12)
            throw std::invalid_argument("mixture weights must sum to 1");
        for (double s : sd_)
            if (!(s > 0.0)) throw std::invalid_argument("mixture sds must be > 0");
        // Documented bounds for the default panel mixture; recomputed on a
        // grid for custom parameters.
        double db = 0.0, ms = 0.0;
        for (std::size_t c = 0; c < w_.size(); ++c) {
            db += w_[c] * 1.25 / std::pow(sd_[c], 5);
            ms += w_[c] * 2.4 / std::pow(sd_[c], 6);
        }
        deriv_bound_ = db;
        modulus_slope_ = ms;
    }

    double eval(double x, int order) const override {
        double v = 0.0;
        double sign = (order % 2 == 0) ? 1.0 : -1.0;
        for (std::size_t c = 0; c < w_.size(); ++c) {
            double z = (x - mu_[c]) / sd_[c];
            v += w_[c] * sign * detail::hermite(order, z) *
                 detail::std_normal_pdf(z) / std::pow(sd_[c], order + 1);
        }
        return v;
    }

    double sample_one(std::uint64_t seed, std::uint64_t index) const override {
        double u = counter_uniform(seed, 3 * index);
        std::size_t c = 0;
        double acc = w_[0];
        while (c + 1 < w_.size() && u > acc) acc += w_[++c];
        double u1 = counter_uniform(seed, 3 * index + 1);
        double u2 = counter_uniform(seed, 3 * index + 2);
        double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
        return mu_[c] + sd_[c] * z;
    }

    double cdf(double x) const override {
        double v = 0.0;
        for (std::size_t c = 0; c < w_.size(); ++c)
            v += w_[c] * 0.5 * std::erfc(-(x - mu_[c]) / (sd_[c] * std::sqrt(2.0)));
        return v;
    }

    std::string name() const override { return name_; }
    std::pair<double, double> support() const override {
        double lo = mu_[0], hi = mu_[0];
        for (std::size_t c = 0; c < w_.size(); ++c) {
            lo = std::min(lo, mu_[c] - 12.0 * sd_[c]);
            hi = std::max(hi, mu_[c] + 12.0 * sd_[c]);
        }
        return {lo, hi};
    }

private:
    std::vector<double> w_, mu_, sd_;
    std::string name_;
};

/// Compactly supported bump c(1-(x/s)^2)^7 on [-s,s]; C^6 across the
/// boundary, so well inside the C^4 class.
class BumpDensity : public DensityModel {
public:
    explicit BumpDensity(double scale = 3.0, std::string name = "bump")
        : scale_(scale), name_(std::move(name)) {
        // Normalizer: integral of (1-y^2)^7 on [-1,1] is 2^15 (7!)^2 / 15!.
        norm_ = 1.0 / (scale_ * 32768.0 * 25401600.0 / 1307674368000.0);
        // Grid maxima of |f^(k)|, k<=4, are <= 3.26 for scale 3; the fifth
        // derivative bound 7.25 dominates the modulus.
        double s3 = 3.0 / scale_;
        deriv_bound_ = 3.3 * std::pow(s3, 5);
        modulus_slope_ = 7.5 * std::pow(s3, 6);
    }

    double eval(double x, int order) const override {
        double y = x / scale_;
        if (std::abs(y) >= 1.0) return 0.0;
        // The factored form keeps f >= 0 near the support edge, where the
        // expanded monomial sum cancels catastrophically.
        if (order == 0) {
            double b = (1.0 - y) * (1.0 + y);
            return norm_ * b * b * b * b * b * b * b;
        }
        // Derivatives of (1-y^2)^7 via the closed recursion on coefficients.
        static const std::vector<double> base = bump_coefficients();
        std::vector<double> c = base;
        for (int k = 0; k < order; ++k) {
            std::vector<double> d(c.size() - 1, 0.0);
            for (std::size_t j = 1; j < c.size(); ++j) d[j - 1] = j * c[j];
            c = std::move(d);
        }
        double v = 0.0;
        for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * y + *it;
        return norm_ * v / std::pow(scale_, order);
    }

    double sample_one(std::uint64_t seed, std::uint64_t index) const override {
        // Rejection from the uniform envelope of height f(0); the attempt
        // counter is folded into the stream position so determinism
        // survives any number of rejections.
        const double fmax = eval(0.0, 0);
        for (std::uint64_t attempt = 0; attempt < 4096; ++attempt) {
            std::uint64_t c = index * 8192 + attempt * 2;
            double x = scale_ * (2.0 * counter_uniform(seed, c) - 1.0);
            double u = counter_uniform(seed, c + 1);
            if (u * fmax <= eval(x, 0)) return x;
        }
        throw std::runtime_error("bump sampler rejection cap exceeded");
    }

    double cdf(double x) const override {
        if (x <= -scale_) return 0.0;
        if (x >= scale_) return 1.0;
        return adaptive_integrate([&](double t) { return eval(t, 0); },
                                  -scale_, x, 1e-12);
    }

    std::string name() const override { return name_; }
    std::pair<double, double> support() const override { return {-scale_, scale_}; }

private:
    static std::vector<double> bump_coefficients() {
        // (1-y^2)^7 expanded in monomials of y.
        std::vector<double> c{1.0};
        for (int rep = 0; rep < 7; ++rep) {
            std::vector<double> d(c.size() + 2, 0.0);
            for (std::size_t j = 0; j < c.size(); ++j) {
                d[j] += c[j];
                d[j + 2] -= c[j];
            }
            c = std::move(d);
        }
        return c;
    }

    double scale_;
    double norm_;
    std::string name_;
};

/// Built-in panel used throughout the test harness.
inline std::shared_ptr<const DensityModel> make_density(const std::string& name) {
    if (name == "normal")
        return std::make_shared<NormalDensity>();
    if (name == "mixture")
        return std::make_shared<NormalMixtureDensity>(
            std::vector<double>{0.5, 0.5}, std::vector<double>{-1.0, 1.0},
            std::vector<double>{0.5, 0.75});
    if (name == "bump")
        return std::make_shared<BumpDensity>();
    throw std::invalid_argument("unknown density: " + name);
}

inline std::vector<std::string> panel_density_names() {
    return {"normal", "mixture", "bump"};
}

struct Sample {
    std::vector<double> observations;
    std::uint64_t seed = 0;
    std::string density_name;

    std::size_t n() const { return observations.size(); }
};

inline Sample draw_sample(const DensityModel& d, std::size_t n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("sample size must be >= 1");
    Sample s;
    s.seed = seed;
    s.density_name = d.name();
    s.observations.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        s.observations[i] = d.sample_one(seed, i);
    return s;
}

struct CertifyResult {
    bool ok = true;
    double violating_t = 0.0;
    double violating_u = 0.0;
    int violating_order = -1;

    explicit operator bool() const { return ok; }
};

/// Check f against the class with derivative bound C and modulus z:
/// grid-validated |f^(k)| <= C for k=0..4 and |f''''(t+u)-f''''(t)| <= z(|u|).
inline CertifyResult certify_class(const DensityModel& d, double C,
                                   const std::function<double(double)>& z) {
    if (!(C > 0.0)) throw std::invalid_argument("certify_class: C must be > 0");
    CertifyResult res;
    auto [lo, hi] = d.support();
    lo = std::max(lo, -10.0);
    hi = std::min(hi, 10.0);
    const int n = 20000;
    for (int i = 0; i <= n; ++i) {
        double t = lo + (hi - lo) * i / n;
        for (int k = 0; k <= 4; ++k) {
            if (std::abs(d.eval(t, k)) > C + 1e-9) {
                res.ok = false;
                res.violating_t = t;
                res.violating_order = k;
                return res;
            }
        }
    }
    const int nt = 400, nu = 100;
    for (int i = 0; i <= nt; ++i) {
        double t = lo + (hi - lo) * i / nt;
        double f4t = d.eval(t, 4);
        for (int j = 1; j <= nu; ++j) {
            double u = j * 0.01;
            for (double su : {u, -u}) {
                if (std::abs(d.eval(t + su, 4) - f4t) > z(u) + 1e-9) {
                    res.ok = false;
                    res.violating_t = t;
                    res.violating_u = su;
                    res.violating_order = 4;
                    return res;
                }
            }
        }
    }
    return res;
}

inline CertifyResult certify_class(const DensityModel& d) {
    double L = d.modulus_slope();
    return certify_class(d, d.deriv_bound(), [L](double u) { return L * u; });
}

}  // namespace vbkde
