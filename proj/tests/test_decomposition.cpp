#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include <vbkde/bias_oracle.hpp>
#include <vbkde/decomposition.hpp>
#include <vbkde/density.hpp>
#include <vbkde/regions.hpp>

using namespace vbkde;

namespace {

const Kernel& K() { return Kernel::quintic(); }

Sample fixed_sample(std::vector<double> xs) {
    Sample s;
    s.observations = std::move(xs);
    s.density_name = "fixed";
    return s;
}

// Flat diagnostic density; discontinuous at the edges, used only at points
// whose kernel window stays interior.
class UniformDensity : public DensityModel {
public:
    UniformDensity(double a, double b) : a_(a), b_(b) {
        deriv_bound_ = 1.0 / (b - a);
        modulus_slope_ = 0.0;
    }
    double eval(double x, int order) const override {
        if (order > 0) return 0.0;
        return (x >= a_ && x <= b_) ? 1.0 / (b_ - a_) : 0.0;
    }
    double sample_one(std::uint64_t seed, std::uint64_t index) const override {
        return a_ + (b_ - a_) * counter_uniform(seed, index);
    }
    double cdf(double x) const override {
        if (x <= a_) return 0.0;
        if (x >= b_) return 1.0;
        return (x - a_) / (b_ - a_);
    }
    std::string name() const override { return "uniform"; }
    std::pair<double, double> support() const override { return {a_, b_}; }

private:
    double a_, b_;
};

}  // namespace

TEST_CASE("L and L1 definitions") {
    REQUIRE(L_fn(K(), 0.0) == K()(0.0));
    REQUIRE(L1_fn(K(), 0.0) == 0.0);
    // L(z) = d/dz [z K(z)] via central differences.
    const double step = 1e-6;
    for (double z : {-0.8, -0.2, 0.3, 0.9}) {
        double fd = ((z + step) * K()(z + step) - (z - step) * K()(z - step)) /
                    (2.0 * step);
        REQUIRE(std::abs(L_fn(K(), z) - fd) < 1e-6);
        REQUIRE(L1_fn(K(), z) == Catch::Approx(L_fn(K(), z) - K()(z)).margin(1e-15));
    }
}

TEST_CASE("expected pilot is exact on a uniform plateau") {
    UniformDensity d(-2.0, 2.0);
    Sample s = fixed_sample({0.0});
    BandwidthPair bw;
    bw.h1 = 0.5;
    bw.h2 = 0.5;
    DecompContext ctx(s, d, K(), bw, default_B(K(), 0.1), 0.1);
    // Interior points with margin > h1*T see a constant integrand.
    for (double t : {-1.0, 0.0, 0.7, 1.4})
        REQUIRE(expected_pilot(t, ctx) == Catch::Approx(0.25).margin(1e-10));
}

TEST_CASE("expected pilot obeys the classical second-order bias bound") {
    NormalDensity d;
    Sample s = fixed_sample({0.0});
    BandwidthPair bw;
    bw.h1 = 1e-3;
    bw.h2 = 0.5;
    DecompContext ctx(s, d, K(), bw, default_B(K(), 0.1), 0.1);
    double mu2 = K().moment(2);
    double sup_f2 = 3.0 * d.eval(0.0, 0);  // ||f''|| for the standard normal
    for (double t : {-1.3, 0.0, 0.4, 1.8}) {
        double err = std::abs(expected_pilot(t, ctx) - d.eval(t, 0));
        REQUIRE(err <= mu2 * sup_f2 * bw.h1 * bw.h1 + 1e-12);
    }
}

TEST_CASE("expected pilot matches a Monte Carlo mean") {
    NormalDensity d;
    Sample s = fixed_sample({0.0});
    BandwidthPair bw;
    bw.h1 = 0.25;
    bw.h2 = 0.5;
    DecompContext ctx(s, d, K(), bw, default_B(K(), 0.1), 0.1);
    const double t = 0.3;
    double expect = expected_pilot(t, ctx);
    const std::size_t n = 1000000;
    double sum = 0.0, sumsq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double term = K()((t - d.sample_one(55, i)) / bw.h1) / bw.h1;
        sum += term;
        sumsq += term * term;
    }
    double mean = sum / n;
    double se = std::sqrt((sumsq / n - mean * mean) / n);
    REQUIRE(std::abs(mean - expect) <= 3.0 * se);
}

TEST_CASE("D + b + f telescopes to the classical pilot estimate") {
    NormalDensity d;
    Sample s = draw_sample(d, 512, 21);
    BandwidthPair bw = schedule(512, 0.0);
    DecompContext ctx(s, d, K(), bw, default_B(K(), 0.1), 0.1);
    for (double t : {-1.0, -0.2, 0.3, 1.2}) {
        double lhs = dev_D(t, ctx) + bias_b(t, ctx) + d.eval(t, 0);
        double rhs = classical_kde_eval(s, bw.h1, K(), t);
        REQUIRE(std::abs(lhs - rhs) <= 1e-12);
    }
}

TEST_CASE("pilot deviation is centered over replications") {
    NormalDensity d;
    BandwidthPair bw = schedule(256, 0.0);
    const double t = 0.4;
    const int reps = 200;
    double sum = 0.0, sumsq = 0.0;
    for (int rep = 0; rep < reps; ++rep) {
        Sample s = draw_sample(d, 256, 1000 + (std::uint64_t)rep);
        DecompContext ctx(s, d, K(), bw, default_B(K(), 0.1), 0.1);
        double v = dev_D(t, ctx);
        sum += v;
        sumsq += v * v;
    }
    double mean = sum / reps;
    double se = std::sqrt((sumsq / reps - mean * mean) / reps);
    REQUIRE(std::abs(mean) <= 3.0 * se);
}

TEST_CASE("sup of pilot bias over the region obeys the classical bound") {
    for (const auto& name : panel_density_names()) {
        auto d = make_density(name);
        Sample s = fixed_sample({0.0});
        BandwidthPair bw = schedule(1024, 0.0);
        DecompContext ctx(s, *d, K(), bw, default_B(K(), 0.1), 0.1);
        double mu2 = K().moment(2);
        double bound = mu2 * d->deriv_bound() * bw.h1 * bw.h1;
        Region reg = region_oracle(*d, 0.1);
        for (double t : region_grid(reg, 0.05))
            REQUIRE(std::abs(bias_b(t, ctx)) <= bound + 1e-12);
    }
}

TEST_CASE("delta algebra") {
    NormalDensity d;
    Sample s = draw_sample(d, 512, 33);
    BandwidthPair bw = schedule(512, 0.0);
    DecompContext ctx(s, d, K(), bw, default_B(K(), 0.1), 0.1);
    for (double t : {-0.8, 0.1, 0.9}) {
        double f = d.eval(t, 0);
        double fhat = classical_kde_eval(s, bw.h1, K(), t);
        double expect = std::sqrt(fhat / f) - 1.0;
        REQUIRE(delta_eval(t, ctx) == Catch::Approx(expect).margin(1e-12));
        // Second algebraic form from the defining equation.
        double alt = (fhat - f) / ((std::sqrt(fhat) + std::sqrt(f)) * std::sqrt(f));
        REQUIRE(std::abs(delta_eval(t, ctx) - alt) <= 1e-12);
    }
    BumpDensity b;
    Sample sb = draw_sample(b, 64, 2);
    DecompContext bctx(sb, b, K(), bw, default_B(K(), 0.1), 0.1);
    REQUIRE_THROWS_AS(delta_eval(10.0, bctx), std::domain_error);
}

TEST_CASE("epsilon1: handcrafted two-point oracle") {
    NormalDensity d;
    Sample s = fixed_sample({-0.2, 0.5});
    BandwidthPair bw;
    bw.h1 = 0.3;
    bw.h2 = 0.5;
    const double B = default_B(K(), 0.1);
    DecompContext ctx(s, d, K(), bw, B, 0.1);
    std::vector<double> dev{0.01, -0.02};
    const double t = 0.2;
    double sum = 0.0;
    for (int i = 0; i < 2; ++i) {
        double x = s.observations[i];
        if (!(std::abs(t - x) < bw.h2 * B)) continue;
        double rf = std::sqrt(d.eval(x, 0));
        sum += L_fn(K(), (t - x) * rf / bw.h2) / rf * dev[(std::size_t)i];
    }
    double oracle = sum / (2.0 * bw.h2);
    REQUIRE(std::abs(epsilon1_eval(t, ctx, &dev) - oracle) <= 1e-15);

    // Linearity in the deviations; zero override gives zero.
    std::vector<double> dev2{0.02, -0.04};
    REQUIRE(epsilon1_eval(t, ctx, &dev2) ==
            Catch::Approx(2.0 * epsilon1_eval(t, ctx, &dev)).margin(1e-15));
    std::vector<double> zero{0.0, 0.0};
    REQUIRE(epsilon1_eval(t, ctx, &zero) == 0.0);
}

TEST_CASE("epsilon1 with cached deviations is finite and reproducible") {
    NormalDensity d;
    Sample s = draw_sample(d, 128, 5);
    BandwidthPair bw = schedule(128, 0.0);
    DecompContext ctx(s, d, K(), bw, default_B(K(), 0.1), 0.1);
    ctx.build_caches();
    double a = epsilon1_eval(0.3, ctx);
    double b = epsilon1_eval(0.3, ctx);
    REQUIRE(a == b);
    REQUIRE(std::isfinite(a));
}

TEST_CASE("T for a single observation matches a brute-force double Riemann sum") {
    NormalDensity d;
    Sample s = fixed_sample({0.1});
    BandwidthPair bw;
    bw.h1 = 0.4;
    bw.h2 = 0.5;
    const double B = default_B(K(), 0.1);
    DecompContext ctx(s, d, K(), bw, B, 0.1);
    const double t = 0.0;
    double got = T_eval(t, ctx);

    // Midpoint Riemann in x; the inner pilot expectation also by midpoint.
    const int nx = 2000, ny = 2000;
    double lo = t - bw.h2 * B, hi = t + bw.h2 * B;
    double sum = 0.0, dx = (hi - lo) / nx;
    for (int i = 0; i < nx; ++i) {
        double x = lo + (i + 0.5) * dx;
        double inner = 0.0, dy = 2.0 * K().half_width() / ny;
        for (int j = 0; j < ny; ++j) {
            double u = -K().half_width() + (j + 0.5) * dy;
            inner += K()(u) * d.eval(x - bw.h1 * u, 0) * dy;
        }
        double D = K()((x - 0.1) / bw.h1) / bw.h1 - inner;
        double rf = std::sqrt(d.eval(x, 0));
        sum += 0.5 * rf * D * L_fn(K(), (t - x) * rf / bw.h2) * dx;
    }
    double brute = sum / bw.h2;
    REQUIRE(std::abs(got - brute) <= 1e-6);
}

TEST_CASE("T is invariant under duplicating the sample") {
    NormalDensity d;
    Sample s = fixed_sample({-0.4, 0.2, 0.9});
    Sample dup = fixed_sample({-0.4, 0.2, 0.9, -0.4, 0.2, 0.9});
    BandwidthPair bw;
    bw.h1 = 0.35;
    bw.h2 = 0.5;
    const double B = default_B(K(), 0.1);
    DecompContext a(s, d, K(), bw, B, 0.1), b(dup, d, K(), bw, B, 0.1);
    for (double t : {-0.2, 0.3})
        REQUIRE(T_eval(t, a) == Catch::Approx(T_eval(t, b)).margin(1e-12));
}

TEST_CASE("degenerate plug-in: exact pilot gives zero gap without T") {
    NormalDensity d;
    Sample s = draw_sample(d, 256, 8);
    BandwidthPair bw = schedule(256, 0.0);
    const double B = default_B(K(), 0.1);
    // With the pilot forced equal to f, the two-stage estimator equals the
    // ideal one exactly, and the centered integrand of T is identically 0.
    std::vector<double> fvals(s.n());
    for (std::size_t i = 0; i < s.n(); ++i)
        fvals[i] = d.eval(s.observations[i], 0);
    for (double t : {-1.0, 0.0, 0.8}) {
        double tru = true_estimator_eval_with_pilot(s, fvals, bw, B, K(), t);
        double ideal = hhm_ideal_eval(s, d, bw, B, K(), t);
        REQUIRE(tru == ideal);
        double Tzero = composite_gl([](double) { return 0.0; }, t - bw.h2 * B,
                                    t + bw.h2 * B, bw.h1 / 2.0, 16) / bw.h2;
        REQUIRE(Tzero == 0.0);
    }
}

TEST_CASE("linearization gap is permutation invariant and shrinks the residual") {
    NormalDensity d;
    Sample s = draw_sample(d, 256, 14);
    BandwidthPair bw = schedule(256, 0.0);
    const double B = default_B(K(), 0.1);
    Region reg = region_oracle(d, 0.1);
    auto grid = region_grid(reg, 0.2);

    DecompContext ctx(s, d, K(), bw, B, 0.1);
    ctx.build_caches();
    double gap = linearization_gap(ctx, grid);

    Sample sp = s;
    std::reverse(sp.observations.begin(), sp.observations.end());
    DecompContext ctxp(sp, d, K(), bw, B, 0.1);
    ctxp.build_caches();
    REQUIRE(linearization_gap(ctxp, grid) == Catch::Approx(gap).margin(1e-12));

    // T explains most of true - ideal: the gap is smaller than the raw
    // difference it linearizes.
    auto pilots = pilot_at_points(s, bw.h1, K());
    double raw = 0.0;
    for (double t : grid)
        raw = std::max(raw, std::abs(
            true_estimator_eval_with_pilot(s, pilots, bw, B, K(), t) -
            hhm_ideal_eval(s, d, bw, B, K(), t)));
    REQUIRE(gap < raw);
}

TEST_CASE("DecompContext validates the truncation constant") {
    NormalDensity d;
    Sample s = fixed_sample({0.0});
    BandwidthPair bw;
    bw.h1 = 0.3;
    bw.h2 = 0.5;
    REQUIRE_THROWS_AS(DecompContext(s, d, K(), bw, 1.0, 0.1),
                      std::invalid_argument);
}
