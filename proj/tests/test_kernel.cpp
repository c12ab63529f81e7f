#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include <nlohmann/json.hpp>
#include <vbkde/config.hpp>
#include <vbkde/kernel.hpp>
#include <vbkde/rng.hpp>

using namespace vbkde;

TEST_CASE("quintic kernel point values") {
    const Kernel& k = Kernel::quintic();
    REQUIRE(kernel_eval(k, 0.0, 0) == 693.0 / 512.0);
    REQUIRE(kernel_eval(k, 1.0, 0) == 0.0);
    REQUIRE(kernel_eval(k, -1.0, 0) == 0.0);
    REQUIRE(kernel_eval(k, 1.5, 0) == 0.0);
    REQUIRE(kernel_eval(k, 0.0, 1) == 0.0);
    REQUIRE(kernel_eval(k, 0.0, 3) == 0.0);
    REQUIRE(k.half_width() == 1.0);
    REQUIRE(k.order4_smooth());
}

TEST_CASE("quintic kernel moments") {
    const Kernel& k = Kernel::quintic();
    REQUIRE(kernel_moment(k, 0) == Catch::Approx(1.0).margin(1e-12));
    // Beta-function cross-check:
    // int_0^1 x^4 (1-x^2)^5 dx = B(5/2,6)/2 = 256/45045, so mu4 = 1/65.
    double beta_route = (693.0 / 512.0) * 2.0 * (256.0 / 45045.0);
    REQUIRE(beta_route == Catch::Approx(1.0 / 65.0).margin(1e-16));
    REQUIRE(kernel_moment(k, 4) == Catch::Approx(1.0 / 65.0).margin(1e-12));
    for (int p : {1, 3, 5, 7})
        REQUIRE(std::abs(kernel_moment(k, p)) <= 1e-12);
    REQUIRE_THROWS_AS(kernel_moment(k, 9), std::domain_error);
}

TEST_CASE("quintic kernel total variation") {
    const Kernel& k = Kernel::quintic();
    // Unimodal: TV = 2 K(0) = 693/256.
    REQUIRE(kernel_tv(k) == Catch::Approx(693.0 / 256.0).margin(1e-9));
    // Independent grid oracle.
    const int n = 100000;
    double tv = 0.0, prev = 0.0;
    for (int i = 0; i <= n; ++i) {
        double x = -1.0 + 2.0 * i / n;
        double v = k(x);
        if (i > 0) tv += std::abs(v - prev);
        prev = v;
    }
    REQUIRE(kernel_tv(k) == Catch::Approx(tv).margin(1e-6));
}

TEST_CASE("kernel derivatives match finite differences at random points") {
    const Kernel& k = Kernel::quintic();
    const double step = 1e-5;
    int checked = 0;
    for (int i = 0; checked < 100 && i < 400; ++i) {
        double x = 2.0 * counter_uniform(2024, (std::uint64_t)i) - 1.0;
        if (1.0 - std::abs(x) < 1e-3) continue;  // stay off the boundary
        for (int ord = 1; ord <= 4; ++ord) {
            double fd = (k.eval(x + step, ord - 1) - k.eval(x - step, ord - 1)) /
                        (2.0 * step);
            double exact = k.eval(x, ord);
            double denom = std::abs(exact) + 1e-3 * k.sup_norms()[ord];
            REQUIRE(std::abs(fd - exact) / denom < 5e-6);
        }
        ++checked;
    }
    REQUIRE(checked == 100);
}

TEST_CASE("derivative order outside 0..4 is rejected") {
    const Kernel& k = Kernel::quintic();
    REQUIRE_THROWS_AS(k.eval(0.0, 5), std::domain_error);
    REQUIRE_THROWS_AS(k.eval(0.0, -1), std::domain_error);
}

TEST_CASE("custom kernel from JSON") {
    nlohmann::json j = {{"coefficients", {0.75, 0.0, -0.75}},
                        {"half_width", 1.0},
                        {"name", "parabolic"}};
    Kernel k = kernel_from_json(j);
    REQUIRE(k.name() == "parabolic");
    REQUIRE(k(0.0) == Catch::Approx(0.75));
    REQUIRE(k.moment(0) == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(k.moment(4) == Catch::Approx(3.0 / 35.0).margin(1e-12));
    // K'(+-1) = -+1.5, so the kernel is not C^4 across the boundary.
    REQUIRE_FALSE(k.order4_smooth());
    REQUIRE(k.total_variation() == Catch::Approx(1.5).margin(1e-9));
}

TEST_CASE("invalid kernels are rejected at construction") {
    // Mass 2, not 1.
    REQUIRE_THROWS_AS(Kernel({1.0}, 1.0), std::invalid_argument);
    // Asymmetric.
    REQUIRE_THROWS_AS(Kernel({0.5, 0.5}, 1.0), std::invalid_argument);
    // Negative lobe: x^2 - small constant scaled to mass 1.
    REQUIRE_THROWS_AS(Kernel({-0.15, 0.0, 1.95}, 1.0), std::invalid_argument);
    REQUIRE_THROWS_AS(Kernel({1.0}, -1.0), std::invalid_argument);
}
