#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include <vbkde/quadrature.hpp>

using namespace vbkde;

TEST_CASE("Gauss-Legendre rule integrates high-degree polynomials exactly") {
    // Order-16 rule is exact through degree 31.
    auto f = [](double x) { return 31.0 * std::pow(x, 30); };
    double got = gl_integrate(f, -1.0, 1.0, 16);
    REQUIRE(got == Catch::Approx(2.0).margin(1e-12));

    auto g = [](double x) { return 5.0 * x * x * x * x; };
    REQUIRE(gl_integrate(g, 0.0, 1.0, 16) == Catch::Approx(1.0).margin(1e-14));
}

TEST_CASE("rule nodes are symmetric and weights sum to 2") {
    for (int n : {16, 64}) {
        const auto& r = gl_rule(n);
        double wsum = 0.0;
        for (int i = 0; i < n; ++i) {
            wsum += r.weights[i];
            REQUIRE(r.nodes[i] == Catch::Approx(-r.nodes[n - 1 - i]).margin(1e-14));
        }
        REQUIRE(wsum == Catch::Approx(2.0).margin(1e-13));
    }
}

TEST_CASE("composite rule handles smooth transcendental integrands") {
    double got = composite_gl([](double x) { return std::sin(x); }, 0.0, M_PI,
                              0.25, 64);
    REQUIRE(got == Catch::Approx(2.0).margin(1e-13));
}

TEST_CASE("adaptive quadrature reaches its absolute tolerance") {
    double got = adaptive_integrate([](double x) { return std::exp(x); }, 0.0,
                                    2.0, 1e-12);
    REQUIRE(got == Catch::Approx(std::exp(2.0) - 1.0).margin(1e-11));

    // Kink at zero still resolved by bisection.
    double kink = adaptive_integrate([](double x) { return std::abs(x); }, -1.0,
                                     1.0, 1e-10);
    REQUIRE(kink == Catch::Approx(1.0).margin(1e-9));

    // Narrow spike caught by the seeding panels.
    double spike = adaptive_integrate(
        [](double x) { return std::exp(-x * x * 1e4); }, -1.0, 1.0, 1e-12);
    REQUIRE(spike == Catch::Approx(std::sqrt(M_PI) / 100.0).margin(1e-10));
}

TEST_CASE("degenerate interval integrates to zero") {
    REQUIRE(adaptive_integrate([](double) { return 1.0; }, 1.0, 1.0) == 0.0);
    REQUIRE(composite_gl([](double) { return 1.0; }, 2.0, 1.0, 0.1) == 0.0);
}
