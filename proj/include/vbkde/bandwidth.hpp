#pragma once

// Bandwidth schedules: pilot h1 = n^(-(2+eta)/9) (undersmoothed) and main
// h2 = ((log n)/n)^(1/9).

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace vbkde {

struct BandwidthPair {
    double h1 = 0.0;          // pilot bandwidth
    double h2 = 0.0;          // main bandwidth
    std::size_t n = 0;
    double eta = 0.0;         // extra undersmoothing exponent offset
    std::string rule_tag = "default";
};

inline double pilot_bandwidth(std::size_t n, double eta) {
    return std::pow((double)n, -(2.0 + eta) / 9.0);
}

inline double main_bandwidth(std::size_t n) {
    return std::pow(std::log((double)n) / (double)n, 1.0 / 9.0);
}

/// Sampled check of the classical bandwidth conditions along n..2n:
/// h decreasing and nh/|log h| increasing.
inline bool schedule_valid(std::size_t n, double eta) {
    auto cond = [](double m, double h) { return m * h / std::abs(std::log(h)); };
    double prev_h1 = pilot_bandwidth(n, eta), prev_h2 = main_bandwidth(n);
    double prev_c1 = cond((double)n, prev_h1), prev_c2 = cond((double)n, prev_h2);
    for (int step = 1; step <= 16; ++step) {
        double m = n + (double)n * step / 16.0;
        double h1 = std::pow(m, -(2.0 + eta) / 9.0);
        double h2 = std::pow(std::log(m) / m, 1.0 / 9.0);
        if (!(h1 < prev_h1) || !(h2 < prev_h2)) return false;
        double c1 = cond(m, h1), c2 = cond(m, h2);
        if (!(c1 > prev_c1) || !(c2 > prev_c2)) return false;
        prev_h1 = h1; prev_h2 = h2; prev_c1 = c1; prev_c2 = c2;
    }
    return true;
}

inline BandwidthPair schedule(std::size_t n, double eta = 0.0) {
    if (n < 3)
        throw std::invalid_argument("schedule requires n >= 3");
    if (eta < 0.0 || eta >= 1.0)
        throw std::invalid_argument("schedule requires 0 <= eta < 1");
    if (!schedule_valid(n, eta))
        throw std::runtime_error("bandwidth conditions violated on n..2n");
    BandwidthPair bw;
    bw.n = n;
    bw.eta = eta;
    bw.h1 = pilot_bandwidth(n, eta);
    bw.h2 = main_bandwidth(n);
    return bw;
}

}  // namespace vbkde
