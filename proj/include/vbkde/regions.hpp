#pragma once

// Superlevel-set regions: the oracle region {f > r, |t| < 1/r}, the
// data-driven region {pilot > 2r, |t| < 1/r}, epsilon-inflation and grid
// generation. Level sets are found by sign-change scan plus bisection, so
// multimodal densities work unchanged.

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "bandwidth.hpp"
#include "density.hpp"
#include "estimators.hpp"

namespace vbkde {

struct Interval {
    double lo = 0.0, hi = 0.0;
    double length() const { return hi - lo; }
};

struct Region {
    std::vector<Interval> intervals;  // disjoint, sorted
    double r = 0.0;
    std::string source = "oracle";    // "oracle" or "data_driven"
    double grid_spacing = 0.01;       // default spacing for region_grid users

    bool empty() const { return intervals.empty(); }
    bool contains(double t) const {
        for (const auto& iv : intervals)
            if (t > iv.lo && t < iv.hi) return true;
        return false;
    }
    /// True when every interval of this region lies inside `other`.
    bool subset_of(const Region& other, double slack = 1e-9) const {
        for (const auto& iv : intervals) {
            bool covered = false;
            for (const auto& ov : other.intervals)
                if (iv.lo >= ov.lo - slack && iv.hi <= ov.hi + slack) {
                    covered = true;
                    break;
                }
            if (!covered) return false;
        }
        return true;
    }
};

/// {g > level} intersected with (-bound, bound), by scan and bisection.
inline std::vector<Interval> superlevel_set(
    const std::function<double(double)>& g, double level, double bound,
    double scan_spacing = 1e-3) {
    std::vector<Interval> out;
    const long steps = (long)std::ceil(2.0 * bound / scan_spacing);
    auto refine = [&](double a, double b, bool rising) {
        // rising: g-level goes from <=0 to >0 over [a,b]
        for (int it = 0; it < 60; ++it) {
            double m = 0.5 * (a + b);
            bool pos = g(m) > level;
            if (pos == rising) b = m; else a = m;
        }
        return 0.5 * (a + b);
    };
    double prev_t = -bound;
    bool prev_in = g(prev_t) > level;
    double open_at = prev_in ? -bound : 0.0;
    bool open = prev_in;
    for (long i = 1; i <= steps; ++i) {
        double t = std::min(-bound + i * scan_spacing, bound);
        bool in = g(t) > level;
        if (in && !open) {
            open_at = refine(prev_t, t, true);
            open = true;
        } else if (!in && open) {
            out.push_back({open_at, refine(prev_t, t, false)});
            open = false;
        }
        prev_t = t;
    }
    if (open) out.push_back({open_at, bound});
    return out;
}

inline Region region_oracle(const DensityModel& d, double r) {
    if (!(r > 0.0)) throw std::invalid_argument("region parameter r must be > 0");
    Region reg;
    reg.r = r;
    reg.source = "oracle";
    reg.intervals =
        superlevel_set([&](double t) { return d.eval(t, 0); }, r, 1.0 / r);
    return reg;
}

inline Region region_data(const Sample& s, const BandwidthPair& bw,
                          const Kernel& k, double r) {
    if (!(r > 0.0)) throw std::invalid_argument("region parameter r must be > 0");
    SortedSample ss(s);
    Region reg;
    reg.r = r;
    reg.source = "data_driven";
    reg.intervals = superlevel_set(
        [&](double t) { return classical_kde_fast(ss, bw.h1, k, t); }, 2.0 * r,
        1.0 / r);
    return reg;
}

/// Data-driven region with an arbitrary pilot function (test hook).
inline Region region_data_with(const std::function<double(double)>& pilot,
                               double r) {
    Region reg;
    reg.r = r;
    reg.source = "data_driven";
    reg.intervals = superlevel_set(pilot, 2.0 * r, 1.0 / r);
    return reg;
}

/// Uniform grid restricted to the region's intervals, endpoints excluded.
inline std::vector<double> region_grid(const Region& reg, double spacing) {
    if (!(spacing > 0.0)) throw std::invalid_argument("grid spacing must be > 0");
    std::vector<double> grid;
    for (const auto& iv : reg.intervals) {
        for (long j = 1;; ++j) {
            double t = iv.lo + j * spacing;
            if (!(t < iv.hi)) break;
            grid.push_back(t);
        }
    }
    return grid;
}

/// Epsilon-inflation of the region; valid only while f > r/2 on the result.
/// Default epsilon is half the distance to the r/2 level set.
inline Region inflate_region(const Region& reg, const DensityModel& d,
                             double epsilon = -1.0) {
    if (epsilon < 0.0) {
        // Distance from the region boundary to the r/2 superlevel boundary.
        Region half = region_oracle(d, reg.r / 2.0);
        double dist = 1e300;
        for (const auto& iv : reg.intervals) {
            for (const auto& hv : half.intervals) {
                if (iv.lo >= hv.lo && iv.hi <= hv.hi) {
                    dist = std::min(dist, iv.lo - hv.lo);
                    dist = std::min(dist, hv.hi - iv.hi);
                }
            }
        }
        epsilon = (dist < 1e300) ? 0.5 * dist : 0.0;
    }
    Region out = reg;
    for (auto& iv : out.intervals) {
        iv.lo -= epsilon;
        iv.hi += epsilon;
    }
    // Merge overlaps created by the inflation.
    std::vector<Interval> merged;
    for (const auto& iv : out.intervals) {
        if (!merged.empty() && iv.lo <= merged.back().hi)
            merged.back().hi = std::max(merged.back().hi, iv.hi);
        else
            merged.push_back(iv);
    }
    out.intervals = std::move(merged);
    for (const auto& iv : out.intervals) {
        const int probes = 200;
        for (int i = 0; i <= probes; ++i) {
            double t = iv.lo + iv.length() * i / probes;
            if (!(d.eval(t, 0) > reg.r / 2.0))
                throw std::runtime_error("inflated region leaves {f > r/2}");
        }
    }
    return out;
}

}  // namespace vbkde
