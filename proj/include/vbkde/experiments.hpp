#pragma once

// Monte Carlo harness: replicated sup-norm errors over oracle or
// data-driven regions, per-n medians, variance-rate scaling, and the
// log-log rate regression.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "bandwidth.hpp"
#include "bias_oracle.hpp"
#include "density.hpp"
#include "estimators.hpp"
#include "io.hpp"
#include "kernel.hpp"
#include "regions.hpp"
#include "rng.hpp"

namespace vbkde {

struct ExperimentConfig {
    std::string density_name = "normal";
    std::string estimator_tag = "true_twostage";
    std::vector<std::size_t> n_list;
    int replications = 1;
    std::uint64_t base_seed = 0;
    double r = 0.1;
    double eta = 0.0;
    double B = -1.0;             // < 0 means "auto" = T/sqrt(r)
    double grid_spacing = 0.01;
    std::string region_mode = "oracle";  // or "data_driven"
    std::string kernel_name = "quintic";

    void validate() const {
        if (n_list.empty()) throw std::invalid_argument("n_list is empty");
        for (std::size_t j = 0; j < n_list.size(); ++j) {
            if (n_list[j] < 8) throw std::invalid_argument("each n must be >= 8");
            if (j > 0 && n_list[j] <= n_list[j - 1])
                throw std::invalid_argument("n_list must be strictly increasing");
        }
        if (replications < 1)
            throw std::invalid_argument("replications must be >= 1");
        if (region_mode != "oracle" && region_mode != "data_driven")
            throw std::invalid_argument("region_mode must be oracle|data_driven");
        if (!(r > 0.0)) throw std::invalid_argument("r must be > 0");
        if (!(grid_spacing > 0.0))
            throw std::invalid_argument("grid_spacing must be > 0");
    }

    static ExperimentConfig from_json(const nlohmann::json& j) {
        ExperimentConfig c;
        c.density_name = j.value("density_name", c.density_name);
        c.estimator_tag = j.value("estimator_tag", c.estimator_tag);
        c.n_list = j.at("n_list").get<std::vector<std::size_t>>();
        c.replications = j.value("replications", c.replications);
        c.base_seed = j.value("base_seed", c.base_seed);
        c.r = j.value("r", c.r);
        c.eta = j.value("eta", c.eta);
        if (j.contains("B") && !j["B"].is_string()) c.B = j["B"].get<double>();
        c.grid_spacing = j.value("grid_spacing", c.grid_spacing);
        c.region_mode = j.value("region_mode", c.region_mode);
        c.kernel_name = j.value("kernel_name", c.kernel_name);
        c.validate();
        return c;
    }
};

struct RepRecord {
    std::size_t n = 0;
    int rep = 0;
    std::uint64_t seed = 0;
    double sup_err_classical = 0.0;
    double sup_err_ideal = 0.0;
    double sup_err_true = 0.0;
    double sup_dev_variance = 0.0;  // sup over grid |ideal - tilde_f|
    double sup_bias = 0.0;          // sup over grid |tilde_f - f|
};

/// Max absolute estimation error of a curve whose grid lies in the region.
inline double sup_error(const EstimateCurve& curve, const DensityModel& d,
                        const Region& reg) {
    if (curve.grid.empty()) throw std::invalid_argument("empty curve grid");
    double worst = 0.0;
    for (std::size_t j = 0; j < curve.grid.size(); ++j) {
        if (!reg.contains(curve.grid[j]))
            throw std::invalid_argument("curve grid escapes the region");
        worst = std::max(worst, std::abs(curve.values[j] -
                                         d.eval(curve.grid[j], 0)));
    }
    return worst;
}

namespace detail {

inline double median(std::vector<double> v) {
    if (v.empty()) throw std::invalid_argument("median of empty set");
    std::sort(v.begin(), v.end());
    std::size_t m = v.size() / 2;
    return (v.size() % 2 == 1) ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace detail

/// One replication; deterministic in (base_seed, n, rep_index). When
/// `tilde_on_grid` is supplied it must match tilde_f on the oracle grid.
inline RepRecord run_replication(const ExperimentConfig& cfg,
                                 const DensityModel& d, const Kernel& k,
                                 std::size_t n, int rep_index,
                                 const std::vector<double>* oracle_grid = nullptr,
                                 const std::vector<double>* tilde_on_grid = nullptr) {
    RepRecord rec;
    rec.n = n;
    rec.rep = rep_index;
    rec.seed = hash_seed(cfg.base_seed, n, (std::uint64_t)rep_index);
    Sample s = draw_sample(d, n, rec.seed);
    BandwidthPair bw = schedule(n, cfg.eta);
    double B = cfg.B > 0.0 ? cfg.B : default_B(k, cfg.r);

    std::vector<double> grid;
    Region reg;
    if (cfg.region_mode == "data_driven") {
        reg = region_data(s, bw, k, cfg.r);
        grid = region_grid(reg, cfg.grid_spacing);
    } else if (oracle_grid) {
        grid = *oracle_grid;
        reg = region_oracle(d, cfg.r);
    } else {
        reg = region_oracle(d, cfg.r);
        grid = region_grid(reg, cfg.grid_spacing);
    }
    if (grid.empty()) {
        // A replication whose data-driven region is empty carries zero sup.
        return rec;
    }

    auto classical = evaluate_curve(EstimatorTag::classical, s, &d, k, bw, B, grid);
    auto ideal = evaluate_curve(EstimatorTag::hhm_ideal, s, &d, k, bw, B, grid);
    auto tru = evaluate_curve(EstimatorTag::true_twostage, s, &d, k, bw, B, grid);

    rec.sup_err_classical = sup_error(classical, d, reg);
    rec.sup_err_ideal = sup_error(ideal, d, reg);
    rec.sup_err_true = sup_error(tru, d, reg);

    for (std::size_t j = 0; j < grid.size(); ++j) {
        double tv = tilde_on_grid ? (*tilde_on_grid)[j]
                                  : tilde_f(grid[j], bw.h2, d, k, B);
        rec.sup_dev_variance =
            std::max(rec.sup_dev_variance, std::abs(ideal.values[j] - tv));
        rec.sup_bias = std::max(rec.sup_bias, std::abs(tv - d.eval(grid[j], 0)));
    }
    return rec;
}

/// Full experiment: all (n, rep) jobs, any worker count, deterministic
/// order-insensitive aggregation (records sorted by (n, rep)).
inline std::vector<RepRecord> run_experiment(const ExperimentConfig& cfg,
                                             int jobs = 1) {
    cfg.validate();
    auto d = make_density(cfg.density_name);
    const Kernel& k = cfg.kernel_name == "quintic"
                          ? Kernel::quintic()
                          : throw std::invalid_argument("unknown kernel");
    double B = cfg.B > 0.0 ? cfg.B : default_B(k, cfg.r);

    // Oracle grids and tilde curves are shared across replications.
    std::vector<std::vector<double>> grids(cfg.n_list.size());
    std::vector<std::vector<double>> tildes(cfg.n_list.size());
    if (cfg.region_mode == "oracle") {
        Region reg = region_oracle(*d, cfg.r);
        auto grid = region_grid(reg, cfg.grid_spacing);
        for (std::size_t ni = 0; ni < cfg.n_list.size(); ++ni) {
            grids[ni] = grid;
            double h2 = main_bandwidth(cfg.n_list[ni]);
            tildes[ni].resize(grid.size());
            for (std::size_t j = 0; j < grid.size(); ++j)
                tildes[ni][j] = tilde_f(grid[j], h2, *d, k, B);
        }
    }

    struct Job { std::size_t ni; int rep; };
    std::vector<Job> all;
    for (std::size_t ni = 0; ni < cfg.n_list.size(); ++ni)
        for (int rep = 0; rep < cfg.replications; ++rep)
            all.push_back({ni, rep});
    std::vector<RepRecord> records(all.size());

    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    auto worker = [&]() {
        for (;;) {
            std::size_t j = next.fetch_add(1);
            if (j >= all.size()) return;
            try {
                const Job& job = all[j];
                const bool oracle = cfg.region_mode == "oracle";
                records[j] = run_replication(
                    cfg, *d, k, cfg.n_list[job.ni], job.rep,
                    oracle ? &grids[job.ni] : nullptr,
                    oracle ? &tildes[job.ni] : nullptr);
            } catch (...) {
                std::lock_guard<std::mutex> lk(err_mu);
                if (!err) err = std::current_exception();
                return;
            }
        }
    };
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < jobs; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (err) std::rethrow_exception(err);

    std::sort(records.begin(), records.end(), [](const RepRecord& a,
                                                 const RepRecord& b) {
        return a.n != b.n ? a.n < b.n : a.rep < b.rep;
    });
    return records;
}

struct SummaryRow {
    std::size_t n = 0;
    double h1 = 0.0, h2 = 0.0;
    double med_classical = 0.0, med_ideal = 0.0, med_true = 0.0;
    double med_dev_variance = 0.0;
    double scaled_dev_variance = 0.0;  // med_dev * sqrt(n h2 / log(1/h2))
};

inline std::vector<SummaryRow> summarize(const ExperimentConfig& cfg,
                                         const std::vector<RepRecord>& records) {
    std::vector<SummaryRow> rows;
    for (std::size_t n : cfg.n_list) {
        std::vector<double> ec, ei, et, ev;
        for (const auto& r : records) {
            if (r.n != n) continue;
            ec.push_back(r.sup_err_classical);
            ei.push_back(r.sup_err_ideal);
            et.push_back(r.sup_err_true);
            ev.push_back(r.sup_dev_variance);
        }
        SummaryRow row;
        row.n = n;
        row.h1 = pilot_bandwidth(n, cfg.eta);
        row.h2 = main_bandwidth(n);
        row.med_classical = detail::median(ec);
        row.med_ideal = detail::median(ei);
        row.med_true = detail::median(et);
        row.med_dev_variance = detail::median(ev);
        row.scaled_dev_variance =
            row.med_dev_variance * std::sqrt(n * row.h2 / std::log(1.0 / row.h2));
        rows.push_back(row);
    }
    return rows;
}

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    std::string x_axis = "log(n/log n)";  // compound axis by default
    std::vector<std::pair<double, double>> points;
};

/// OLS of y on x; throws on degenerate x-spread.
inline RateFit ols_fit(const std::vector<std::pair<double, double>>& pts,
                       const std::string& axis_label) {
    if (pts.size() < 2) throw std::invalid_argument("rate fit needs >= 2 points");
    double sx = 0, sy = 0;
    for (auto& [x, y] : pts) { sx += x; sy += y; }
    double mx = sx / pts.size(), my = sy / pts.size();
    double sxx = 0, sxy = 0, syy = 0;
    for (auto& [x, y] : pts) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    if (sxx < 1e-12) throw std::runtime_error("degenerate x-spread in rate fit");
    RateFit fit;
    fit.x_axis = axis_label;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r_squared = syy < 1e-300 ? 1.0 : (sxy * sxy) / (sxx * syy);
    fit.points = pts;
    return fit;
}

/// Rate regression of log(median sup-error) on the compound axis
/// log((log n)/n); slope ~ +4/9 when the error follows ((log n)/n)^(4/9).
inline RateFit rate_fit_from_records(const ExperimentConfig& cfg,
                                     const std::vector<RepRecord>& records,
                                     const std::string& x_axis = "log(n/log n)") {
    auto rows = summarize(cfg, records);
    EstimatorTag tag = estimator_from_string(cfg.estimator_tag);
    std::vector<std::pair<double, double>> pts;
    for (const auto& row : rows) {
        double med = 0.0;
        switch (tag) {
            case EstimatorTag::classical: med = row.med_classical; break;
            case EstimatorTag::hhm_ideal: med = row.med_ideal; break;
            case EstimatorTag::true_twostage: med = row.med_true; break;
            case EstimatorTag::abramson_ideal:
                throw std::invalid_argument("rate fit: unsupported estimator");
        }
        double x = (x_axis == "log n")
                       ? std::log((double)row.n)
                       : std::log(std::log((double)row.n) / (double)row.n);
        pts.push_back({x, std::log(med)});
    }
    return ols_fit(pts, x_axis);
}

inline RateFit rate_fit(const ExperimentConfig& cfg, int jobs = 1) {
    if (cfg.n_list.size() < 4)
        throw std::invalid_argument("rate_fit needs >= 4 sample sizes");
    if (cfg.replications < 20)
        throw std::invalid_argument("rate_fit needs >= 20 replications");
    auto records = run_experiment(cfg, jobs);
    // Sign convention: slope is positive ~ 4/9 on the compound axis because
    // both the error and (log n)/n decrease together.
    return rate_fit_from_records(cfg, records);
}

struct VarianceRateRow {
    std::size_t n = 0;
    double h2 = 0.0;
    double median_scaled = 0.0;
};

struct VarianceRateTable {
    std::vector<VarianceRateRow> rows;
    bool pass = false;
};

/// Scaled variance deviations per n; PASS when the trend from the smallest
/// to the largest n does not exceed +20%.
inline VarianceRateTable variance_rate_check(const ExperimentConfig& cfg,
                                             const std::vector<RepRecord>& records) {
    auto rows = summarize(cfg, records);
    VarianceRateTable table;
    for (const auto& r : rows)
        table.rows.push_back({r.n, r.h2, r.scaled_dev_variance});
    if (!table.rows.empty()) {
        double first = table.rows.front().median_scaled;
        double last = table.rows.back().median_scaled;
        table.pass = first > 0.0 && (last - first) / first <= 0.20;
    }
    return table;
}

// ---------------------------------------------------------------------------
// Serialization (17 significant digits; byte-identical across runs).

inline std::string records_csv(const std::vector<RepRecord>& records) {
    std::ostringstream out;
    out << "n,rep,seed,sup_err_classical,sup_err_ideal,sup_err_true,"
           "sup_dev_variance,sup_bias\n";
    for (const auto& r : records)
        out << r.n << ',' << r.rep << ',' << r.seed << ','
            << fmt17(r.sup_err_classical) << ',' << fmt17(r.sup_err_ideal) << ','
            << fmt17(r.sup_err_true) << ',' << fmt17(r.sup_dev_variance) << ','
            << fmt17(r.sup_bias) << '\n';
    return out.str();
}

inline std::string summary_csv(const std::vector<SummaryRow>& rows) {
    std::ostringstream out;
    out << "n,h1,h2,med_sup_err_classical,med_sup_err_ideal,med_sup_err_true,"
           "med_sup_dev_variance,scaled_dev_variance\n";
    for (const auto& r : rows)
        out << r.n << ',' << fmt17(r.h1) << ',' << fmt17(r.h2) << ','
            << fmt17(r.med_classical) << ',' << fmt17(r.med_ideal) << ','
            << fmt17(r.med_true) << ',' << fmt17(r.med_dev_variance) << ','
            << fmt17(r.scaled_dev_variance) << '\n';
    return out.str();
}

inline nlohmann::json ratefit_json(const RateFit& fit) {
    nlohmann::json j;
    j["slope"] = fit.slope;
    j["intercept"] = fit.intercept;
    j["r_squared"] = fit.r_squared;
    j["x_axis"] = fit.x_axis;
    j["points"] = nlohmann::json::array();
    for (auto& [x, y] : fit.points) j["points"].push_back({x, y});
    return j;
}

}  // namespace vbkde
