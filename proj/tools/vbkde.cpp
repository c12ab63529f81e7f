// vbkde: variable-bandwidth kernel density estimation toolbox.
//
// Subcommands: estimate, bias-check, linearize, rate, compare.
// Exit codes: 0 success, 1 validation error, 2 numeric failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <vbkde/config.hpp>
#include <vbkde/decomposition.hpp>
#include <vbkde/io.hpp>
#include <vbkde/vbkde.hpp>

namespace {

constexpr const char* kVersion = "1.0.0";

struct GridSpec {
    double lo = 0.0, hi = 0.0;
    long count = 0;
};

GridSpec parse_grid(const std::string& s) {
    GridSpec g;
    std::istringstream in(s);
    std::string a, b, c;
    if (!std::getline(in, a, ':') || !std::getline(in, b, ':') ||
        !std::getline(in, c, ':'))
        throw CLI::ValidationError("--grid", "expected lo:hi:count");
    try {
        g.lo = std::stod(a);
        g.hi = std::stod(b);
        g.count = std::stol(c);
    } catch (const std::exception&) {
        throw CLI::ValidationError("--grid", "expected numeric lo:hi:count");
    }
    if (!(g.hi > g.lo) || g.count < 1)
        throw CLI::ValidationError("--grid", "need hi > lo and count >= 1");
    return g;
}

std::vector<double> linspace(const GridSpec& g) {
    std::vector<double> out(g.count);
    if (g.count == 1) {
        out[0] = 0.5 * (g.lo + g.hi);
        return out;
    }
    for (long i = 0; i < g.count; ++i)
        out[i] = g.lo + (g.hi - g.lo) * i / (g.count - 1);
    return out;
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::istringstream in(s);
    std::string tok;
    while (std::getline(in, tok, ',')) out.push_back(std::stod(tok));
    return out;
}

std::vector<std::uint64_t> parse_seeds(const std::string& s) {
    std::vector<std::uint64_t> out;
    std::istringstream in(s);
    std::string tok;
    while (std::getline(in, tok, ',')) out.push_back(std::stoull(tok));
    return out;
}

nlohmann::json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw CLI::ValidationError("--config", "cannot open " + path);
    nlohmann::json j;
    in >> j;
    return j;
}

int cmd_estimate(const std::string& density_name, std::size_t n,
                 std::uint64_t seed, const std::string& estimator, double r,
                 double eta, double B_opt, const std::string& grid_str,
                 const std::string& out_path) {
    using namespace vbkde;
    if (const char* env = std::getenv("VBKDE_SEED"))
        seed = std::stoull(env);
    auto d = make_density(density_name);
    const Kernel& k = Kernel::quintic();
    EstimatorTag tag = estimator_from_string(estimator);
    BandwidthPair bw = schedule(n, eta);
    double B = B_opt > 0.0 ? B_opt : default_B(k, r);
    Sample s = draw_sample(*d, n, seed);
    auto grid = linspace(parse_grid(grid_str));
    auto curve = evaluate_curve(tag, s, d.get(), k, bw, B, grid);

    std::ostringstream csv;
    csv << "t,value,estimator,n,h1,h2,B,seed\n";
    for (std::size_t j = 0; j < grid.size(); ++j)
        csv << fmt17(curve.grid[j]) << ',' << fmt17(curve.values[j]) << ','
            << estimator << ',' << n << ',' << fmt17(bw.h1) << ','
            << fmt17(bw.h2) << ',' << fmt17(B) << ',' << seed << '\n';
    atomic_write(out_path, csv.str());
    return 0;
}

int cmd_bias_check(const std::string& density_name, double r,
                   const std::string& h_str, const std::string& out_path) {
    using namespace vbkde;
    auto d = make_density(density_name);
    const Kernel& k = Kernel::quintic();
    auto h_list = parse_list(h_str);
    auto rows = bias_ratio_curve(*d, k, r, default_B(k, r), h_list);
    std::ostringstream csv;
    csv << "h,sup_dev,argmax_t\n";
    for (const auto& row : rows)
        csv << fmt17(row.h) << ',' << fmt17(row.sup_dev) << ','
            << fmt17(row.argmax_t) << '\n';
    atomic_write(out_path, csv.str());
    return 0;
}

int cmd_linearize(const std::string& density_name, std::size_t n,
                  const std::string& seeds_str, double r, double spacing,
                  const std::string& out_path) {
    using namespace vbkde;
    auto d = make_density(density_name);
    const Kernel& k = Kernel::quintic();
    auto seeds = parse_seeds(seeds_str);
    BandwidthPair bw = schedule(n, 0.0);
    double B = default_B(k, r);
    Region reg = region_oracle(*d, r);
    auto grid = region_grid(reg, spacing);

    std::ostringstream csv;
    csv << "n,seed,sup_gap,sup_gap_scaled\n";
    for (auto seed : seeds) {
        Sample s = draw_sample(*d, n, seed);
        DecompContext ctx(s, *d, k, bw, B, r);
        ctx.build_caches();
        double gap = linearization_gap(ctx, grid);
        double scaled = gap * std::pow((double)n / std::log((double)n), 4.0 / 9.0);
        csv << n << ',' << seed << ',' << fmt17(gap) << ',' << fmt17(scaled)
            << '\n';
    }
    atomic_write(out_path, csv.str());
    return 0;
}

void apply_seed_override(vbkde::ExperimentConfig& cfg) {
    if (const char* env = std::getenv("VBKDE_SEED"))
        cfg.base_seed = std::stoull(env);
}

int cmd_rate(const std::string& config_path, const std::string& out_dir,
             int jobs) {
    using namespace vbkde;
    auto cfg = ExperimentConfig::from_json(load_json(config_path));
    apply_seed_override(cfg);
    std::filesystem::create_directories(out_dir);
    auto records = run_experiment(cfg, jobs);
    auto rows = summarize(cfg, records);
    auto fit = rate_fit_from_records(cfg, records);
    atomic_write(std::filesystem::path(out_dir) / "records.csv",
                 records_csv(records));
    atomic_write(std::filesystem::path(out_dir) / "summary.csv",
                 summary_csv(rows));
    atomic_write(std::filesystem::path(out_dir) / "ratefit.json",
                 ratefit_json(fit).dump(2) + "\n");
    return 0;
}

int cmd_compare(const std::string& config_path, const std::string& out_dir,
                int jobs) {
    using namespace vbkde;
    auto cfg = ExperimentConfig::from_json(load_json(config_path));
    apply_seed_override(cfg);
    std::filesystem::create_directories(out_dir);
    auto records = run_experiment(cfg, jobs);
    auto rows = summarize(cfg, records);
    atomic_write(std::filesystem::path(out_dir) / "records.csv",
                 records_csv(records));
    atomic_write(std::filesystem::path(out_dir) / "summary.csv",
                 summary_csv(rows));
    nlohmann::json fits;
    for (const char* tag : {"classical", "hhm_ideal", "true_twostage"}) {
        ExperimentConfig c = cfg;
        c.estimator_tag = tag;
        fits[tag] = ratefit_json(rate_fit_from_records(c, records));
    }
    atomic_write(std::filesystem::path(out_dir) / "compare.json",
                 fits.dump(2) + "\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"variable-bandwidth kernel density estimation toolbox"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    int jobs = (int)std::thread::hardware_concurrency();
    if (jobs < 1) jobs = 1;
    app.add_option("--jobs", jobs, "worker threads for the harness");

    // estimate
    auto* est = app.add_subcommand("estimate", "evaluate one estimator on a grid");
    std::string density = "normal", estimator = "classical", grid_str, out_path;
    std::size_t n = 0;
    std::uint64_t seed = 0;
    double r = 0.1, eta = 0.0, B_opt = -1.0;
    est->add_option("--density", density)->required();
    est->add_option("--n", n)->required();
    est->add_option("--seed", seed)->required();
    est->add_option("--estimator", estimator)->required();
    est->add_option("--r", r)->required();
    est->add_option("--eta", eta);
    est->add_option("--B", B_opt);
    est->add_option("--grid", grid_str, "lo:hi:count")->required();
    est->add_option("--out", out_path)->required();

    // bias-check
    auto* bias = app.add_subcommand("bias-check", "bias-law deviation table");
    bias->set_help_flag("--help", "print help for bias-check");
    std::string bias_density = "normal", h_str, bias_out;
    double bias_r = 0.1;
    bias->add_option("--density", bias_density)->required();
    bias->add_option("--r", bias_r)->required();
    bias->add_option("--h", h_str, "comma-separated decreasing bandwidths")->required();
    bias->add_option("--out", bias_out)->required();

    // linearize
    auto* lin = app.add_subcommand("linearize", "linearization gap per seed");
    std::string lin_density = "normal", seeds_str, lin_out;
    std::size_t lin_n = 0;
    double lin_r = 0.1, lin_spacing = 0.05;
    lin->add_option("--density", lin_density)->required();
    lin->add_option("--n", lin_n)->required();
    lin->add_option("--seeds", seeds_str, "comma-separated seeds")->required();
    lin->add_option("--r", lin_r)->required();
    lin->add_option("--grid-spacing", lin_spacing);
    lin->add_option("--out", lin_out)->required();

    // rate / compare
    auto* rate = app.add_subcommand("rate", "Monte Carlo rate experiment");
    std::string rate_config, rate_out;
    rate->add_option("--config", rate_config)->required();
    rate->add_option("--out", rate_out)->required();
    auto* cmp = app.add_subcommand("compare", "classical vs ideal vs true");
    std::string cmp_config, cmp_out;
    cmp->add_option("--config", cmp_config)->required();
    cmp->add_option("--out", cmp_out)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (est->parsed())
            return cmd_estimate(density, n, seed, estimator, r, eta, B_opt,
                                grid_str, out_path);
        if (bias->parsed())
            return cmd_bias_check(bias_density, bias_r, h_str, bias_out);
        if (lin->parsed())
            return cmd_linearize(lin_density, lin_n, seeds_str, lin_r,
                                 lin_spacing, lin_out);
        if (rate->parsed()) return cmd_rate(rate_config, rate_out, jobs);
        if (cmp->parsed()) return cmd_compare(cmp_config, cmp_out, jobs);
    } catch (const vbkde::QuadratureError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 2;
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
