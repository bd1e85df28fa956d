#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sivsq/errors.hpp"
#include "sivsq/experiments.hpp"
#include "sivsq/fit.hpp"
#include "sivsq/report.hpp"

namespace fs = std::filesystem;
using namespace sivsq;

namespace {

enum Exit { kOk = 0, kFailure = 1, kConfig = 2, kNumerical = 3, kOracle = 4 };

struct Common {
    fs::path out_dir = ".";
    bool svg = false;
    int threads = 1;
};

void print_warnings(const std::vector<std::string>& w) {
    for (const auto& s : w) std::fprintf(stderr, "warning: %s\n", s.c_str());
}

std::string fixed(double v, const char* fmt = "%.6g") {
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
}

int cmd_simulate(const fs::path& file, const Common& c) {
    const auto s = load_scenario(file);
    fs::create_directories(c.out_dir);
    const auto res = run_scenario(s, {c.out_dir, true, c.svg});
    print_warnings(res.warnings);
    double best_s = 1.0, best_r = 1.0;
    for (const auto& r : res.records) {
        best_s = std::min(best_s, r.xi_s2);
        best_r = std::min(best_r, r.xi_r2);
    }
    std::printf("%s: %zu samples, storage=%s, steps=%zu\n", s.name.c_str(), res.records.size(), res.storage.c_str(),
                res.steps);
    std::printf("  min xi_s2 = %s  min xi_r2 = %s\n", fixed(best_s).c_str(), fixed(best_r).c_str());
    std::printf("  max |tr-1| = %.3g  max herm = %.3g  final min eig = %.3g\n", res.max_trace_error,
                res.max_hermiticity_error, res.final_min_eigenvalue);
    std::printf("  wrote %s\n", res.csv.string().c_str());
    for (const auto& p : res.svgs) std::printf("  wrote %s\n", p.string().c_str());
    return kOk;
}

int cmd_sweep(const fs::path& file, std::vector<int> n_list, const Common& c) {
    const auto s = load_scenario(file);
    if (n_list.empty()) n_list.assign(std::begin(kDefaultScalingGrid), std::end(kDefaultScalingGrid));
    for (int n : n_list)
        if (n < 2) throw ConfigError("N_tot must be >= 2", 0, "n-list");
    const auto rows = sweep_optimal(s, n_list, c.threads);
    fs::create_directories(c.out_dir);
    const auto path = c.out_dir / (s.name + "_sweep.csv");
    write_file_atomic(path, sweep_csv(rows));
    std::printf("%-6s %-14s %-14s %s\n", "n_tot", "min_xi_r2", "min_xi_s2", "t_opt_us");
    for (const auto& r : rows)
        std::printf("%-6d %-14s %-14s %s\n", r.n_tot, fixed(r.min_xi_r2).c_str(), fixed(r.min_xi_s2).c_str(),
                    fixed(r.t_opt * 1e6).c_str());
    if (c.svg) {
        PlotSeries ps{"min xi_r2", {}, {}};
        for (const auto& r : rows) {
            ps.x.push_back(r.n_tot);
            ps.y.push_back(r.min_xi_r2);
        }
        const auto svg = c.out_dir / (s.name + "_sweep.svg");
        write_file_atomic(svg, svg_line_chart(s.name, "N_tot", "min xi_r2", std::span(&ps, 1), true));
        std::printf("wrote %s\n", svg.string().c_str());
    }
    std::printf("wrote %s\n", path.string().c_str());
    if (rows.size() >= 3) {
        std::vector<std::pair<double, double>> pts;
        for (const auto& r : rows) pts.emplace_back(r.n_tot, r.min_xi_r2);
        const auto f = fit_power_law(pts);
        std::printf("fit: xi_r2 = %s * N^%s (rms log residual %s)\n", fixed(f.a, "%.4f").c_str(),
                    fixed(f.b, "%.4f").c_str(), fixed(f.residual, "%.3g").c_str());
    }
    return kOk;
}

int cmd_fit(const fs::path& csv) {
    const auto pts = read_fit_points(csv);
    const auto f = fit_power_law(pts);
    std::printf("a,b,residual,points\n%s,%s,%s,%d\n", format_double(f.a).c_str(), format_double(f.b).c_str(),
                format_double(f.residual).c_str(), f.points);
    return kOk;
}

int cmd_parity(const fs::path& file, std::vector<int> n_tot, const Common& c) {
    const auto s = load_scenario(file);
    if (n_tot.empty()) n_tot = {40, 39, 38, 37, 36};
    for (int n : n_tot)
        if (n < 2) throw ConfigError("N_tot must be >= 2", 0, "n-tot");
    const auto res = parity_experiment(s, n_tot, c.threads);
    fs::create_directories(c.out_dir);
    std::string summary = "n_tot,n1,n2,first_peak_inv_xi_s2,first_peak_t_us,second_peak_inv_xi_s2,second_peak_t_us,"
                          "jx2_at_compare,note\n";
    std::vector<PlotSeries> xi, jx;
    for (const auto& tr : res.traces) {
        const auto path = c.out_dir / (s.name + "_n" + std::to_string(tr.n_tot) + ".csv");
        write_file_atomic(path, trajectory_csv(tr.records));
        auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string("n/a"); };
        summary += std::to_string(tr.n_tot) + "," + std::to_string(tr.n1) + "," + std::to_string(tr.n2) + "," +
                   opt(tr.first_peak) + "," + (tr.first_peak ? format_double(tr.first_peak_t * 1e6) : "n/a") + "," +
                   opt(tr.second_peak) + "," + (tr.second_peak ? format_double(tr.second_peak_t * 1e6) : "n/a") +
                   "," + format_double(tr.jx2_at_compare) + "," + tr.note + "\n";
        if (!tr.note.empty()) std::fprintf(stderr, "N_tot=%d: %s\n", tr.n_tot, tr.note.c_str());
        PlotSeries a{"N=" + std::to_string(tr.n_tot), {}, {}}, b = a;
        for (const auto& r : tr.records) {
            a.x.push_back(r.time * 1e6);
            a.y.push_back(r.xi_s2);
            b.x.push_back(r.time * 1e6);
            b.y.push_back(r.jx2);
        }
        xi.push_back(std::move(a));
        jx.push_back(std::move(b));
    }
    const auto path = c.out_dir / (s.name + "_parity.csv");
    write_file_atomic(path, summary);
    std::printf("%-6s %-12s %-12s %s\n", "n_tot", "1st peak", "2nd peak", "<Jx^2>");
    for (const auto& tr : res.traces)
        std::printf("%-6d %-12s %-12s %s\n", tr.n_tot, tr.first_peak ? fixed(*tr.first_peak).c_str() : "n/a",
                    tr.second_peak ? fixed(*tr.second_peak).c_str() : "n/a", fixed(tr.jx2_at_compare).c_str());
    std::printf("compare time %s us\nwrote %s\n", fixed(res.compare_time * 1e6).c_str(), path.string().c_str());
    if (c.svg) {
        write_file_atomic(c.out_dir / (s.name + "_xi_s2.svg"), svg_line_chart(s.name, "t (us)", "xi_s2", xi, true));
        write_file_atomic(c.out_dir / (s.name + "_jx2.svg"), svg_line_chart(s.name, "t (us)", "<Jx^2>", jx));
    }
    return kOk;
}

int cmd_oracle(const fs::path& file, const Common& c) {
    const auto s = load_scenario(file);
    const auto rep = oracle_check(s);
    fs::create_directories(c.out_dir);
    const auto path = c.out_dir / (s.name + "_oracle.csv");
    write_file_atomic(path, oracle_csv(rep.rows));
    print_warnings(rep.couplings.regime_warnings());
    std::printf("min fidelity %s (bare %s), max leakage %s, max <n_ph> %s\n", fixed(rep.min_fidelity).c_str(),
                fixed(rep.min_fidelity_bare).c_str(), fixed(rep.max_leakage).c_str(), fixed(rep.max_phonon).c_str());
    std::printf("wrote %s\n", path.string().c_str());
    std::printf("%s: fidelity >= 0.99 and leakage <= 0.05\n", rep.passed ? "PASS" : "FAIL");
    return rep.passed ? kOk : kOracle;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Collective spin squeezing of two coupled SiV ensembles"};
    app.require_subcommand(1);
    Common common;
    app.add_option("--out-dir", common.out_dir, "Directory for CSV/SVG output")->capture_default_str();
    app.add_flag("--svg", common.svg, "Also write SVG plots");
    app.add_option("--threads", common.threads, "Worker threads for sweeps")->check(CLI::Range(1, 256));

    fs::path file, csv;
    std::vector<int> n_list, n_tot;
    auto* sim = app.add_subcommand("simulate", "Run one scenario");
    sim->add_option("file", file, "Scenario file")->required()->check(CLI::ExistingFile);
    auto* sweep = app.add_subcommand("sweep", "Optimal squeezing versus N_tot");
    sweep->add_option("file", file, "Scenario file")->required()->check(CLI::ExistingFile);
    sweep->add_option("--n-list", n_list, "N_tot values (default 20 30 40 50 60 80 100)");
    auto* fit = app.add_subcommand("fit", "Power-law fit of a sweep CSV");
    fit->add_option("csv", csv, "CSV with (N, xi^2) columns")->required()->check(CLI::ExistingFile);
    auto* parity = app.add_subcommand("parity", "Even/odd N_tot comparison for a mixed scenario");
    parity->add_option("file", file, "Scenario file")->required()->check(CLI::ExistingFile);
    parity->add_option("--n-tot", n_tot, "N_tot values (default 40 39 38 37 36)");
    auto* oracle = app.add_subcommand("oracle-check", "Compare the effective model against the full model");
    oracle->add_option("file", file, "Scenario file with drive parameters")->required()->check(CLI::ExistingFile);
    for (auto* sub : {sim, sweep, fit, parity, oracle}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfig;
    }

    try {
        if (*sim) return cmd_simulate(file, common);
        if (*sweep) return cmd_sweep(file, n_list, common);
        if (*fit) return cmd_fit(csv);
        if (*parity) return cmd_parity(file, n_tot, common);
        if (*oracle) return cmd_oracle(file, common);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kConfig;
    } catch (const InvalidArgument& e) {
        std::fprintf(stderr, "invalid argument: %s\n", e.what());
        return kConfig;
    } catch (const NumericalError& e) {
        std::fprintf(stderr, "numerical error: %s\n", e.what());
        return kNumerical;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kFailure;
    }
    return kFailure;
}
