#include "sivsq/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <thread>

#include "sivsq/errors.hpp"
#include "sivsq/report.hpp"

namespace sivsq {

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const auto count = static_cast<std::size_t>(std::max(1, threads));
    if (count == 1 || n <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t k = 0; k < std::min(count, n); ++k) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

namespace {

double output_value(const SqueezingRecord& r, const std::string& key) {
    if (key == "xi_s2") return r.xi_s2;
    if (key == "xi_r2") return r.xi_r2;
    if (key == "jx2") return r.jx2;
    if (key == "jx_mean") return r.mean_spin(0);
    if (key == "jy_mean") return r.mean_spin(1);
    if (key == "jz_mean") return r.mean_spin(2);
    if (key == "trace_err") return r.trace_err;
    return r.purity;
}

}  // namespace

RunResult run_scenario(const Scenario& s, const RunOptions& opt) {
    RunResult res;
    res.name = s.name;
    HamiltonianSpec h;
    std::vector<DissipatorSpec> ds;
    StateVector psi0;
    try {
        h = scenario_hamiltonian(s);
        ds = scenario_dissipators(s);
        psi0 = scenario_initial_state(s);
    } catch (const InvalidArgument& ex) {
        throw ConfigError(ex.what(), 0, "kind");
    }
    if (s.drives) {
        res.warnings = s.drives->regime_warnings();
        const auto extra = effective_couplings(*s.drives).regime_warnings();
        res.warnings.insert(res.warnings.end(), extra.begin(), extra.end());
    }
    const auto pair = s.pair();
    const auto ops = SpinMomentOperators::for_pair(pair);
    const auto grid = uniform_grid(s.t_max, s.samples);

    Trajectory tr = ds.empty() ? evolve_pure(psi0, h, grid, s.integrator, ops.operators())
                               : evolve(DensityMatrix::from_pure(psi0), h, ds, grid, s.integrator, ops.operators());
    res.storage = tr.storage;
    res.steps = tr.steps;
    res.final_min_eigenvalue = tr.final_min_eigenvalue;
    for (const auto& d : tr.diagnostics) {
        res.max_trace_error = std::max(res.max_trace_error, d.trace_error);
        res.max_hermiticity_error = std::max(res.max_hermiticity_error, d.hermiticity_error);
    }
    try {
        res.records = squeezing_records(tr, ops, pair.n_tot());
    } catch (const InvalidArgument& ex) {
        throw NumericalError(std::string("squeezing evaluation failed: ") + ex.what());
    }
    if (res.final_min_eigenvalue < -1e-8)
        throw NumericalError("final state has negative eigenvalue " + format_double(res.final_min_eigenvalue));

    if (!opt.write_files) return res;
    std::vector<std::filesystem::path> written;
    try {
        res.csv = opt.out_dir / (s.name + ".csv");
        write_file_atomic(res.csv, trajectory_csv(res.records));
        written.push_back(res.csv);
        if (opt.svg) {
            for (const auto& key : s.outputs) {
                PlotSeries ps{key, {}, {}};
                for (const auto& r : res.records) {
                    ps.x.push_back(r.time * 1e6);
                    ps.y.push_back(output_value(r, key));
                }
                const auto path = opt.out_dir / (s.name + "_" + key + ".svg");
                const bool log_y = key.rfind("xi_", 0) == 0;
                write_file_atomic(path, svg_line_chart(s.name, "t (us)", key, std::span(&ps, 1), log_y));
                written.push_back(path);
                res.svgs.push_back(path);
            }
        }
    } catch (...) {
        for (const auto& p : written) std::filesystem::remove(p);
        throw;
    }
    return res;
}

Optimum refine_minimum(std::span<const double> t, std::span<const double> y) {
    if (t.size() != y.size() || t.empty()) throw InvalidArgument("refine_minimum: bad input");
    const std::size_t k = static_cast<std::size_t>(std::min_element(y.begin(), y.end()) - y.begin());
    Optimum o{y[k], t[k], k};
    if (k == 0 || k + 1 == y.size()) return o;
    // parabola through three (possibly non-uniform) points
    const double x0 = t[k - 1], x1 = t[k], x2 = t[k + 1];
    const double y0 = y[k - 1], y1 = y[k], y2 = y[k + 1];
    const double d0 = (y1 - y0) / (x1 - x0), d1 = (y2 - y1) / (x2 - x1);
    const double c2 = (d1 - d0) / (x2 - x0);
    if (!(c2 > 0.0)) return o;
    const double c1 = d0 - c2 * (x0 + x1);
    const double xv = std::clamp(-c1 / (2.0 * c2), x0, x2);
    const double yv = y0 + d0 * (xv - x0) + c2 * (xv - x0) * (xv - x1);
    o.t = xv;
    o.value = std::min(yv, y1);
    return o;
}

std::vector<SweepRow> sweep_optimal(const Scenario& tmpl, std::span<const int> n_list, int threads) {
    if (n_list.empty()) throw InvalidArgument("sweep needs at least one N_tot");
    std::vector<SweepRow> rows(n_list.size());
    parallel_for(n_list.size(), threads, [&](std::size_t i) {
        const Scenario s = tmpl.with_n_tot(n_list[i]);
        RunOptions opt;
        opt.write_files = false;
        const auto res = run_scenario(s, opt);
        std::vector<double> t, xs, xr;
        for (const auto& r : res.records) {
            t.push_back(r.time);
            xs.push_back(r.xi_s2);
            xr.push_back(r.xi_r2);
        }
        const auto opt_r = refine_minimum(t, xr);
        const auto opt_s = refine_minimum(t, xs);
        rows[i] = {n_list[i], opt_r.value, opt_s.value, opt_r.t};
    });
    std::stable_sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) { return a.n_tot < b.n_tot; });
    return rows;
}

std::vector<SqueezingWindow> squeezing_windows(std::span<const double> y, double level) {
    std::vector<std::size_t> bounds{0};
    for (std::size_t k = 1; k + 1 < y.size(); ++k)
        if (y[k] > level && y[k] >= y[k - 1] && y[k] > y[k + 1]) bounds.push_back(k);
    if (y.size() > 1) bounds.push_back(y.size() - 1);
    std::vector<SqueezingWindow> out;
    for (std::size_t b = 0; b + 1 < bounds.size(); ++b) {
        SqueezingWindow w;
        w.begin = bounds[b];
        w.end = bounds[b + 1];
        w.argmin = w.begin;
        w.min_xi_s2 = y[w.begin];
        for (std::size_t k = w.begin; k <= w.end; ++k)
            if (y[k] < w.min_xi_s2) {
                w.min_xi_s2 = y[k];
                w.argmin = k;
            }
        if (w.min_xi_s2 < level) out.push_back(w);
    }
    return out;
}

ParityResult parity_experiment(const Scenario& tmpl, std::span<const int> n_tot_list, int threads,
                               std::optional<double> compare_time) {
    if (tmpl.kind != ScenarioKind::mixed) throw ConfigError("parity experiment needs a mixed-kind scenario", 0, "kind");
    if (n_tot_list.empty()) throw InvalidArgument("parity experiment needs at least one N_tot");
    ParityResult res;
    res.traces.resize(n_tot_list.size());
    parallel_for(n_tot_list.size(), threads, [&](std::size_t i) {
        const Scenario s = tmpl.with_n_tot(n_tot_list[i]);
        RunOptions opt;
        opt.write_files = false;
        auto& tr = res.traces[i];
        tr.n_tot = n_tot_list[i];
        tr.n1 = s.n1;
        tr.n2 = s.n2;
        tr.records = run_scenario(s, opt).records;
        if (tr.n_tot < 4) {
            tr.note = "n/a: too few spins for window detection";
            return;
        }
        std::vector<double> xs;
        for (const auto& r : tr.records) xs.push_back(r.xi_s2);
        const auto w = squeezing_windows(xs);
        if (w.empty()) {
            tr.note = "no squeezing window found";
            return;
        }
        tr.first_peak = 1.0 / w[0].min_xi_s2;
        tr.first_peak_t = tr.records[w[0].argmin].time;
        if (w.size() > 1) {
            tr.second_peak = 1.0 / w[1].min_xi_s2;
            tr.second_peak_t = tr.records[w[1].argmin].time;
        } else {
            tr.note = "second window not found";
        }
    });
    // comparison sample: given time, else the first-window optimum of the first trace
    std::size_t idx = 0;
    const auto& ref = res.traces.front().records;
    if (compare_time) {
        res.compare_time = *compare_time;
        double best = INFINITY;
        for (std::size_t k = 0; k < ref.size(); ++k)
            if (std::abs(ref[k].time - *compare_time) < best) {
                best = std::abs(ref[k].time - *compare_time);
                idx = k;
            }
    } else if (res.traces.front().first_peak) {
        res.compare_time = res.traces.front().first_peak_t;
        for (std::size_t k = 0; k < ref.size(); ++k)
            if (ref[k].time == res.compare_time) idx = k;
    }
    res.compare_time = ref[idx].time;
    for (auto& tr : res.traces) tr.jx2_at_compare = tr.records[idx].jx2;
    return res;
}

OracleReport oracle_check(const Scenario& s) {
    const FullModelParams p = scenario_full_model(s);
    if (p.n1 < 1 || p.n2 < 1) throw ConfigError("oracle-check needs n1, n2 >= 1", 0, "n1");
    const auto grid = uniform_grid(s.t_max, s.samples);
    return compare_reduction(p, grid);
}

}  // namespace sivsq
