#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sivsq/fit.hpp"
#include "sivsq/fullmodel.hpp"
#include "sivsq/scenario.hpp"
#include "sivsq/squeezing.hpp"

namespace sivsq {

struct RunOptions {
    std::filesystem::path out_dir = ".";
    bool write_files = true;
    bool svg = false;
};

struct RunResult {
    std::string name;
    std::vector<SqueezingRecord> records;
    std::filesystem::path csv;
    std::vector<std::filesystem::path> svgs;
    std::string storage;
    std::size_t steps = 0;
    double max_trace_error = 0.0;
    double max_hermiticity_error = 0.0;
    double final_min_eigenvalue = 0.0;
    std::vector<std::string> warnings;  // regime flags
};

RunResult run_scenario(const Scenario& s, const RunOptions& opt = {});

struct Optimum {
    double value = 0.0;
    double t = 0.0;
    std::size_t index = 0;  // discrete argmin
};

// grid minimum refined by the parabola through its neighbours
Optimum refine_minimum(std::span<const double> t, std::span<const double> y);

struct SweepRow {
    int n_tot = 0;
    double min_xi_r2 = 0.0;
    double min_xi_s2 = 0.0;
    double t_opt = 0.0;  // seconds, at the xi_r2 optimum
};

std::vector<SweepRow> sweep_optimal(const Scenario& tmpl, std::span<const int> n_list, int threads = 1);

inline constexpr int kDefaultScalingGrid[] = {20, 30, 40, 50, 60, 80, 100};

struct SqueezingWindow {
    std::size_t begin = 0, end = 0;  // bracketing sample indices
    std::size_t argmin = 0;
    double min_xi_s2 = 1.0;
};

// windows between consecutive local maxima of xi_s2 above `level`; windows without a dip below level are skipped
std::vector<SqueezingWindow> squeezing_windows(std::span<const double> xi_s2, double level = 0.9);

struct ParityTrace {
    int n_tot = 0;
    int n1 = 0, n2 = 0;
    std::vector<SqueezingRecord> records;
    std::optional<double> first_peak;   // max 1/xi_s2
    std::optional<double> second_peak;
    double first_peak_t = 0.0, second_peak_t = 0.0;
    double jx2_at_compare = 0.0;
    std::string note;  // window detection remarks
};

struct ParityResult {
    double compare_time = 0.0;
    std::vector<ParityTrace> traces;
};

ParityResult parity_experiment(const Scenario& tmpl, std::span<const int> n_tot_list, int threads = 1,
                               std::optional<double> compare_time = std::nullopt);

OracleReport oracle_check(const Scenario& s);

// runs fn(i) for i in [0, n) on up to `threads` workers; rethrows the lowest-index failure
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace sivsq
