#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sivsq/fullmodel.hpp"
#include "sivsq/squeezing.hpp"

namespace sivsq {

struct SweepRow;

std::string format_double(double v);  // 17 significant digits

inline constexpr const char* kTrajectoryHeader = "t_us,xi_s2,xi_r2,jx_mean,jy_mean,jz_mean,jx2,trace_err,purity";
inline constexpr const char* kSweepHeader = "n_tot,min_xi_r2,min_xi_s2,t_opt_us";
inline constexpr const char* kOracleHeader = "t,fidelity,leakage,phonon_mean";
inline constexpr const char* kDephasingHeader = "t,jx_exact,jx_collective,var_exact,var_collective";

std::string trajectory_csv(std::span<const SqueezingRecord> records);
std::string sweep_csv(std::span<const SweepRow> rows);
std::string oracle_csv(std::span<const OracleRow> rows);
std::string dephasing_csv(std::span<const DephasingRow> rows);

// (N, xi^2) pairs from a sweep CSV (n_tot, min_xi_r2) or any two-column CSV with a header
std::vector<std::pair<double, double>> read_fit_points(const std::filesystem::path& path);

// writes to a temporary sibling, then renames
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

std::string svg_line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                           std::span<const PlotSeries> series, bool log_y = false);

}  // namespace sivsq
