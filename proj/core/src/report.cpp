#include "sivsq/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "sivsq/errors.hpp"
#include "sivsq/experiments.hpp"

namespace sivsq {

std::string format_double(double v) {
    if (v == 0.0) return "0";  // folds -0
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string trajectory_csv(std::span<const SqueezingRecord> records) {
    std::string out = std::string(kTrajectoryHeader) + "\n";
    for (const auto& r : records) {
        out += format_double(r.time * 1e6) + ',' + format_double(r.xi_s2) + ',' + format_double(r.xi_r2) + ',' +
               format_double(r.mean_spin(0)) + ',' + format_double(r.mean_spin(1)) + ',' +
               format_double(r.mean_spin(2)) + ',' + format_double(r.jx2) + ',' + format_double(r.trace_err) + ',' +
               format_double(r.purity) + '\n';
    }
    return out;
}

std::string sweep_csv(std::span<const SweepRow> rows) {
    std::string out = std::string(kSweepHeader) + "\n";
    for (const auto& r : rows)
        out += std::to_string(r.n_tot) + ',' + format_double(r.min_xi_r2) + ',' + format_double(r.min_xi_s2) + ',' +
               format_double(r.t_opt * 1e6) + '\n';
    return out;
}

std::string oracle_csv(std::span<const OracleRow> rows) {
    std::string out = std::string(kOracleHeader) + "\n";
    for (const auto& r : rows)
        out += format_double(r.t) + ',' + format_double(r.fidelity) + ',' + format_double(r.leakage) + ',' +
               format_double(r.phonon_mean) + '\n';
    return out;
}

std::string dephasing_csv(std::span<const DephasingRow> rows) {
    std::string out = std::string(kDephasingHeader) + "\n";
    for (const auto& r : rows)
        out += format_double(r.t) + ',' + format_double(r.jx_exact) + ',' + format_double(r.jx_collective) + ',' +
               format_double(r.var_exact) + ',' + format_double(r.var_collective) + '\n';
    return out;
}

std::vector<std::pair<double, double>> read_fit_points(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open " + path.string());
    std::string line;
    if (!std::getline(f, line)) throw ConfigError("empty file " + path.string());
    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) header.push_back(cell);
    }
    std::size_t xi = 0, yi = 1;
    const auto col = [&](const std::string& name) {
        return static_cast<std::size_t>(std::find(header.begin(), header.end(), name) - header.begin());
    };
    if (col("n_tot") < header.size() && col("min_xi_r2") < header.size()) {
        xi = col("n_tot");
        yi = col("min_xi_r2");
    } else if (header.size() < 2) {
        throw ConfigError("expected at least two columns in " + path.string());
    }
    std::vector<std::pair<double, double>> pts;
    int line_no = 1;
    while (std::getline(f, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() <= std::max(xi, yi)) throw ConfigError("too few columns", line_no);
        try {
            pts.emplace_back(std::stod(cells[xi]), std::stod(cells[yi]));
        } catch (const std::exception&) {
            throw ConfigError("not a number", line_no);
        }
    }
    return pts;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".partial";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw Error("cannot write " + tmp.string());
        f << content;
        f.flush();
        if (!f) {
            f.close();
            std::filesystem::remove(tmp);
            throw Error("write failed for " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

namespace {

std::string esc(const std::string& s) {
    std::string o;
    for (char c : s) {
        if (c == '<') o += "&lt;";
        else if (c == '>') o += "&gt;";
        else if (c == '&') o += "&amp;";
        else o += c;
    }
    return o;
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

}  // namespace

std::string svg_line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                           std::span<const PlotSeries> series, bool log_y) {
    constexpr double W = 640, H = 420, L = 70, R = 20, T = 40, B = 50;
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
    auto ty = [&](double y) { return log_y ? std::log10(y) : y; };
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (log_y && !(s.y[i] > 0.0)) continue;
            x0 = std::min(x0, s.x[i]);
            x1 = std::max(x1, s.x[i]);
            y0 = std::min(y0, ty(s.y[i]));
            y1 = std::max(y1, ty(s.y[i]));
        }
    if (!(x1 > x0)) { x0 = 0; x1 = 1; }
    if (!(y1 > y0)) { y0 -= 0.5; y1 += 0.5; }
    const double pad = 0.05 * (y1 - y0);
    y0 -= pad;
    y1 += pad;
    auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
    auto py = [&](double y) { return H - B - (ty(y) - y0) / (y1 - y0) * (H - T - B); };

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
      << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << esc(title) << "</text>\n";
    o << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
      << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double xv = x0 + (x1 - x0) * k / 4.0;
        const double yv = y0 + (y1 - y0) * k / 4.0;
        o << "<text x=\"" << px(xv) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">" << num(xv) << "</text>\n";
        const double ylab = log_y ? std::pow(10.0, yv) : yv;
        o << "<text x=\"" << L - 6 << "\" y=\"" << H - B - (yv - y0) / (y1 - y0) * (H - T - B) + 4
          << "\" text-anchor=\"end\">" << num(ylab) << "</text>\n";
    }
    o << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">" << esc(x_label)
      << "</text>\n";
    o << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << (T + H - B) / 2 << ")\">" << esc(y_label) << (log_y ? " (log)" : "") << "</text>\n";
    for (std::size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        const char* c = colors[si % 6];
        o << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (log_y && !(s.y[i] > 0.0)) continue;
            o << num(px(s.x[i])) << ',' << num(py(s.y[i])) << ' ';
        }
        o << "\"/>\n";
        o << "<text x=\"" << W - R - 8 << "\" y=\"" << T + 16 + 16 * si << "\" text-anchor=\"end\" fill=\"" << c
          << "\">" << esc(s.label) << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

}  // namespace sivsq
