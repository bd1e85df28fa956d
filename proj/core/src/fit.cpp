#include "sivsq/fit.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "sivsq/errors.hpp"

namespace sivsq {

FitResult fit_power_law(std::span<const std::pair<double, double>> points) {
    if (points.size() < 3) throw InvalidArgument("power-law fit needs at least 3 points");
    std::vector<std::pair<double, double>> pts(points.begin(), points.end());
    for (const auto& [x, y] : pts)
        if (!(x > 0.0) || !(y > 0.0)) throw InvalidArgument("power-law fit needs positive values");
    std::sort(pts.begin(), pts.end());  // order independent sums

    const double n = static_cast<double>(pts.size());
    double mx = 0.0, my = 0.0;
    for (const auto& [x, y] : pts) {
        mx += std::log(x);
        my += std::log(y);
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (const auto& [x, y] : pts) {
        const double dx = std::log(x) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(y) - my);
    }
    if (!(sxx > 0.0)) throw InvalidArgument("power-law fit needs at least two distinct N values");
    FitResult f;
    f.b = sxy / sxx;
    const double ln_a = my - f.b * mx;
    f.a = std::exp(ln_a);
    double ss = 0.0;
    for (const auto& [x, y] : pts) {
        const double r = std::log(y) - (ln_a + f.b * std::log(x));
        ss += r * r;
    }
    f.residual = std::sqrt(ss / n);
    f.points = static_cast<int>(pts.size());
    return f;
}

}  // namespace sivsq
