#pragma once

#include <span>
#include <utility>

namespace sivsq {

struct FitResult {
    double a = 0.0;         // prefactor
    double b = 0.0;         // exponent
    double residual = 0.0;  // RMS of log residuals
    int points = 0;
};

// least squares of ln y = ln a + b ln x; needs >= 3 positive points
FitResult fit_power_law(std::span<const std::pair<double, double>> points);

}  // namespace sivsq
