#pragma once

#include <span>
#include <string>

namespace affinegas {

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    std::size_t count = 0;
};

/// Ordinary least squares y = intercept + slope x. Requires two distinct x values.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

/// Formats with 17 significant digits.
std::string fmt17(double v);

}  // namespace affinegas
