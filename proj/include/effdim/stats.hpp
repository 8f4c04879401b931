#pragma once

#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace effdim {

struct StatsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TrendStats {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    double spearman_rho = 0.0;
    int n_points = 0;
};

using Point = std::pair<double, double>;

// ordinary least squares; all-y-identical gives slope 0 and R^2 = 1 by
// convention, all-x-identical is an error
TrendStats linear_regression(std::span<const Point> points);

// Pearson correlation of average-rank vectors; needs >= 3 points
double spearman_rho(std::span<const Point> points);

// OLS plus Spearman in one record
TrendStats compute_trend(std::span<const Point> points);

}  // namespace effdim
