#include "effdim/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace effdim {

TrendStats linear_regression(std::span<const Point> points) {
    const std::size_t n = points.size();
    if (n < 2) throw StatsError("linear_regression: need >= 2 points");
    double mx = 0.0, my = 0.0;
    for (const auto& [x, y] : points) {
        mx += x;
        my += y;
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const auto& [x, y] : points) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    if (sxx == 0.0)
        throw StatsError("linear_regression: all x values identical");
    TrendStats t;
    t.n_points = static_cast<int>(n);
    t.slope = sxy / sxx;
    t.intercept = my - t.slope * mx;
    if (syy == 0.0) {
        t.slope = 0.0;
        t.intercept = my;
        t.r_squared = 1.0;  // constant y fits itself exactly, by convention
        return t;
    }
    double ss_res = 0.0;
    for (const auto& [x, y] : points) {
        double r = y - (t.slope * x + t.intercept);
        ss_res += r * r;
    }
    t.r_squared = 1.0 - ss_res / syy;
    if (t.r_squared < 0.0) t.r_squared = 0.0;
    if (t.r_squared > 1.0) t.r_squared = 1.0;
    return t;
}

namespace {

std::vector<double> average_ranks(std::span<const Point> points, bool use_x) {
    const std::size_t n = points.size();
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    auto key = [&](int i) { return use_x ? points[i].first : points[i].second; };
    std::sort(idx.begin(), idx.end(),
              [&](int a, int b) { return key(a) < key(b); });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && key(idx[j + 1]) == key(idx[i])) ++j;
        double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t t = i; t <= j; ++t) ranks[idx[t]] = avg;
        i = j + 1;
    }
    return ranks;
}

}  // namespace

double spearman_rho(std::span<const Point> points) {
    const std::size_t n = points.size();
    if (n < 3) throw StatsError("spearman_rho: need >= 3 points");
    auto rx = average_ranks(points, true);
    auto ry = average_ranks(points, false);
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += rx[i];
        my += ry[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
        sxy += (rx[i] - mx) * (ry[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return 0.0;  // a fully tied side
    return sxy / std::sqrt(sxx * syy);
}

TrendStats compute_trend(std::span<const Point> points) {
    TrendStats t = linear_regression(points);
    t.spearman_rho = points.size() >= 3 ? spearman_rho(points) : 0.0;
    return t;
}

}  // namespace effdim
