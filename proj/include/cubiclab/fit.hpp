#pragma once

// Log-log least-squares power-law fits.

#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace cubiclab {

inline constexpr std::size_t kMinFitPoints = 4;

struct ScalingFit {
    std::vector<double> x;
    std::vector<double> y;
    double slope = 0.0;
    double intercept = 0.0;      // log y = intercept + slope log x
    double half_width = 0.0;     // two-sided confidence half-width of the slope
    double confidence = 0.95;
};

// Points with y <= 0 cannot enter a log-log fit and are rejected.
inline ScalingFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y,
                                double confidence = 0.95, std::size_t min_points = kMinFitPoints) {
    if (x.size() != y.size()) throw std::invalid_argument("fit_power_law: length mismatch");
    if (x.size() < min_points)
        throw std::invalid_argument("fit_power_law: need at least " + std::to_string(min_points) + " points");
    const std::size_t n = x.size();
    std::vector<double> lx(n), ly(n);
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0) || !std::isfinite(x[i]) || !std::isfinite(y[i]))
            throw std::invalid_argument("fit_power_law: values must be positive and finite");
        lx[i] = std::log(x[i]);
        ly[i] = std::log(y[i]);
        mx += lx[i];
        my += ly[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    if (!(sxx > 0.0)) throw std::invalid_argument("fit_power_law: sweep values must not all coincide");

    ScalingFit f;
    f.x = x;
    f.y = y;
    f.confidence = confidence;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = ly[i] - f.intercept - f.slope * lx[i];
        rss += r * r;
    }
    const double dof = static_cast<double>(n) - 2.0;
    const boost::math::students_t dist(dof);
    const double t = boost::math::quantile(boost::math::complement(dist, 0.5 * (1.0 - confidence)));
    f.half_width = t * std::sqrt(rss / dof / sxx);
    return f;
}

}  // namespace cubiclab
