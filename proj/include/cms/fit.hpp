#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace cms {

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

// Ordinary least squares y = intercept + slope * x.
inline LinearFit linear_fit(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 2)
        throw std::invalid_argument("linear_fit needs >= 2 paired samples");
    size_t n = xs.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < n; ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    LinearFit f;
    double den = double(n) * sxx - sx * sx;
    if (den == 0) throw std::invalid_argument("linear_fit: degenerate x values");
    f.slope = (double(n) * sxy - sx * sy) / den;
    f.intercept = (sy - f.slope * sx) / double(n);
    double ssr = 0, sst = 0, ybar = sy / double(n);
    for (size_t i = 0; i < n; ++i) {
        double e = ys[i] - (f.intercept + f.slope * xs[i]);
        ssr += e * e;
        sst += (ys[i] - ybar) * (ys[i] - ybar);
    }
    f.r2 = sst > 0 ? 1.0 - ssr / sst : 1.0;
    return f;
}

}  // namespace cms
