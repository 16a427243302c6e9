#pragma once

// Least-squares power-law fit err ~ C m^{-r} in log-log coordinates.

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>

namespace dkg::lab {

struct RateFit {
    double rate = 0.0;       ///< r, minus the log-log slope
    double log10_c = 0.0;    ///< intercept of log10(err) at m = 1
    double residual = 0.0;   ///< RMS of the log10 residuals
    std::size_t points = 0;

    double predict(double m) const { return std::pow(10.0, log10_c - rate * std::log10(m)); }
};

inline RateFit fit_rate(std::span<const double> masses, std::span<const double> errors) {
    if (masses.size() != errors.size()) throw std::invalid_argument("fit_rate: masses and errors differ in length");
    if (masses.size() < 3) throw std::invalid_argument("fit_rate: need at least three points");
    const auto n = static_cast<double>(masses.size());
    double sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < masses.size(); ++i) {
        if (!(masses[i] > 0.0) || !std::isfinite(masses[i])) throw std::domain_error("fit_rate: masses must be positive");
        if (!(errors[i] > 0.0) || !std::isfinite(errors[i]))
            throw std::domain_error("fit_rate: errors must be positive and finite");
        sx += std::log10(masses[i]);
        sy += std::log10(errors[i]);
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < masses.size(); ++i) {
        const double dx = std::log10(masses[i]) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log10(errors[i]) - my);
    }
    if (!(sxx > 0.0)) throw std::domain_error("fit_rate: masses must not all coincide");
    const double slope = sxy / sxx;

    RateFit f;
    f.rate = -slope;
    f.log10_c = my - slope * mx;
    f.points = masses.size();
    double ss = 0.0;
    for (std::size_t i = 0; i < masses.size(); ++i) {
        const double r = std::log10(errors[i]) - (f.log10_c + slope * std::log10(masses[i]));
        ss += r * r;
    }
    f.residual = std::sqrt(ss / n);
    return f;
}

}  // namespace dkg::lab
