#pragma once

#include <cmath>
#include <complex>
#include <functional>

#include "cxlag/sampling.hpp"

namespace testing_support {

/// Fourth-order central difference of f at x.
inline std::complex<double> fd4(const std::function<std::complex<double>(double)> &f, double x, double h = 1e-3)
{
    return (-f(x + 2 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2 * h)) / (12.0 * h);
}

inline double fd4_real(const std::function<double(double)> &f, double x, double h = 1e-3)
{
    return (-f(x + 2 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2 * h)) / (12.0 * h);
}

/// |a - b| <= tol * max(1, |b|)
inline bool close(std::complex<double> a, std::complex<double> b, double tol)
{
    return std::abs(a - b) <= tol * std::max(1.0, std::abs(b));
}

} // namespace testing_support
