#pragma once

// Data-parallel sweeps over independent sample points.  Every kernel has a serial reference path
// that produces bitwise-identical output; the parallel path distributes iterations with OpenMP.

#include <cstddef>
#include <exception>
#include <span>
#include <vector>

#include "cxlag/expr.hpp"

namespace cxlag {

enum class Execution { serial, parallel };

/// out[i] = fn(i) for i in [0, n).  The first exception thrown by any iteration is rethrown.
template <class R, class Fn>
std::vector<R> sweep(std::size_t n, Fn &&fn, Execution exec = Execution::parallel)
{
    std::vector<R> out(n);
    if (exec == Execution::serial) {
        for (std::size_t i = 0; i < n; ++i) {
            out[i] = fn(i);
        }
        return out;
    }

    std::exception_ptr failure;
    const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < count; ++i) {
        try {
            out[static_cast<std::size_t>(i)] = fn(static_cast<std::size_t>(i));
        } catch (...) {
#pragma omp critical(cxlag_sweep_failure)
            {
                if (!failure) {
                    failure = std::current_exception();
                }
            }
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
    return out;
}

/// Max of fn(i) over [0, n); 0 for n == 0.  Order-independent, so both paths agree exactly.
template <class Fn>
double sweep_max(std::size_t n, Fn &&fn, Execution exec = Execution::parallel)
{
    const auto values = sweep<double>(n, std::forward<Fn>(fn), exec);
    double best = 0.0;
    for (const double v : values) {
        best = v > best ? v : best;
    }
    return best;
}

/// Evaluate a compiled program at `rows` points stored row-major with `stride` slots each.
void evaluate_batch(const Program &program, std::span<const double> points, std::size_t stride,
                    std::span<complex> out, Execution exec = Execution::parallel);

/// Number of OpenMP threads the parallel path will use (1 when built without OpenMP).
int worker_count() noexcept;

} // namespace cxlag
