#include "cxlag/parallel.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

#include "cxlag/errors.hpp"

namespace cxlag {

void evaluate_batch(const Program &program, std::span<const double> points, std::size_t stride,
                    std::span<complex> out, Execution exec)
{
    if (stride == 0 || points.size() % stride != 0 || points.size() / stride != out.size()) {
        throw LengthMismatch("evaluate_batch: point buffer does not match output length");
    }
    const auto rows = out.size();
    if (exec == Execution::serial) {
        for (std::size_t r = 0; r < rows; ++r) {
            out[r] = program(points.subspan(r * stride, stride));
        }
        return;
    }
    std::exception_ptr failure;
    const auto count = static_cast<long long>(rows);
#pragma omp parallel for schedule(static)
    for (long long r = 0; r < count; ++r) {
        const auto row = static_cast<std::size_t>(r);
        try {
            out[row] = program(points.subspan(row * stride, stride));
        } catch (...) {
#pragma omp critical(cxlag_batch_failure)
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
}

int worker_count() noexcept
{
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

} // namespace cxlag
