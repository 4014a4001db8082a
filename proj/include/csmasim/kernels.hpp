#pragma once

#include <cstddef>
#include <string_view>

namespace csmasim::kernels {

struct SumSq {
    double sum = 0.0;
    double sum_sq = 0.0;
};

// y[r] = sum_c m[r * stride + c] * x[c] for r < rows, c < cols.
using GemvFn = void (*)(const double* m, std::size_t rows, std::size_t cols, std::size_t stride,
                        const double* x, double* y);
using SumSqFn = SumSq (*)(const double* x, std::size_t n);

namespace scalar {
void gemv(const double* m, std::size_t rows, std::size_t cols, std::size_t stride, const double* x, double* y);
SumSq sum_sq(const double* x, std::size_t n);
}  // namespace scalar

#if defined(__x86_64__) || defined(__i386__)
#define CSMASIM_HAVE_AVX2_KERNELS 1
namespace avx2 {
void gemv(const double* m, std::size_t rows, std::size_t cols, std::size_t stride, const double* x, double* y);
SumSq sum_sq(const double* x, std::size_t n);
}  // namespace avx2
#endif

// True when the CPU can run the avx2 variants.
bool cpu_has_avx2();

// Implementations picked once per process from the CPU's features.
// CSMASIM_KERNELS=scalar in the environment forces the portable path.
GemvFn gemv_impl();
SumSqFn sum_sq_impl();
std::string_view active_isa();

inline void gemv(const double* m, std::size_t rows, std::size_t cols, std::size_t stride, const double* x,
                 double* y) {
    gemv_impl()(m, rows, cols, stride, x, y);
}
inline SumSq sum_sq(const double* x, std::size_t n) { return sum_sq_impl()(x, n); }

}  // namespace csmasim::kernels
