#include "csmasim/kernels.hpp"

#include <cstdlib>
#include <cstring>

#if defined(CSMASIM_HAVE_AVX2_KERNELS)
#include <immintrin.h>
#endif

namespace csmasim::kernels {

namespace scalar {

void gemv(const double* m, std::size_t rows, std::size_t cols, std::size_t stride, const double* x, double* y) {
    for (std::size_t r = 0; r < rows; ++r) {
        const double* row = m + r * stride;
        double acc = 0.0;
        for (std::size_t c = 0; c < cols; ++c) acc += row[c] * x[c];
        y[r] = acc;
    }
}

SumSq sum_sq(const double* x, std::size_t n) {
    SumSq out;
    for (std::size_t i = 0; i < n; ++i) {
        out.sum += x[i];
        out.sum_sq += x[i] * x[i];
    }
    return out;
}

}  // namespace scalar

#if defined(CSMASIM_HAVE_AVX2_KERNELS)
namespace avx2 {

namespace {

__attribute__((target("avx2,fma"))) inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

}  // namespace

__attribute__((target("avx2,fma"))) void gemv(const double* m, std::size_t rows, std::size_t cols,
                                              std::size_t stride, const double* x, double* y) {
    const std::size_t body = cols & ~std::size_t{3};
    for (std::size_t r = 0; r < rows; ++r) {
        const double* row = m + r * stride;
        __m256d acc = _mm256_setzero_pd();
        std::size_t c = 0;
        for (; c < body; c += 4) acc = _mm256_fmadd_pd(_mm256_loadu_pd(row + c), _mm256_loadu_pd(x + c), acc);
        double tail = 0.0;
        for (; c < cols; ++c) tail += row[c] * x[c];
        y[r] = hsum(acc) + tail;
    }
}

__attribute__((target("avx2,fma"))) SumSq sum_sq(const double* x, std::size_t n) {
    __m256d s = _mm256_setzero_pd();
    __m256d q = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d v = _mm256_loadu_pd(x + i);
        s = _mm256_add_pd(s, v);
        q = _mm256_fmadd_pd(v, v, q);
    }
    SumSq out{hsum(s), hsum(q)};
    for (; i < n; ++i) {
        out.sum += x[i];
        out.sum_sq += x[i] * x[i];
    }
    return out;
}

}  // namespace avx2
#endif

bool cpu_has_avx2() {
#if defined(CSMASIM_HAVE_AVX2_KERNELS)
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

namespace {

bool use_avx2() {
    static const bool pick = [] {
        const char* force = std::getenv("CSMASIM_KERNELS");
        if (force && std::strcmp(force, "scalar") == 0) return false;
        return cpu_has_avx2();
    }();
    return pick;
}

}  // namespace

GemvFn gemv_impl() {
#if defined(CSMASIM_HAVE_AVX2_KERNELS)
    if (use_avx2()) return &avx2::gemv;
#endif
    return &scalar::gemv;
}

SumSqFn sum_sq_impl() {
#if defined(CSMASIM_HAVE_AVX2_KERNELS)
    if (use_avx2()) return &avx2::sum_sq;
#endif
    return &scalar::sum_sq;
}

std::string_view active_isa() { return use_avx2() ? "avx2" : "scalar"; }

}  // namespace csmasim::kernels
