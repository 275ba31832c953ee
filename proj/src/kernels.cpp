#include "sdg/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

#if SDG_HAVE_X86
#include <immintrin.h>
#endif

namespace sdg::kernels {

void matmul_scalar(const double* A, int rows, int inner, const double* X, int ncols,
                   double* Y, bool accumulate) {
    for (int j = 0; j < ncols; ++j) {
        const double* x = X + static_cast<std::size_t>(j) * inner;
        double* y = Y + static_cast<std::size_t>(j) * rows;
        for (int i = 0; i < rows; ++i) {
            const double* a = A + static_cast<std::size_t>(i) * inner;
            double s = 0.0;
            for (int k = 0; k < inner; ++k) s += a[k] * x[k];
            y[i] = accumulate ? y[i] + s : s;
        }
    }
}

#if SDG_HAVE_X86
__attribute__((target("avx2,fma"))) static inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

__attribute__((target("avx2,fma"))) void matmul_avx2(const double* A, int rows, int inner,
                                                     const double* X, int ncols, double* Y,
                                                     bool accumulate) {
    const int vec_end = inner & ~3;
    for (int j = 0; j < ncols; ++j) {
        const double* x = X + static_cast<std::size_t>(j) * inner;
        double* y = Y + static_cast<std::size_t>(j) * rows;
        int i = 0;
        // two rows at a time to reuse the loads of x
        for (; i + 1 < rows; i += 2) {
            const double* a0 = A + static_cast<std::size_t>(i) * inner;
            const double* a1 = a0 + inner;
            __m256d acc0 = _mm256_setzero_pd();
            __m256d acc1 = _mm256_setzero_pd();
            int k = 0;
            for (; k < vec_end; k += 4) {
                __m256d xv = _mm256_loadu_pd(x + k);
                acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a0 + k), xv, acc0);
                acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a1 + k), xv, acc1);
            }
            double s0 = hsum(acc0);
            double s1 = hsum(acc1);
            for (; k < inner; ++k) {
                s0 += a0[k] * x[k];
                s1 += a1[k] * x[k];
            }
            y[i] = accumulate ? y[i] + s0 : s0;
            y[i + 1] = accumulate ? y[i + 1] + s1 : s1;
        }
        for (; i < rows; ++i) {
            const double* a = A + static_cast<std::size_t>(i) * inner;
            __m256d acc = _mm256_setzero_pd();
            int k = 0;
            for (; k < vec_end; k += 4)
                acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + k), _mm256_loadu_pd(x + k), acc);
            double s = hsum(acc);
            for (; k < inner; ++k) s += a[k] * x[k];
            y[i] = accumulate ? y[i] + s : s;
        }
    }
}
#endif

bool cpu_has_avx2() {
#if SDG_HAVE_X86
    static const bool has = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    return has;
#else
    return false;
#endif
}

namespace {

Isa initial_isa() {
    if (const char* env = std::getenv("SDG_ISA")) {
        if (std::strcmp(env, "scalar") == 0) return Isa::Scalar;
    }
    return cpu_has_avx2() ? Isa::Avx2 : Isa::Scalar;
}

std::atomic<Isa>& current() {
    static std::atomic<Isa> isa{initial_isa()};
    return isa;
}

}  // namespace

Isa active_isa() { return current().load(std::memory_order_relaxed); }

Isa select_isa(Isa isa) {
    if (isa == Isa::Avx2 && !cpu_has_avx2()) isa = Isa::Scalar;
    current().store(isa, std::memory_order_relaxed);
    return isa;
}

void matmul(const double* A, int rows, int inner, const double* X, int ncols, double* Y,
            bool accumulate) {
#if SDG_HAVE_X86
    if (active_isa() == Isa::Avx2) {
        matmul_avx2(A, rows, inner, X, ncols, Y, accumulate);
        return;
    }
#endif
    matmul_scalar(A, rows, inner, X, ncols, Y, accumulate);
}

}  // namespace sdg::kernels
