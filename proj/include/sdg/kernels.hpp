#pragma once
// Small dense kernels used by the per-cell reconstruction.
//
// All blocks are "variable-major": a block of ncols vectors of length n is
// stored as ncols contiguous runs of n doubles. The product kernel computes
//   Y[j][i] (+)= sum_k A[i][k] * X[j][k]
// for a row-major matrix A (rows x inner).

#include <cstddef>

namespace sdg::kernels {

enum class Isa { Scalar, Avx2 };

void matmul_scalar(const double* A, int rows, int inner, const double* X, int ncols,
                   double* Y, bool accumulate);

#if defined(__x86_64__) || defined(_M_X64)
#define SDG_HAVE_X86 1
void matmul_avx2(const double* A, int rows, int inner, const double* X, int ncols,
                 double* Y, bool accumulate);
#else
#define SDG_HAVE_X86 0
#endif

/// True when the running CPU supports the AVX2/FMA variant.
bool cpu_has_avx2();

/// Kernel currently selected by the dispatcher.
Isa active_isa();

/// Force a variant (tests and benchmarks). Requesting Avx2 on a CPU without it
/// falls back to Scalar. Returns the variant actually selected.
Isa select_isa(Isa isa);

/// Dispatched product.
void matmul(const double* A, int rows, int inner, const double* X, int ncols, double* Y,
            bool accumulate = false);

}  // namespace sdg::kernels
