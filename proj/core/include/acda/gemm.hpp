#pragma once

#include <algorithm>
#include <cmath>

#include "acda/tensor.hpp"

namespace acda::detail {

// Row-major C (+)= A[M,K] * B[K,N]. Every output element accumulates strictly in
// ascending k with one fused multiply-add per step, so the result is bit-identical
// to a plain sequential dot product and reproducible for a fixed build.
//
// Register tiling: MR output rows x NR output columns held in local accumulators;
// cache blocking over K and N keeps the active B panel L2-resident.

template <typename T>
struct GemmTile {
  static constexpr int kRows = 6;
  static constexpr int kCols = 128 / sizeof(T);  // two 512-bit lanes per row
};

template <typename T, int MR, int NR>
inline void gemm_microkernel(Index kc, const T* a, Index lda, const T* b, Index ldb,
                             T* c, Index ldc, bool accumulate) {
  T acc[MR][NR];
  if (accumulate) {
    for (int r = 0; r < MR; ++r)
      for (int n = 0; n < NR; ++n) acc[r][n] = c[r * ldc + n];
  } else {
    for (int r = 0; r < MR; ++r)
      for (int n = 0; n < NR; ++n) acc[r][n] = T(0);
  }
  for (Index k = 0; k < kc; ++k) {
    const T* brow = b + k * ldb;
    for (int r = 0; r < MR; ++r) {
      const T av = a[r * lda + k];
      for (int n = 0; n < NR; ++n) acc[r][n] = std::fma(av, brow[n], acc[r][n]);
    }
  }
  for (int r = 0; r < MR; ++r)
    for (int n = 0; n < NR; ++n) c[r * ldc + n] = acc[r][n];
}

template <typename T>
inline void gemm_edge(Index mr, Index nr, Index kc, const T* a, Index lda, const T* b,
                      Index ldb, T* c, Index ldc, bool accumulate) {
  constexpr int MR = GemmTile<T>::kRows;
  constexpr int NR = GemmTile<T>::kCols;
  T acc[MR][NR];
  for (Index r = 0; r < mr; ++r)
    for (Index n = 0; n < nr; ++n) acc[r][n] = accumulate ? c[r * ldc + n] : T(0);
  for (Index k = 0; k < kc; ++k) {
    const T* brow = b + k * ldb;
    for (Index r = 0; r < mr; ++r) {
      const T av = a[r * lda + k];
      for (Index n = 0; n < nr; ++n) acc[r][n] = std::fma(av, brow[n], acc[r][n]);
    }
  }
  for (Index r = 0; r < mr; ++r)
    for (Index n = 0; n < nr; ++n) c[r * ldc + n] = acc[r][n];
}

template <typename T>
void gemm(Index m, Index n, Index k, const T* a, Index lda, const T* b, Index ldb,
          T* c, Index ldc, bool accumulate = false) {
  constexpr int MR = GemmTile<T>::kRows;
  constexpr int NR = GemmTile<T>::kCols;
  constexpr Index KB = 256;
  constexpr Index NB = 512;

  for (Index k0 = 0; k0 < k; k0 += KB) {
    const Index kc = std::min<Index>(KB, k - k0);
    const bool acc_block = accumulate || k0 > 0;
    for (Index n0 = 0; n0 < n; n0 += NB) {
      const Index nc = std::min<Index>(NB, n - n0);
      for (Index i = 0; i < m; i += MR) {
        const Index mr = std::min<Index>(MR, m - i);
        const T* ablock = a + i * lda + k0;
        Index j = 0;
        if (mr == MR) {
          for (; j + NR <= nc; j += NR)
            gemm_microkernel<T, MR, NR>(kc, ablock, lda, b + k0 * ldb + n0 + j, ldb,
                                        c + i * ldc + n0 + j, ldc, acc_block);
        }
        for (; j < nc; j += NR)
          gemm_edge(mr, std::min<Index>(NR, nc - j), kc, ablock, lda,
                    b + k0 * ldb + n0 + j, ldb, c + i * ldc + n0 + j, ldc, acc_block);
      }
    }
  }
}

}  // namespace acda::detail
