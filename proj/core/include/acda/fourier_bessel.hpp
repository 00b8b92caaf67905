#pragma once

#include <vector>

#include "acda/tensor.hpp"

namespace acda {

/// Bessel function of the first kind J_n(x) for n >= 0, x >= 0.
/// Absolute error <= 1e-10 on [0, 50] for the orders basis construction needs.
double bessel_j(int order, double x);

/// k-th positive root of J_order, located to better than 1e-9 absolute.
double bessel_zero(int order, int k);

/// One entry of the fixed basis-mode schedule: angular order n, radial index k,
/// and whether the angular factor is sin(n*phi) (cos otherwise).
struct FbMode {
  int n;
  int k;
  bool sine;
};

/// The mode schedule defining which elements "the first m'" are. Ordered by
/// increasing radial frequency lambda_{n,k}, cos before sin within an order:
/// (0,1), (1,1)cos, (1,1)sin, (2,1)cos, (2,1)sin, (0,2), (3,1)cos, (3,1)sin.
std::vector<FbMode> fb_mode_schedule(Index m_prime);

/// Fourier-Bessel modes sampled on an l x l grid, one row-major [m', l, l]
/// tensor, each element unit Frobenius norm. Supported scales: 3, 5, 7.
Tensor<double> build_fb_scale(Index l, Index m_prime);

/// S sets of m' basis elements at ascending odd scales, each zero-padded to the
/// largest scale L. Elements keep unit norm after padding.
struct BasisSet {
  std::vector<Index> scales;
  Index elements_per_scale = 0;
  Index padded_size = 0;
  Tensor<double> bases;  // [S*m', L, L]

  Index count() const { return bases.empty() ? 0 : bases.extent(0); }

  template <typename T>
  Tensor<T> cast() const {
    return bases.template cast<T>();
  }
};

BasisSet build_multiscale(const std::vector<Index>& scales, Index m_prime);

/// Smallest singular value of a rows x cols matrix (rows <= cols), computed
/// from the Gram matrix by cyclic Jacobi rotations.
double smallest_singular_value(const Tensor<double>& mat);

}  // namespace acda
