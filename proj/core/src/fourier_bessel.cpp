#include "acda/fourier_bessel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace acda {

namespace {

// Power series sum_k (-1)^k (x/2)^(n+2k) / (k! (n+k)!). Accurate for small x;
// past x ~ 15 the alternating terms grow large enough to eat double precision,
// which is why larger arguments switch to the downward recurrence below.
double bessel_series(int n, double x) {
  const double half = 0.5 * x;
  double term = 1.0;
  for (int i = 1; i <= n; ++i) term *= half / i;  // (x/2)^n / n!
  double sum = term;
  const double neg_q = -half * half;
  for (int k = 1; k <= 60; ++k) {
    term *= neg_q / (static_cast<double>(k) * (n + k));
    sum += term;
    if (std::abs(term) < 1e-18 * (std::abs(sum) + 1e-30) && k > 4) break;
  }
  return sum;
}

// Miller's downward recurrence, normalized by J_0 + 2*sum_k J_{2k} = 1.
// Stable for order < x; the start order is padded well above x so the
// unnormalized seed error has decayed away by the time it reaches low orders.
double bessel_miller(int n, double x) {
  const int start = static_cast<int>(x) + 52 + n;
  const int m = start + (start % 2);  // even start keeps the normalization sum aligned
  double jp = 0.0;   // J_{k+1} (unnormalized)
  double jc = 1e-30; // J_k
  double norm = 0.0;
  double result = 0.0;
  for (int k = m; k >= 1; --k) {
    const double jm = (2.0 * k / x) * jc - jp;
    jp = jc;
    jc = jm;
    if (k - 1 == n) result = jc;
    if ((k - 1) % 2 == 0) norm += (k - 1 == 0) ? jc : 2.0 * jc;
    // Rescale when the dominant solution grows too large.
    if (std::abs(jc) > 1e250) {
      jc *= 1e-250;
      jp *= 1e-250;
      norm *= 1e-250;
      result *= 1e-250;
    }
  }
  return result / norm;
}

}  // namespace

double bessel_j(int order, double x) {
  detail::check(order >= 0, "bessel_j order must be non-negative");
  detail::check(x >= 0.0, "bessel_j requires x >= 0");
  if (x == 0.0) return order == 0 ? 1.0 : 0.0;
  if (x <= 12.0) return bessel_series(order, x);
  return bessel_miller(order, x);
}

double bessel_zero(int order, int k) {
  detail::check(order >= 0, "bessel_zero order must be non-negative");
  detail::check(k >= 1, "bessel_zero index must be positive");
  // Scan for the k-th sign change; consecutive zeros of J_n are at least ~pi
  // apart, so a 0.25 step cannot skip one.
  const double step = 0.25;
  double lo = std::max(static_cast<double>(order), 0.5);
  double flo = bessel_j(order, lo);
  int found = 0;
  for (int i = 0; i < 4000; ++i) {
    const double hi = lo + step;
    const double fhi = bessel_j(order, hi);
    if ((flo < 0.0) != (fhi < 0.0)) {
      ++found;
      if (found == k) {
        double a = lo, b = hi, fa = flo;
        for (int it = 0; it < 200 && (b - a) > 1e-13; ++it) {
          const double mid = 0.5 * (a + b);
          const double fm = bessel_j(order, mid);
          if ((fa < 0.0) != (fm < 0.0)) {
            b = mid;
          } else {
            a = mid;
            fa = fm;
          }
        }
        return 0.5 * (a + b);
      }
    }
    lo = hi;
    flo = fhi;
  }
  throw std::runtime_error("bessel_zero: root scan exhausted");
}

std::vector<FbMode> fb_mode_schedule(Index m_prime) {
  detail::check(m_prime >= 1 && m_prime <= 8, "basis count must be in [1,8]");
  static const FbMode schedule[8] = {
      {0, 1, false}, {1, 1, false}, {1, 1, true}, {2, 1, false},
      {2, 1, true},  {0, 2, false}, {3, 1, false}, {3, 1, true},
  };
  return std::vector<FbMode>(schedule, schedule + m_prime);
}

Tensor<double> build_fb_scale(Index l, Index m_prime) {
  detail::check(l == 3 || l == 5 || l == 7, "supported basis scales are 3, 5, 7");
  const auto modes = fb_mode_schedule(m_prime);
  const Index ctr = (l - 1) / 2;
  const double r = 0.5 * static_cast<double>(l + 1);  // disk radius
  Tensor<double> out({m_prime, l, l});
  for (Index e = 0; e < m_prime; ++e) {
    const FbMode mode = modes[static_cast<size_t>(e)];
    const double lambda = bessel_zero(mode.n, mode.k);
    double norm_sq = 0.0;
    for (Index u = 0; u < l; ++u)
      for (Index v = 0; v < l; ++v) {
        const double du = static_cast<double>(u - ctr);
        const double dv = static_cast<double>(v - ctr);
        const double rho = std::hypot(du, dv);
        double val = 0.0;
        if (rho <= r) {
          const double radial = bessel_j(mode.n, lambda * rho / r);
          const double phi = std::atan2(du, dv);
          const double ang = mode.n == 0 ? 1.0
                            : mode.sine ? std::sin(mode.n * phi)
                                        : std::cos(mode.n * phi);
          val = radial * ang;
        }
        out[(e * l + u) * l + v] = val;
        norm_sq += val * val;
      }
    const double inv = 1.0 / std::sqrt(norm_sq);
    for (Index i = 0; i < l * l; ++i) out[e * l * l + i] *= inv;
  }
  return out;
}

BasisSet build_multiscale(const std::vector<Index>& scales, Index m_prime) {
  detail::check(!scales.empty(), "at least one basis scale required");
  for (size_t s = 0; s < scales.size(); ++s) {
    detail::check(scales[s] % 2 == 1 && scales[s] >= 1, "basis scales must be odd");
    if (s > 0) detail::check(scales[s] > scales[s - 1], "basis scales must ascend");
  }
  const Index L = scales.back();
  BasisSet set;
  set.scales = scales;
  set.elements_per_scale = m_prime;
  set.padded_size = L;
  set.bases = Tensor<double>({static_cast<Index>(scales.size()) * m_prime, L, L});
  for (size_t s = 0; s < scales.size(); ++s) {
    const Index l = scales[s];
    const Tensor<double> elems = build_fb_scale(l, m_prime);  // unit norm already
    if (smallest_singular_value(elems.reshaped({m_prime, l * l})) <= 1e-6)
      throw std::invalid_argument("basis elements at one scale are linearly dependent");
    const Index off = (L - l) / 2;
    for (Index e = 0; e < m_prime; ++e)
      for (Index u = 0; u < l; ++u)
        for (Index v = 0; v < l; ++v)
          set.bases[((static_cast<Index>(s) * m_prime + e) * L + off + u) * L + off + v] =
              elems[(e * l + u) * l + v];
  }
  return set;
}

double smallest_singular_value(const Tensor<double>& mat) {
  detail::check(mat.rank() == 2, "smallest_singular_value expects a matrix");
  const Index m = mat.extent(0), n = mat.extent(1);
  detail::check(m <= n, "expects rows <= cols");
  // Gram matrix G = M M^T; singular values are sqrt of its eigenvalues.
  std::vector<double> g(static_cast<size_t>(m * m), 0.0);
  for (Index i = 0; i < m; ++i)
    for (Index j = i; j < m; ++j) {
      double s = 0.0;
      for (Index k = 0; k < n; ++k) s += mat[i * n + k] * mat[j * n + k];
      g[static_cast<size_t>(i * m + j)] = s;
      g[static_cast<size_t>(j * m + i)] = s;
    }
  // Cyclic Jacobi sweeps.
  for (int sweep = 0; sweep < 60; ++sweep) {
    double off = 0.0;
    for (Index p = 0; p < m; ++p)
      for (Index q = p + 1; q < m; ++q) off += std::abs(g[static_cast<size_t>(p * m + q)]);
    if (off < 1e-300) break;
    for (Index p = 0; p < m; ++p)
      for (Index q = p + 1; q < m; ++q) {
        const double apq = g[static_cast<size_t>(p * m + q)];
        if (std::abs(apq) < 1e-300) continue;
        const double app = g[static_cast<size_t>(p * m + p)];
        const double aqq = g[static_cast<size_t>(q * m + q)];
        const double theta = 0.5 * std::atan2(2.0 * apq, aqq - app);
        const double c = std::cos(theta), s = std::sin(theta);
        for (Index k = 0; k < m; ++k) {
          const double gpk = g[static_cast<size_t>(p * m + k)];
          const double gqk = g[static_cast<size_t>(q * m + k)];
          g[static_cast<size_t>(p * m + k)] = c * gpk - s * gqk;
          g[static_cast<size_t>(q * m + k)] = s * gpk + c * gqk;
        }
        for (Index k = 0; k < m; ++k) {
          const double gkp = g[static_cast<size_t>(k * m + p)];
          const double gkq = g[static_cast<size_t>(k * m + q)];
          g[static_cast<size_t>(k * m + p)] = c * gkp - s * gkq;
          g[static_cast<size_t>(k * m + q)] = s * gkp + c * gkq;
        }
      }
  }
  double lmin = g[0];
  for (Index i = 1; i < m; ++i) lmin = std::min(lmin, g[static_cast<size_t>(i * m + i)]);
  return std::sqrt(std::max(lmin, 0.0));
}

}  // namespace acda
