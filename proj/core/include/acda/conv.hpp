#pragma once

#include <optional>

#include "acda/gemm.hpp"
#include "acda/tensor.hpp"

namespace acda {

namespace detail {

// Source row/column lookup for a kernel offset under a padding mode; -1 means
// the tap reads outside the input and contributes zero.
inline Index pad_index(Index p, Index extent, PaddingMode mode) {
  if (p >= 0 && p < extent) return p;
  if (mode == PaddingMode::kCircular) return ((p % extent) + extent) % extent;
  return -1;
}

// Filter laid out in unfold order: row k, column (cp*l + a)*l + b holds
// K[k, cp, l-1-a, l-1-b]. Eq-style true convolution reduces to a plain
// matrix product against unfold columns with this layout.
template <typename T>
Tensor<T> flip_filter(const Tensor<T>& filter) {
  const Index c = filter.extent(0), cp = filter.extent(1), l = filter.extent(2);
  Tensor<T> flat({c, cp * l * l});
  for (Index k = 0; k < c; ++k)
    for (Index q = 0; q < cp; ++q)
      for (Index a = 0; a < l; ++a)
        for (Index b = 0; b < l; ++b)
          flat[k * cp * l * l + (q * l + a) * l + b] =
              filter[((k * cp + q) * l + (l - 1 - a)) * l + (l - 1 - b)];
  return flat;
}

template <typename T>
Tensor<T> unflip_filter(const Tensor<T>& flat, Index cp, Index l) {
  const Index c = flat.extent(0);
  Tensor<T> filter({c, cp, l, l});
  for (Index k = 0; k < c; ++k)
    for (Index q = 0; q < cp; ++q)
      for (Index a = 0; a < l; ++a)
        for (Index b = 0; b < l; ++b)
          filter[((k * cp + q) * l + (l - 1 - a)) * l + (l - 1 - b)] =
              flat[k * cp * l * l + (q * l + a) * l + b];
  return filter;
}

// Transposed unfold, [h*w, c*l*l]; row-contiguous patches for the dW product.
template <typename T>
Tensor<T> im2row(const Tensor<T>& in, Index l, PaddingMode mode) {
  const Index c = in.extent(0), h = in.extent(1), w = in.extent(2);
  const Index d = l / 2;
  Tensor<T> rows({h * w, c * l * l});
  const T* x = in.data();
  T* r = rows.data();
  for (Index i = 0; i < h; ++i)
    for (Index j = 0; j < w; ++j) {
      T* row = r + (i * w + j) * c * l * l;
      for (Index q = 0; q < c; ++q)
        for (Index a = 0; a < l; ++a) {
          const Index si = pad_index(i + a - d, h, mode);
          for (Index b = 0; b < l; ++b) {
            const Index sj = pad_index(j + b - d, w, mode);
            row[(q * l + a) * l + b] =
                (si < 0 || sj < 0) ? T(0) : x[(q * h + si) * w + sj];
          }
        }
    }
  return rows;
}

// Adjoint of im2row: scatter-add patch rows back onto the [c,h,w] grid.
template <typename T>
Tensor<T> row2im(const Tensor<T>& rows, Index c, Index h, Index w, Index l,
                 PaddingMode mode) {
  const Index d = l / 2;
  Tensor<T> out({c, h, w});
  const T* src = rows.data();
  T* dst = out.data();
  for (Index i = 0; i < h; ++i)
    for (Index j = 0; j < w; ++j) {
      const T* row = src + (i * w + j) * c * l * l;
      for (Index q = 0; q < c; ++q)
        for (Index a = 0; a < l; ++a) {
          const Index si = pad_index(i + a - d, h, mode);
          if (si < 0) continue;
          for (Index b = 0; b < l; ++b) {
            const Index sj = pad_index(j + b - d, w, mode);
            if (sj < 0) continue;
            dst[(q * h + si) * w + sj] += row[(q * l + a) * l + b];
          }
        }
    }
  return out;
}

// Adjoint of unfold: scatter-add columns back onto the [c,h,w] grid.
template <typename T>
Tensor<T> col2im(const Tensor<T>& cols, Index c, Index h, Index w, Index l,
                 PaddingMode mode) {
  const Index d = l / 2;
  Tensor<T> out({c, h, w});
  const T* src = cols.data();
  T* dst = out.data();
  for (Index q = 0; q < c; ++q)
    for (Index a = 0; a < l; ++a)
      for (Index b = 0; b < l; ++b) {
        const Index row = (q * l + a) * l + b;
        for (Index i = 0; i < h; ++i) {
          const Index si = pad_index(i + a - d, h, mode);
          if (si < 0) continue;
          for (Index j = 0; j < w; ++j) {
            const Index sj = pad_index(j + b - d, w, mode);
            if (sj < 0) continue;
            dst[(q * h + si) * w + sj] += src[row * h * w + i * w + j];
          }
        }
      }
  return out;
}

}  // namespace detail

/// Extracts the size-floor(l/2) neighborhood of every position into a
/// [c*l*l, h*w] matrix. Column i*w+j lists the patch around (i,j) in
/// (channel, row-offset, col-offset) order.
template <typename T>
Tensor<T> unfold(const Tensor<T>& in, Index l, PaddingMode mode) {
  detail::check(in.rank() == 3, "unfold expects a [c,h,w] tensor");
  detail::check(l >= 1 && l % 2 == 1, "unfold kernel size must be odd and positive");
  const Index c = in.extent(0), h = in.extent(1), w = in.extent(2);
  detail::check(h >= 1 && w >= 1, "unfold needs nonempty spatial extents");
  const Index d = l / 2;
  Tensor<T> cols({c * l * l, h * w});
  const T* x = in.data();
  T* dst = cols.data();
  for (Index q = 0; q < c; ++q)
    for (Index a = 0; a < l; ++a)
      for (Index b = 0; b < l; ++b) {
        T* row = dst + ((q * l + a) * l + b) * h * w;
        for (Index i = 0; i < h; ++i) {
          const Index si = detail::pad_index(i + a - d, h, mode);
          if (si < 0) {
            for (Index j = 0; j < w; ++j) row[i * w + j] = T(0);
            continue;
          }
          const T* srow = x + (q * h + si) * w;
          for (Index j = 0; j < w; ++j) {
            const Index sj = detail::pad_index(j + b - d, w, mode);
            row[i * w + j] = sj < 0 ? T(0) : srow[sj];
          }
        }
      }
  return cols;
}

/// True convolution, stride 1, output resolution preserved:
/// out[k,i,j] = sum_{cp,u,v} filter[k,cp,d+u,d+v] * in[cp,i-u,j-v] + bias[k].
template <typename T>
Tensor<T> conv2d(const Tensor<T>& in, const Tensor<T>& filter,
                 const Tensor<T>* bias, PaddingMode mode) {
  detail::check(in.rank() == 3, "conv2d expects a [c',h,w] input");
  detail::check(filter.rank() == 4, "conv2d expects a [c,c',l,l] filter");
  const Index c = filter.extent(0), cp = filter.extent(1), l = filter.extent(2);
  detail::check(filter.extent(3) == l, "conv2d filter must be square");
  detail::check(l % 2 == 1, "conv2d kernel size must be odd");
  detail::check(cp == in.extent(0), "conv2d filter/input channel mismatch");
  if (bias) detail::check(bias->size() == c, "conv2d bias length mismatch");

  const Index h = in.extent(1), w = in.extent(2);
  const Tensor<T> cols = unfold(in, l, mode);
  const Tensor<T> flat = detail::flip_filter(filter);
  Tensor<T> out({c, h, w});
  detail::gemm<T>(c, h * w, cp * l * l, flat.data(), cp * l * l, cols.data(), h * w,
                  out.data(), h * w);
  if (bias)
    for (Index k = 0; k < c; ++k) {
      const T bk = (*bias)[k];
      T* row = out.data() + k * h * w;
      for (Index p = 0; p < h * w; ++p) row[p] += bk;
    }
  return out;
}

/// Per-position linear map: out[b,i,j] = sum_a weights[b,a] * in[a,i,j] + bias[b].
/// Equivalent to conv2d with a 1x1 kernel.
template <typename T>
Tensor<T> pointwise_conv(const Tensor<T>& in, const Tensor<T>& weights,
                         const Tensor<T>* bias) {
  detail::check(in.rank() == 3, "pointwise_conv expects a [a,h,w] input");
  detail::check(weights.rank() == 2, "pointwise_conv expects [b,a] weights");
  const Index a = weights.extent(1), b = weights.extent(0);
  detail::check(a == in.extent(0), "pointwise_conv weight/input channel mismatch");
  if (bias) detail::check(bias->size() == b, "pointwise_conv bias length mismatch");

  const Index h = in.extent(1), w = in.extent(2);
  Tensor<T> out({b, h, w});
  detail::gemm<T>(b, h * w, a, weights.data(), a, in.data(), h * w, out.data(), h * w);
  if (bias)
    for (Index k = 0; k < b; ++k) {
      const T bk = (*bias)[k];
      T* row = out.data() + k * h * w;
      for (Index p = 0; p < h * w; ++p) row[p] += bk;
    }
  return out;
}

namespace detail {

template <typename T>
Tensor<T> conv2d_backward_input(const Tensor<T>& dy, const Tensor<T>& filter,
                                PaddingMode mode) {
  const Index c = filter.extent(0), cp = filter.extent(1), l = filter.extent(2);
  const Index h = dy.extent(1), w = dy.extent(2);
  const Tensor<T> flat = flip_filter(filter);  // [c, cp*l*l]
  Tensor<T> flat_t({cp * l * l, c});
  for (Index k = 0; k < c; ++k)
    for (Index r = 0; r < cp * l * l; ++r) flat_t[r * c + k] = flat[k * cp * l * l + r];
  Tensor<T> dcols({cp * l * l, h * w});
  gemm<T>(cp * l * l, h * w, c, flat_t.data(), c, dy.data(), h * w, dcols.data(), h * w);
  return col2im(dcols, cp, h, w, l, mode);
}

template <typename T>
Tensor<T> conv2d_backward_filter(const Tensor<T>& dy, const Tensor<T>& in, Index l,
                                 PaddingMode mode) {
  const Index c = dy.extent(0), cp = in.extent(0);
  const Index h = in.extent(1), w = in.extent(2);
  const Tensor<T> rows = im2row(in, l, mode);  // [h*w, cp*l*l]
  Tensor<T> dflat({c, cp * l * l});
  gemm<T>(c, cp * l * l, h * w, dy.data(), h * w, rows.data(), cp * l * l,
          dflat.data(), cp * l * l);
  return unflip_filter(dflat, cp, l);
}

template <typename T>
Tensor<T> channel_sums(const Tensor<T>& dy) {
  const Index c = dy.extent(0), hw = dy.size() / dy.extent(0);
  Tensor<T> db({c});
  for (Index k = 0; k < c; ++k) {
    T s = 0;
    for (Index p = 0; p < hw; ++p) s += dy[k * hw + p];
    db[k] = s;
  }
  return db;
}

template <typename T>
Tensor<T> pointwise_backward_input(const Tensor<T>& dy, const Tensor<T>& weights) {
  const Index b = weights.extent(0), a = weights.extent(1);
  const Index hw = dy.extent(1) * dy.extent(2);
  Tensor<T> wt({a, b});
  for (Index k = 0; k < b; ++k)
    for (Index q = 0; q < a; ++q) wt[q * b + k] = weights[k * a + q];
  Tensor<T> dx({a, dy.extent(1), dy.extent(2)});
  gemm<T>(a, hw, b, wt.data(), b, dy.data(), hw, dx.data(), hw);
  return dx;
}

template <typename T>
Tensor<T> pointwise_backward_weights(const Tensor<T>& dy, const Tensor<T>& in) {
  const Index b = dy.extent(0), a = in.extent(0);
  const Index h = in.extent(1), w = in.extent(2);
  // dW = dY * X^T; transpose X once so the product streams row-major.
  Tensor<T> xt({h * w, a});
  for (Index q = 0; q < a; ++q)
    for (Index p = 0; p < h * w; ++p) xt[p * a + q] = in[q * h * w + p];
  Tensor<T> dw({b, a});
  gemm<T>(b, a, h * w, dy.data(), h * w, xt.data(), a, dw.data(), a);
  return dw;
}

}  // namespace detail

}  // namespace acda
