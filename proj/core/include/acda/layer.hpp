#pragma once

#include <optional>
#include <string>

#include "acda/autodiff.hpp"
#include "acda/conv.hpp"
#include "acda/fourier_bessel.hpp"
#include "acda/rng.hpp"
#include "acda/tensor.hpp"

namespace acda {

// ---------------------------------------------------------------------------
// Kernels for the per-pixel operations. Atom and filter application use the
// true-convolution orientation: output at (i,j) reads input at (i-u, j-v) for
// kernel tap (d+u, d+v), matching conv2d. im2row patches list the neighborhood
// in ascending offsets, so the tap at flat index t pairs with patch entry
// L*L-1-t (a reversed dot product instead of materialized kernel flips).
// ---------------------------------------------------------------------------

namespace detail {

// ztilde[qq*m + b, i, j] = sum_{u,v} atoms[i,j,b,d+u,d+v] * x[qq, i-u, j-v]
template <typename T>
Tensor<T> atom_conv_forward(const Tensor<T>& x, const Tensor<T>& atoms,
                            PaddingMode mode) {
  const Index cp = x.extent(0), h = x.extent(1), w = x.extent(2);
  const Index m = atoms.extent(2), L = atoms.extent(3), LL = L * L;
  const Tensor<T> rows = im2row(x, L, mode);
  Tensor<T> out({cp * m, h, w});
  const Index hw = h * w;
  for (Index p = 0; p < hw; ++p) {
    const T* prow = rows.data() + p * cp * LL;
    for (Index b = 0; b < m; ++b) {
      const T* atom = atoms.data() + (p * m + b) * LL;
      for (Index qq = 0; qq < cp; ++qq) {
        const T* blk = prow + qq * LL;
        T acc = 0;
        for (Index t = 0; t < LL; ++t) acc = std::fma(atom[t], blk[LL - 1 - t], acc);
        out[(qq * m + b) * hw + p] = acc;
      }
    }
  }
  return out;
}

template <typename T>
Tensor<T> atom_conv_backward_atoms(const Tensor<T>& dz, const Tensor<T>& x,
                                   Index m, Index L, PaddingMode mode) {
  const Index cp = x.extent(0), h = x.extent(1), w = x.extent(2);
  const Index LL = L * L, hw = h * w;
  const Tensor<T> rows = im2row(x, L, mode);
  Tensor<T> datoms({h, w, m, L, L});
  for (Index p = 0; p < hw; ++p) {
    const T* prow = rows.data() + p * cp * LL;
    for (Index b = 0; b < m; ++b) {
      T* datom = datoms.data() + (p * m + b) * LL;
      for (Index qq = 0; qq < cp; ++qq) {
        const T g = dz[(qq * m + b) * hw + p];
        const T* blk = prow + qq * LL;
        for (Index t = 0; t < LL; ++t)
          datom[t] = std::fma(g, blk[LL - 1 - t], datom[t]);
      }
    }
  }
  return datoms;
}

template <typename T>
Tensor<T> atom_conv_backward_input(const Tensor<T>& dz, const Tensor<T>& atoms,
                                   Index cp, PaddingMode mode) {
  const Index h = atoms.extent(0), w = atoms.extent(1);
  const Index m = atoms.extent(2), L = atoms.extent(3), LL = L * L;
  const Index hw = h * w;
  Tensor<T> drows({hw, cp * LL});
  for (Index p = 0; p < hw; ++p) {
    T* prow = drows.data() + p * cp * LL;
    for (Index b = 0; b < m; ++b) {
      const T* atom = atoms.data() + (p * m + b) * LL;
      for (Index qq = 0; qq < cp; ++qq) {
        const T g = dz[(qq * m + b) * hw + p];
        T* blk = prow + qq * LL;
        for (Index t = 0; t < LL; ++t)
          blk[LL - 1 - t] = std::fma(g, atom[t], blk[LL - 1 - t]);
      }
    }
  }
  return row2im(drows, cp, h, w, L, mode);
}

// out[k,i,j] = sum_{qq,u,v} filters[i,j,k,qq,d+u,d+v] * x[qq,i-u,j-v] + bias[k]
template <typename T>
Tensor<T> per_pixel_conv_forward(const Tensor<T>& x, const Tensor<T>& filters,
                                 const Tensor<T>* bias, PaddingMode mode) {
  const Index cp = x.extent(0), h = x.extent(1), w = x.extent(2);
  const Index c = filters.extent(2), L = filters.extent(4), LL = L * L;
  const Index hw = h * w;
  const Tensor<T> rows = im2row(x, L, mode);
  Tensor<T> out({c, h, w});
  for (Index p = 0; p < hw; ++p) {
    const T* prow = rows.data() + p * cp * LL;
    for (Index k = 0; k < c; ++k) {
      const T* f = filters.data() + (p * c + k) * cp * LL;
      T acc = bias ? (*bias)[k] : T(0);
      for (Index qq = 0; qq < cp; ++qq) {
        const T* blk = prow + qq * LL;
        const T* fq = f + qq * LL;
        for (Index t = 0; t < LL; ++t) acc = std::fma(fq[t], blk[LL - 1 - t], acc);
      }
      out[k * hw + p] = acc;
    }
  }
  return out;
}

template <typename T>
Tensor<T> per_pixel_conv_backward_filters(const Tensor<T>& dy, const Tensor<T>& x,
                                          Index c, Index L, PaddingMode mode) {
  const Index cp = x.extent(0), h = x.extent(1), w = x.extent(2);
  const Index LL = L * L, hw = h * w;
  const Tensor<T> rows = im2row(x, L, mode);
  Tensor<T> df({h, w, c, cp, L, L});
  for (Index p = 0; p < hw; ++p) {
    const T* prow = rows.data() + p * cp * LL;
    for (Index k = 0; k < c; ++k) {
      const T g = dy[k * hw + p];
      T* f = df.data() + (p * c + k) * cp * LL;
      for (Index qq = 0; qq < cp; ++qq) {
        const T* blk = prow + qq * LL;
        T* fq = f + qq * LL;
        for (Index t = 0; t < LL; ++t) fq[t] = std::fma(g, blk[LL - 1 - t], fq[t]);
      }
    }
  }
  return df;
}

template <typename T>
Tensor<T> per_pixel_conv_backward_input(const Tensor<T>& dy, const Tensor<T>& filters,
                                        Index cp, PaddingMode mode) {
  const Index h = filters.extent(0), w = filters.extent(1);
  const Index c = filters.extent(2), L = filters.extent(4), LL = L * L;
  const Index hw = h * w;
  Tensor<T> drows({hw, cp * LL});
  for (Index p = 0; p < hw; ++p) {
    T* prow = drows.data() + p * cp * LL;
    for (Index k = 0; k < c; ++k) {
      const T g = dy[k * hw + p];
      const T* f = filters.data() + (p * c + k) * cp * LL;
      for (Index qq = 0; qq < cp; ++qq) {
        T* blk = prow + qq * LL;
        const T* fq = f + qq * LL;
        for (Index t = 0; t < LL; ++t)
          blk[LL - 1 - t] = std::fma(g, fq[t], blk[LL - 1 - t]);
      }
    }
  }
  return row2im(drows, cp, h, w, L, mode);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Differentiable forms.
// ---------------------------------------------------------------------------

namespace ops {

/// Reorders generator output channels [m*q, h, w] into per-position basis
/// coefficients [h, w, m, q]; channel b*q + qq feeds atom b, basis element qq.
template <typename T>
Index alpha_from_channels(Tape<T>& tape, Index x, Index m) {
  const Tensor<T>& in = tape.value(x);
  detail::check(in.rank() == 3 && in.extent(0) % m == 0,
                "generator output channels must be a multiple of the atom count");
  const Index q = in.extent(0) / m, h = in.extent(1), w = in.extent(2);
  const Index hw = h * w;
  Tensor<T> alpha({h, w, m, q});
  for (Index b = 0; b < m; ++b)
    for (Index qq = 0; qq < q; ++qq) {
      const T* src = in.data() + (b * q + qq) * hw;
      for (Index p = 0; p < hw; ++p) alpha[(p * m + b) * q + qq] = src[p];
    }
  return tape.push(std::move(alpha), {x},
                   [m, q, hw](Tape<T>& t, const std::vector<Index>& in_slots, Index out) {
                     const Tensor<T>& dalpha = t.grad(out);
                     Tensor<T> dx(t.value(in_slots[0]).shape());
                     for (Index b = 0; b < m; ++b)
                       for (Index qq = 0; qq < q; ++qq) {
                         T* dst = dx.data() + (b * q + qq) * hw;
                         for (Index p = 0; p < hw; ++p)
                           dst[p] = dalpha[(p * m + b) * q + qq];
                       }
                     t.add_grad(in_slots[0], dx);
                   });
}

/// atoms[i,j,b] = sum_qq alpha[i,j,b,qq] * psi[qq]; psi is fixed (not trained).
template <typename T>
Index reconstruct_atoms(Tape<T>& tape, Index alpha, const Tensor<T>& bases) {
  const Tensor<T>& a = tape.value(alpha);
  detail::check(a.rank() == 4, "alpha must be [h,w,m,q]");
  detail::check(bases.rank() == 3, "bases must be [q,L,L]");
  const Index q = bases.extent(0), L = bases.extent(1);
  detail::check(a.extent(3) == q, "alpha basis extent does not match basis count");
  const Index h = a.extent(0), w = a.extent(1), m = a.extent(2);
  Tensor<T> atoms({h, w, m, L, L});
  detail::gemm<T>(h * w * m, L * L, q, a.data(), q, bases.data(), L * L,
                  atoms.data(), L * L);
  // Transposed basis matrix for the adjoint.
  Tensor<T> bases_t({L * L, q});
  for (Index i = 0; i < q; ++i)
    for (Index t = 0; t < L * L; ++t) bases_t[t * q + i] = bases[i * L * L + t];
  return tape.push(std::move(atoms), {alpha},
                   [bt = std::move(bases_t), q, L](Tape<T>& t, const std::vector<Index>& in,
                                                   Index out) {
                     const Tensor<T>& datoms = t.grad(out);
                     const Tensor<T>& av = t.value(in[0]);
                     Tensor<T> dalpha(av.shape());
                     detail::gemm<T>(av.size() / q, q, L * L, datoms.data(), L * L,
                                     bt.data(), q, dalpha.data(), q);
                     t.add_grad(in[0], dalpha);
                   });
}

/// filters[i,j,k,cp] = sum_b A[k, cp*m + b] * atoms[i,j,b]
template <typename T>
Index reconstruct_filters(Tape<T>& tape, Index atoms, Index coeff) {
  const Tensor<T>& d = tape.value(atoms);
  const Tensor<T>& a = tape.value(coeff);
  detail::check(d.rank() == 5, "atoms must be [h,w,m,L,L]");
  detail::check(a.rank() == 2, "coefficients must be [c, c'*m]");
  const Index h = d.extent(0), w = d.extent(1), m = d.extent(2), L = d.extent(3);
  detail::check(a.extent(1) % m == 0, "coefficient inner extent must be c'*m");
  const Index cp = a.extent(1) / m, c = a.extent(0);
  const Index LL = L * L, hw = h * w, rows = c * cp;
  Tensor<T> filters({h, w, c, cp, L, L});
  // A[c, cp*m] viewed as [c*cp, m]: row k*cp+qq, column b.
  for (Index p = 0; p < hw; ++p) {
    const T* dp = d.data() + p * m * LL;
    T* fp = filters.data() + p * rows * LL;
    for (Index r = 0; r < rows; ++r) {
      const T* arow = a.data() + r * m;
      T* frow = fp + r * LL;
      for (Index t = 0; t < LL; ++t) frow[t] = T(0);
      for (Index b = 0; b < m; ++b) {
        const T av = arow[b];
        const T* db = dp + b * LL;
        for (Index t = 0; t < LL; ++t) frow[t] = std::fma(av, db[t], frow[t]);
      }
    }
  }
  return tape.push(
      std::move(filters), {atoms, coeff},
      [m, cp, c, L](Tape<T>& t, const std::vector<Index>& in, Index out) {
        const Tensor<T>& df = t.grad(out);
        const Tensor<T>& d = t.value(in[0]);
        const Tensor<T>& a = t.value(in[1]);
        const Index h = d.extent(0), w = d.extent(1), LL = L * L;
        const Index hw = h * w, rows = c * cp;
        if (t.requires_grad(in[0])) {
          Tensor<T> dd(d.shape());
          for (Index p = 0; p < hw; ++p) {
            const T* dfp = df.data() + p * rows * LL;
            T* ddp = dd.data() + p * m * LL;
            for (Index r = 0; r < rows; ++r) {
              const T* frow = dfp + r * LL;
              const T* arow = a.data() + r * m;
              for (Index b = 0; b < m; ++b) {
                const T av = arow[b];
                T* db = ddp + b * LL;
                for (Index t2 = 0; t2 < LL; ++t2)
                  db[t2] = std::fma(av, frow[t2], db[t2]);
              }
            }
          }
          t.add_grad(in[0], dd);
        }
        if (t.requires_grad(in[1])) {
          Tensor<T> da(a.shape());
          for (Index p = 0; p < hw; ++p) {
            const T* dfp = df.data() + p * rows * LL;
            const T* dp = d.data() + p * m * LL;
            for (Index r = 0; r < rows; ++r) {
              const T* frow = dfp + r * LL;
              T* darow = da.data() + r * m;
              for (Index b = 0; b < m; ++b) {
                const T* db = dp + b * LL;
                T acc = 0;
                for (Index t2 = 0; t2 < LL; ++t2) acc = std::fma(frow[t2], db[t2], acc);
                darow[b] += acc;
              }
            }
          }
          t.add_grad(in[1], da);
        }
      });
}

template <typename T>
Index atom_conv(Tape<T>& tape, Index x, Index atoms, PaddingMode mode) {
  const Tensor<T>& xv = tape.value(x);
  const Tensor<T>& av = tape.value(atoms);
  detail::check(xv.rank() == 3 && av.rank() == 5, "atom_conv expects [c',h,w] and [h,w,m,L,L]");
  detail::check(av.extent(0) == xv.extent(1) && av.extent(1) == xv.extent(2),
                "atom grid must match input resolution");
  Tensor<T> out = detail::atom_conv_forward(xv, av, mode);
  const Index m = av.extent(2), L = av.extent(3), cp = xv.extent(0);
  return tape.push(std::move(out), {x, atoms},
                   [m, L, cp, mode](Tape<T>& t, const std::vector<Index>& in, Index out_slot) {
                     const Tensor<T>& dz = t.grad(out_slot);
                     if (t.requires_grad(in[1]))
                       t.add_grad(in[1], detail::atom_conv_backward_atoms(
                                             dz, t.value(in[0]), m, L, mode));
                     if (t.requires_grad(in[0]))
                       t.add_grad(in[0], detail::atom_conv_backward_input(
                                             dz, t.value(in[1]), cp, mode));
                   });
}

template <typename T>
Index per_pixel_conv(Tape<T>& tape, Index x, Index filters, std::optional<Index> bias,
                     PaddingMode mode) {
  const Tensor<T>& xv = tape.value(x);
  const Tensor<T>& fv = tape.value(filters);
  detail::check(xv.rank() == 3 && fv.rank() == 6,
                "per_pixel_conv expects [c',h,w] and [h,w,c,c',L,L]");
  detail::check(fv.extent(0) == xv.extent(1) && fv.extent(1) == xv.extent(2),
                "filter grid must match input resolution");
  detail::check(fv.extent(3) == xv.extent(0), "per-pixel filter channel mismatch");
  const Tensor<T>* b = bias ? &tape.value(*bias) : nullptr;
  Tensor<T> out = detail::per_pixel_conv_forward(xv, fv, b, mode);
  std::vector<Index> inputs = {x, filters};
  if (bias) inputs.push_back(*bias);
  const Index c = fv.extent(2), L = fv.extent(4), cp = xv.extent(0);
  return tape.push(std::move(out), std::move(inputs),
                   [c, L, cp, mode](Tape<T>& t, const std::vector<Index>& in, Index out_slot) {
                     const Tensor<T>& dy = t.grad(out_slot);
                     if (t.requires_grad(in[1]))
                       t.add_grad(in[1], detail::per_pixel_conv_backward_filters(
                                             dy, t.value(in[0]), c, L, mode));
                     if (t.requires_grad(in[0]))
                       t.add_grad(in[0], detail::per_pixel_conv_backward_input(
                                             dy, t.value(in[1]), cp, mode));
                     if (in.size() > 2 && t.requires_grad(in[2]))
                       t.add_grad(in[2], detail::channel_sums(dy));
                   });
}

}  // namespace ops

// ---------------------------------------------------------------------------
// Layer types.
// ---------------------------------------------------------------------------

/// Two-layer convolutional atom generation network: 1x1 squeeze to the hidden
/// width, rectifier, then a 3x3 layer emitting m * S * m' coefficient channels.
template <typename T>
struct AtomGenerator {
  Index hidden_width = 0;
  Tensor<T> w1;  // [d, c']
  Tensor<T> b1;  // [d]
  Tensor<T> w2;  // [m*S*m', d, 3, 3]
  Tensor<T> b2;  // [m*S*m']

  Index output_channels() const { return w2.empty() ? 0 : w2.extent(0); }
};

template <typename T>
struct AcdaLayer {
  Index in_channels = 0;
  Index out_channels = 0;
  Index atom_count = 0;  // m
  PaddingMode mode = PaddingMode::kCircular;
  BasisSet bases;
  Tensor<T> bases_cast;  // [S*m', L, L] in working precision
  Tensor<T> coeff;       // A, [c, c'*m]
  Tensor<T> bias;        // [c]
  AtomGenerator<T> gen;

  Index basis_count() const { return bases.count(); }
  Index padded_size() const { return bases.padded_size; }
};

template <typename T>
struct ConvLayer {
  Tensor<T> filter;  // [c, c', l, l]
  Tensor<T> bias;    // [c]
  PaddingMode mode = PaddingMode::kCircular;
};

inline constexpr Index kDefaultAtomCount = 6;      // m
inline constexpr Index kDefaultBasisElements = 6;  // m'
inline constexpr Index kDefaultHiddenWidth = 64;   // d
inline constexpr Index kGeneratorKernel = 3;       // l_b; l_a is the 1x1 squeeze

/// Seeded init: every tensor uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)],
/// drawn in declaration order (w1, b1, w2, b2, A, bias).
template <typename T>
AcdaLayer<T> make_acda_layer(Index in_channels, Index out_channels, Index atom_count,
                             BasisSet bases, Index hidden_width, PaddingMode mode,
                             Rng& rng) {
  detail::check(in_channels >= 1 && out_channels >= 1 && atom_count >= 1,
                "layer extents must be positive");
  detail::check(hidden_width >= 1, "generator hidden width must be positive");
  AcdaLayer<T> layer;
  layer.in_channels = in_channels;
  layer.out_channels = out_channels;
  layer.atom_count = atom_count;
  layer.mode = mode;
  layer.bases_cast = bases.template cast<T>();
  layer.bases = std::move(bases);

  const Index q = layer.basis_count();
  AtomGenerator<T>& g = layer.gen;
  g.hidden_width = hidden_width;
  g.w1 = Tensor<T>({hidden_width, in_channels});
  g.b1 = Tensor<T>({hidden_width});
  g.w2 = Tensor<T>({atom_count * q, hidden_width, kGeneratorKernel, kGeneratorKernel});
  g.b2 = Tensor<T>({atom_count * q});
  const double bound1 = 1.0 / std::sqrt(static_cast<double>(in_channels));
  const double bound2 =
      1.0 / std::sqrt(static_cast<double>(hidden_width * kGeneratorKernel * kGeneratorKernel));
  fill_uniform(g.w1, rng, bound1);
  fill_uniform(g.b1, rng, bound1);
  fill_uniform(g.w2, rng, bound2);
  fill_uniform(g.b2, rng, bound2);

  layer.coeff = Tensor<T>({out_channels, in_channels * atom_count});
  layer.bias = Tensor<T>({out_channels});
  const double bound_a = 1.0 / std::sqrt(static_cast<double>(in_channels * atom_count));
  fill_uniform(layer.coeff, rng, bound_a);
  fill_uniform(layer.bias, rng, bound_a);
  return layer;
}

template <typename T>
ConvLayer<T> make_conv_layer(Index in_channels, Index out_channels, Index kernel_size,
                             PaddingMode mode, Rng& rng) {
  detail::check(kernel_size % 2 == 1, "conv kernel size must be odd");
  ConvLayer<T> layer;
  layer.mode = mode;
  layer.filter = Tensor<T>({out_channels, in_channels, kernel_size, kernel_size});
  layer.bias = Tensor<T>({out_channels});
  const double bound =
      1.0 / std::sqrt(static_cast<double>(in_channels * kernel_size * kernel_size));
  fill_uniform(layer.filter, rng, bound);
  fill_uniform(layer.bias, rng, bound);
  return layer;
}

/// Number of trainable scalars; independent of the basis kernel sizes.
template <typename T>
Index trainable_parameter_count(const AcdaLayer<T>& layer) {
  return layer.coeff.size() + layer.bias.size() + layer.gen.w1.size() +
         layer.gen.b1.size() + layer.gen.w2.size() + layer.gen.b2.size();
}

// ---------------------------------------------------------------------------
// Recorded forward passes. Pure (inference) wrappers run the same recording on
// a scratch tape, so both paths share one implementation of the math.
// ---------------------------------------------------------------------------

template <typename T>
struct AcdaSlots {
  Index w1, b1, w2, b2, coeff, bias;
};

inline const char* const kAcdaParamNames[6] = {"gen.w1", "gen.b1", "gen.w2",
                                               "gen.b2", "coeff",  "bias"};

template <typename T>
ParameterSet<T> make_parameter_set(AcdaLayer<T>& layer) {
  ParameterSet<T> set;
  set.add("gen.w1", layer.gen.w1);
  set.add("gen.b1", layer.gen.b1);
  set.add("gen.w2", layer.gen.w2);
  set.add("gen.b2", layer.gen.b2);
  set.add("coeff", layer.coeff);
  set.add("bias", layer.bias);
  return set;
}

template <typename T>
ParameterSet<T> make_parameter_set(ConvLayer<T>& layer) {
  ParameterSet<T> set;
  set.add("filter", layer.filter);
  set.add("bias", layer.bias);
  return set;
}

template <typename T>
AcdaSlots<T> bind_acda_params(Tape<T>& tape, ParameterSet<T>& set) {
  AcdaSlots<T> s;
  s.w1 = tape.param(set, "gen.w1");
  s.b1 = tape.param(set, "gen.b1");
  s.w2 = tape.param(set, "gen.w2");
  s.b2 = tape.param(set, "gen.b2");
  s.coeff = tape.param(set, "coeff");
  s.bias = tape.param(set, "bias");
  return s;
}

template <typename T>
AcdaSlots<T> leaf_acda_params(Tape<T>& tape, const AcdaLayer<T>& layer) {
  AcdaSlots<T> s;
  s.w1 = tape.leaf(layer.gen.w1);
  s.b1 = tape.leaf(layer.gen.b1);
  s.w2 = tape.leaf(layer.gen.w2);
  s.b2 = tape.leaf(layer.gen.b2);
  s.coeff = tape.leaf(layer.coeff);
  s.bias = tape.leaf(layer.bias);
  return s;
}

/// Basis coefficients for every position: 1x1 squeeze, rectifier, 3x3 layer,
/// channels regrouped to [h, w, m, S*m'].
template <typename T>
Index record_coefficients(Tape<T>& tape, const AcdaLayer<T>& layer,
                          const AcdaSlots<T>& slots, Index input) {
  detail::check(tape.value(input).rank() == 3 &&
                    tape.value(input).extent(0) == layer.in_channels,
                "input channels do not match layer");
  Index h = ops::pointwise_conv(tape, input, slots.w1, slots.b1);
  h = ops::relu(tape, h);
  h = ops::conv2d(tape, h, slots.w2, slots.b2, layer.mode);
  return ops::alpha_from_channels(tape, h, layer.atom_count);
}

template <typename T>
Index record_forward_fast(Tape<T>& tape, const AcdaLayer<T>& layer,
                          const AcdaSlots<T>& slots, Index input) {
  const Index alpha = record_coefficients(tape, layer, slots, input);
  const Index atoms = ops::reconstruct_atoms(tape, alpha, layer.bases_cast);
  // Atom convolution carries no bias; the trainable bias enters with A.
  const Index ztilde = ops::atom_conv(tape, input, atoms, layer.mode);
  return ops::pointwise_conv(tape, ztilde, slots.coeff, std::optional<Index>(slots.bias));
}

template <typename T>
Index record_forward_naive(Tape<T>& tape, const AcdaLayer<T>& layer,
                           const AcdaSlots<T>& slots, Index input) {
  const Index alpha = record_coefficients(tape, layer, slots, input);
  const Index atoms = ops::reconstruct_atoms(tape, alpha, layer.bases_cast);
  const Index filters = ops::reconstruct_filters(tape, atoms, slots.coeff);
  return ops::per_pixel_conv(tape, input, filters, std::optional<Index>(slots.bias),
                             layer.mode);
}

template <typename T>
Tensor<T> generate_coefficients(const AcdaLayer<T>& layer, const Tensor<T>& input) {
  Tape<T> tape;
  const auto slots = leaf_acda_params(tape, layer);
  return tape.value(record_coefficients(tape, layer, slots, tape.leaf(input)));
}

/// alpha [h,w,m,q] combined with a basis set into per-position atoms.
template <typename T>
Tensor<T> reconstruct_atoms(const Tensor<T>& alpha, const BasisSet& bases) {
  Tape<T> tape;
  return tape.value(
      ops::reconstruct_atoms(tape, tape.leaf(alpha), bases.template cast<T>()));
}

/// atoms [h,w,m,L,L] combined with coefficients A [c, c'*m] into full filters.
template <typename T>
Tensor<T> reconstruct_filters(const Tensor<T>& atoms, const Tensor<T>& coeff) {
  Tape<T> tape;
  return tape.value(ops::reconstruct_filters(tape, tape.leaf(atoms), tape.leaf(coeff)));
}

/// Oracle path: explicit per-pixel filters applied position by position.
template <typename T>
Tensor<T> forward_naive(const AcdaLayer<T>& layer, const Tensor<T>& input) {
  Tape<T> tape;
  const auto slots = leaf_acda_params(tape, layer);
  return tape.value(record_forward_naive(tape, layer, slots, tape.leaf(input)));
}

/// Production path: atom convolution followed by the 1x1 coefficient convolution.
template <typename T>
Tensor<T> forward_fast(const AcdaLayer<T>& layer, const Tensor<T>& input) {
  Tape<T> tape;
  const auto slots = leaf_acda_params(tape, layer);
  return tape.value(record_forward_fast(tape, layer, slots, tape.leaf(input)));
}

template <typename T>
Tensor<T> forward(const ConvLayer<T>& layer, const Tensor<T>& input) {
  return conv2d(input, layer.filter, &layer.bias, layer.mode);
}

template <typename T>
Index record_forward(Tape<T>& tape, const ConvLayer<T>& layer, Index filter, Index bias,
                     Index input) {
  return ops::conv2d(tape, input, filter, std::optional<Index>(bias), layer.mode);
}

// ---------------------------------------------------------------------------

/// Mean over unordered position pairs of one minus the cosine similarity of the
/// flattened per-position coefficient vectors. All-zero positions are excluded;
/// with no pair left the mean is undefined.
template <typename T>
double coefficient_diversity(const Tensor<T>& alpha) {
  detail::check(alpha.rank() == 4, "alpha must be [h,w,m,q]");
  const Index hw = alpha.extent(0) * alpha.extent(1);
  const Index dim = alpha.extent(2) * alpha.extent(3);
  detail::check(hw >= 2, "coefficient_diversity needs at least 2 positions");
  std::vector<Index> live;
  std::vector<double> norms;
  for (Index p = 0; p < hw; ++p) {
    double n2 = 0;
    for (Index k = 0; k < dim; ++k) {
      const double v = alpha[p * dim + k];
      n2 += v * v;
    }
    if (n2 > 0) {
      live.push_back(p);
      norms.push_back(std::sqrt(n2));
    }
  }
  if (live.size() < 2)
    throw std::domain_error("coefficient_diversity undefined: fewer than two nonzero positions");
  double total = 0;
  for (size_t a = 0; a < live.size(); ++a)
    for (size_t b = a + 1; b < live.size(); ++b) {
      double dot = 0;
      const T* va = alpha.data() + live[a] * dim;
      const T* vb = alpha.data() + live[b] * dim;
      for (Index k = 0; k < dim; ++k) dot += static_cast<double>(va[k]) * vb[k];
      total += 1.0 - dot / (norms[a] * norms[b]);
    }
  const double pairs = 0.5 * static_cast<double>(live.size()) *
                       static_cast<double>(live.size() - 1);
  return total / pairs;
}

}  // namespace acda
