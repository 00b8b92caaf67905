#include <doctest.h>

#include <cmath>

#include "acda/conv.hpp"
#include "acda/rng.hpp"
#include "acda/tensor.hpp"

using namespace acda;

namespace {

// Triple-nested-loop reference for true convolution, written independently of
// the im2col/GEMM path it checks.
template <typename T>
Tensor<T> conv2d_oracle(const Tensor<T>& in, const Tensor<T>& filter,
                        const Tensor<T>* bias, PaddingMode mode) {
  const Index c = filter.extent(0), cp = filter.extent(1), l = filter.extent(2);
  const Index h = in.extent(1), w = in.extent(2), d = l / 2;
  Tensor<T> out({c, h, w});
  for (Index k = 0; k < c; ++k)
    for (Index i = 0; i < h; ++i)
      for (Index j = 0; j < w; ++j) {
        double acc = bias ? static_cast<double>((*bias)[k]) : 0.0;
        for (Index q = 0; q < cp; ++q)
          for (Index u = -d; u <= d; ++u)
            for (Index v = -d; v <= d; ++v) {
              Index si = i - u, sj = j - v;
              if (mode == PaddingMode::kCircular) {
                si = ((si % h) + h) % h;
                sj = ((sj % w) + w) % w;
              } else if (si < 0 || si >= h || sj < 0 || sj >= w) {
                continue;
              }
              acc += static_cast<double>(filter[((k * cp + q) * l + d + u) * l + d + v]) *
                     static_cast<double>(in[(q * h + si) * w + sj]);
            }
        out[(k * h + i) * w + j] = static_cast<T>(acc);
      }
  return out;
}

template <typename T>
Tensor<T> iota_tensor(Shape shape) {
  Tensor<T> t(std::move(shape));
  for (Index i = 0; i < t.size(); ++i) t[i] = static_cast<T>(i + 1);
  return t;
}

}  // namespace

TEST_SUITE_BEGIN("tensor");

TEST_CASE("tensor basics and contract violations") {
  Tensor<float> t({2, 3});
  CHECK(t.size() == 6);
  t.at(1, 2) = 5.0f;
  CHECK(t.at(1, 2) == 5.0f);
  CHECK_THROWS_AS((void)t.at(2, 0), std::out_of_range);
  CHECK_THROWS_AS((void)t.at(0, 3), std::out_of_range);
  CHECK_THROWS_AS((void)t.at(0), std::out_of_range);
  CHECK_THROWS_AS(Tensor<float>({2, 2}, {1.f, 2.f, 3.f}), std::invalid_argument);
  CHECK_THROWS_AS(t.reshaped({5}), std::invalid_argument);
}

TEST_CASE("unfold identity neighborhood (l=1)") {
  const auto in = iota_tensor<float>({1, 3, 3});
  const auto cols = unfold(in, 1, PaddingMode::kZero);
  REQUIRE(cols.shape() == Shape{1, 9});
  for (Index i = 0; i < 9; ++i) CHECK(cols[i] == in[i]);
}

TEST_CASE("unfold full-coverage center column (l=3)") {
  const auto in = iota_tensor<float>({1, 3, 3});
  const auto cols = unfold(in, 3, PaddingMode::kZero);
  REQUIRE(cols.shape() == Shape{9, 9});
  const Index center = 1 * 3 + 1;
  for (Index r = 0; r < 9; ++r) CHECK(cols[r * 9 + center] == static_cast<float>(r + 1));
}

TEST_CASE("unfold circular matches modular-index lookup") {
  Rng rng(11);
  Tensor<double> in({2, 4, 4});
  fill_uniform(in, rng, 1.0);
  const Index l = 3, d = 1, h = 4, w = 4;
  const auto cols = unfold(in, l, PaddingMode::kCircular);
  for (Index q = 0; q < 2; ++q)
    for (Index a = 0; a < l; ++a)
      for (Index b = 0; b < l; ++b)
        for (Index i = 0; i < h; ++i)
          for (Index j = 0; j < w; ++j) {
            const Index si = (((i + a - d) % h) + h) % h;
            const Index sj = (((j + b - d) % w) + w) % w;
            CHECK(cols[((q * l + a) * l + b) * h * w + i * w + j] ==
                  in[(q * h + si) * w + sj]);
          }
}

TEST_CASE("unfold rejects even or non-positive kernel sizes") {
  const auto in = iota_tensor<float>({1, 3, 3});
  CHECK_THROWS_AS(unfold(in, 2, PaddingMode::kZero), std::invalid_argument);
  CHECK_THROWS_AS(unfold(in, 0, PaddingMode::kZero), std::invalid_argument);
  CHECK_THROWS_AS(unfold(in, -3, PaddingMode::kZero), std::invalid_argument);
}

TEST_CASE("conv2d 1x1 kernel scales the input") {
  Rng rng(3);
  Tensor<float> in({1, 5, 4});
  fill_uniform(in, rng, 2.0);
  Tensor<float> filter({1, 1, 1, 1});
  filter[0] = 2.0f;
  const auto out = conv2d(in, filter, nullptr, PaddingMode::kZero);
  for (Index i = 0; i < in.size(); ++i) CHECK(out[i] == doctest::Approx(2.0f * in[i]));
}

TEST_CASE("conv2d circular sum of ones") {
  const auto in = Tensor<float>::full({1, 6, 6}, 1.0f);
  const auto filter = Tensor<float>::full({1, 1, 3, 3}, 1.0f);
  const auto out = conv2d(in, filter, nullptr, PaddingMode::kCircular);
  for (Index i = 0; i < out.size(); ++i) CHECK(out[i] == doctest::Approx(9.0f));
}

TEST_CASE("conv2d matches the nested-loop oracle") {
  Rng rng(17);
  Tensor<double> in({2, 4, 4});
  Tensor<double> filter({3, 2, 3, 3});
  Tensor<double> bias({3});
  fill_uniform(in, rng, 1.0);
  fill_uniform(filter, rng, 1.0);
  fill_uniform(bias, rng, 1.0);
  for (PaddingMode mode : {PaddingMode::kZero, PaddingMode::kCircular}) {
    const auto got = conv2d(in, filter, &bias, mode);
    const auto want = conv2d_oracle(in, filter, &bias, mode);
    CHECK(max_rel_diff(got, want) <= 1e-6);
  }
}

TEST_CASE("conv2d validates shapes") {
  const auto in = iota_tensor<float>({2, 3, 3});
  CHECK_THROWS_AS(conv2d(in, Tensor<float>({1, 3, 3, 3}), nullptr, PaddingMode::kZero),
                  std::invalid_argument);
  CHECK_THROWS_AS(conv2d(in, Tensor<float>({1, 2, 2, 2}), nullptr, PaddingMode::kZero),
                  std::invalid_argument);
  Tensor<float> bad_bias({3});
  Tensor<float> filter({1, 2, 3, 3});
  CHECK_THROWS_AS(conv2d(in, filter, &bad_bias, PaddingMode::kZero), std::invalid_argument);
}

TEST_CASE("unfold plus flattened-filter dots reproduces conv2d exactly") {
  Rng rng(29);
  Tensor<float> in({3, 5, 6});
  Tensor<float> filter({2, 3, 3, 3});
  fill_uniform(in, rng, 1.0);
  fill_uniform(filter, rng, 1.0);
  const Index c = 2, cp = 3, l = 3, hw = 30;
  for (PaddingMode mode : {PaddingMode::kZero, PaddingMode::kCircular}) {
    const auto out = conv2d(in, filter, nullptr, mode);
    const auto cols = unfold(in, l, mode);
    // Flatten the filter in unfold order: entry (q,a,b) pairs with the
    // 180-degree rotated tap, then a plain sequential fma dot per column.
    for (Index k = 0; k < c; ++k) {
      std::vector<float> flat(static_cast<size_t>(cp * l * l));
      for (Index q = 0; q < cp; ++q)
        for (Index a = 0; a < l; ++a)
          for (Index b = 0; b < l; ++b)
            flat[static_cast<size_t>((q * l + a) * l + b)] =
                filter[((k * cp + q) * l + (l - 1 - a)) * l + (l - 1 - b)];
      for (Index p = 0; p < hw; ++p) {
        float acc = 0.0f;
        for (Index r = 0; r < cp * l * l; ++r)
          acc = std::fma(flat[static_cast<size_t>(r)], cols[r * hw + p], acc);
        CHECK(out[k * hw + p] == acc);  // bit-exact: same summation order
      }
    }
  }
}

TEST_CASE("conv2d is linear in the input") {
  Rng rng(31);
  Tensor<float> x({2, 5, 5}), y({2, 5, 5});
  Tensor<float> filter({2, 2, 3, 3});
  fill_uniform(x, rng, 1.0);
  fill_uniform(y, rng, 1.0);
  fill_uniform(filter, rng, 1.0);
  const float a = 0.7f, b = -1.3f;
  Tensor<float> mix({2, 5, 5});
  for (Index i = 0; i < mix.size(); ++i) mix[i] = a * x[i] + b * y[i];
  const auto lhs = conv2d(mix, filter, nullptr, PaddingMode::kCircular);
  const auto cx = conv2d(x, filter, nullptr, PaddingMode::kCircular);
  const auto cy = conv2d(y, filter, nullptr, PaddingMode::kCircular);
  Tensor<float> rhs({2, 5, 5});
  for (Index i = 0; i < rhs.size(); ++i) rhs[i] = a * cx[i] + b * cy[i];
  CHECK(max_rel_diff(lhs, rhs, 1e-3f) <= 1e-5);
}

TEST_CASE("conv2d circular-shift equivariance") {
  Rng rng(37);
  Tensor<float> x({2, 6, 7});
  Tensor<float> filter({3, 2, 3, 3});
  fill_uniform(x, rng, 1.0);
  fill_uniform(filter, rng, 1.0);
  const auto base = conv2d(x, filter, nullptr, PaddingMode::kCircular);
  for (const auto& [di, dj] : {std::pair<Index, Index>{1, 0}, {0, 1}, {3, 5}, {-2, 4}}) {
    const auto shifted = conv2d(circular_shift(x, di, dj), filter, nullptr,
                                PaddingMode::kCircular);
    const auto expect = circular_shift(base, di, dj);
    CHECK(max_rel_diff(shifted, expect, 1e-3f) <= 1e-6);
  }
}

TEST_CASE("pointwise_conv identity and bias broadcast") {
  const auto in = iota_tensor<float>({3, 2, 2});
  Tensor<float> eye({3, 3});
  for (Index i = 0; i < 3; ++i) eye[i * 3 + i] = 1.0f;
  const auto same = pointwise_conv(in, eye, nullptr);
  for (Index i = 0; i < in.size(); ++i) CHECK(same[i] == in[i]);

  Tensor<float> zero_w({2, 3});
  Tensor<float> bias({2});
  bias[0] = 4.0f;
  bias[1] = -1.5f;
  const auto broadcast = pointwise_conv(in, zero_w, &bias);
  for (Index k = 0; k < 2; ++k)
    for (Index p = 0; p < 4; ++p) CHECK(broadcast[k * 4 + p] == bias[k]);
}

TEST_CASE("pointwise_conv equals conv2d with a 1x1 filter exactly") {
  Rng rng(41);
  Tensor<float> in({4, 5, 3});
  Tensor<float> weights({3, 4});
  Tensor<float> bias({3});
  fill_uniform(in, rng, 1.0);
  fill_uniform(weights, rng, 1.0);
  fill_uniform(bias, rng, 1.0);
  const auto direct = pointwise_conv(in, weights, &bias);
  const auto via_conv = conv2d(in, weights.reshaped({3, 4, 1, 1}), &bias,
                               PaddingMode::kZero);
  for (Index i = 0; i < direct.size(); ++i) CHECK(direct[i] == via_conv[i]);
}

TEST_CASE("pointwise_conv validates shapes") {
  const auto in = iota_tensor<float>({3, 2, 2});
  CHECK_THROWS_AS(pointwise_conv(in, Tensor<float>({2, 4}), nullptr),
                  std::invalid_argument);
}

TEST_SUITE_END();
