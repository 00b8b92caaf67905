#include <doctest.h>

#include <cmath>

#include "acda/checks.hpp"
#include "acda/layer.hpp"

using namespace acda;

namespace {

template <typename T>
void zero_generator(AcdaLayer<T>& layer) {
  layer.gen.w1.fill(T(0));
  layer.gen.b1.fill(T(0));
  layer.gen.w2.fill(T(0));
  layer.gen.b2.fill(T(0));
}

// Loop-based evaluation of the two generator layers, independent of the
// GEMM-backed implementation.
template <typename T>
Tensor<T> coefficients_oracle(const AcdaLayer<T>& layer, const Tensor<T>& x) {
  const Index cp = x.extent(0), h = x.extent(1), w = x.extent(2);
  const Index d = layer.gen.hidden_width;
  const Index q = layer.basis_count(), m = layer.atom_count;
  Tensor<double> hidden({d, h, w});
  for (Index ch = 0; ch < d; ++ch)
    for (Index p = 0; p < h * w; ++p) {
      double acc = layer.gen.b1[ch];
      for (Index c = 0; c < cp; ++c)
        acc += static_cast<double>(layer.gen.w1[ch * cp + c]) * x[c * h * w + p];
      hidden[ch * h * w + p] = std::max(acc, 0.0);
    }
  Tensor<T> alpha({h, w, m, q});
  for (Index o = 0; o < m * q; ++o)
    for (Index i = 0; i < h; ++i)
      for (Index j = 0; j < w; ++j) {
        double acc = layer.gen.b2[o];
        for (Index ch = 0; ch < d; ++ch)
          for (Index u = -1; u <= 1; ++u)
            for (Index v = -1; v <= 1; ++v) {
              const Index si = ((i - u) % h + h) % h;
              const Index sj = ((j - v) % w + w) % w;
              acc += static_cast<double>(
                         layer.gen.w2[((o * d + ch) * 3 + 1 + u) * 3 + 1 + v]) *
                     hidden[ch * h * w + si * w + sj];
            }
        alpha[((i * w + j) * m + o / q) * q + o % q] = static_cast<T>(acc);
      }
  return alpha;
}

}  // namespace

TEST_SUITE_BEGIN("layer");

TEST_CASE("generate_coefficients: zero generator emits zero coefficients") {
  Rng rng(1);
  auto layer = make_acda_layer<float>(2, 2, 3, build_multiscale({3, 5}, 4), 6,
                                      PaddingMode::kCircular, rng);
  zero_generator(layer);
  Tensor<float> x({2, 4, 4});
  fill_uniform(x, rng, 1.0);
  const auto alpha = generate_coefficients(layer, x);
  REQUIRE(alpha.shape() == Shape{4, 4, 3, 8});
  for (Index i = 0; i < alpha.size(); ++i) CHECK(alpha[i] == 0.0f);
}

TEST_CASE("generate_coefficients: constant input gives position-independent alpha") {
  Rng rng(2);
  auto layer = make_acda_layer<float>(3, 2, 2, build_multiscale({3}, 3), 5,
                                      PaddingMode::kCircular, rng);
  const auto x = Tensor<float>::full({3, 5, 6}, 0.37f);
  const auto alpha = generate_coefficients(layer, x);
  const Index dim = 2 * 3;
  for (Index p = 1; p < 30; ++p)
    for (Index k = 0; k < dim; ++k)
      CHECK(alpha[p * dim + k] == doctest::Approx(alpha[k]).epsilon(1e-6));
}

TEST_CASE("generate_coefficients matches the loop oracle") {
  Rng rng(3);
  auto layer = make_acda_layer<double>(2, 2, 3, build_multiscale({3, 5, 7}, 6), 7,
                                       PaddingMode::kCircular, rng);
  Tensor<double> x({2, 5, 4});
  fill_uniform(x, rng, 1.0);
  const auto got = generate_coefficients(layer, x);
  const auto want = coefficients_oracle(layer, x);
  CHECK(max_rel_diff(got, want, 1e-6) <= 1e-6);
}

TEST_CASE("generate_coefficients validates input channels") {
  Rng rng(4);
  auto layer = make_acda_layer<float>(2, 2, 2, build_multiscale({3}, 2), 4,
                                      PaddingMode::kCircular, rng);
  Tensor<float> wrong({3, 4, 4});
  CHECK_THROWS_AS(generate_coefficients(layer, wrong), std::invalid_argument);
}

TEST_CASE("reconstruct_atoms: one-hot alpha selects a basis element") {
  const BasisSet bases = build_multiscale({3, 5}, 3);
  const Index q = 6, sel = 4, m = 2, h = 3, w = 2;
  Tensor<double> alpha({h, w, m, q});
  for (Index p = 0; p < h * w; ++p)
    for (Index b = 0; b < m; ++b) alpha[(p * m + b) * q + sel] = 1.0;
  const auto atoms = reconstruct_atoms(alpha, bases);
  REQUIRE(atoms.shape() == Shape{h, w, m, 5, 5});
  for (Index p = 0; p < h * w; ++p)
    for (Index b = 0; b < m; ++b)
      for (Index t = 0; t < 25; ++t)
        CHECK(atoms[(p * m + b) * 25 + t] ==
              doctest::Approx(bases.bases[sel * 25 + t]).epsilon(1e-12));
}

TEST_CASE("reconstruct_atoms: zero alpha gives zero atoms") {
  const BasisSet bases = build_multiscale({3}, 2);
  Tensor<float> alpha({2, 2, 1, 2});
  const auto atoms = reconstruct_atoms(alpha, bases);
  for (Index i = 0; i < atoms.size(); ++i) CHECK(atoms[i] == 0.0f);
}

TEST_CASE("reconstruct_atoms matches the per-position matrix oracle") {
  Rng rng(5);
  const BasisSet bases = build_multiscale({3, 5, 7}, 6);
  Tensor<double> alpha({3, 4, 2, 18});
  fill_uniform(alpha, rng, 1.0);
  const auto atoms = reconstruct_atoms(alpha, bases);
  for (Index p = 0; p < 12; ++p)
    for (Index b = 0; b < 2; ++b)
      for (Index t = 0; t < 49; ++t) {
        double want = 0.0;
        for (Index k = 0; k < 18; ++k)
          want += alpha[(p * 2 + b) * 18 + k] * bases.bases[k * 49 + t];
        CHECK(atoms[(p * 2 + b) * 49 + t] == doctest::Approx(want).epsilon(1e-6));
      }
}

TEST_CASE("reconstruct_atoms validates extents") {
  const BasisSet bases = build_multiscale({3}, 2);
  Tensor<float> alpha({2, 2, 1, 3});  // 3 != 2 basis elements
  CHECK_THROWS_AS(reconstruct_atoms(alpha, bases), std::invalid_argument);
}

TEST_CASE("reconstruct_filters: single atom with unit coefficients broadcasts") {
  Rng rng(6);
  Tensor<double> atoms({2, 2, 1, 3, 3});
  fill_uniform(atoms, rng, 1.0);
  const auto filters = reconstruct_filters(atoms, Tensor<double>::full({2, 3}, 1.0));
  REQUIRE(filters.shape() == Shape{2, 2, 2, 3, 3, 3});
  for (Index p = 0; p < 4; ++p)
    for (Index k = 0; k < 2; ++k)
      for (Index cp = 0; cp < 3; ++cp)
        for (Index t = 0; t < 9; ++t)
          CHECK(filters[((p * 2 + k) * 3 + cp) * 9 + t] == atoms[p * 9 + t]);
}

TEST_CASE("reconstruct_filters: zero coefficients give zero filters") {
  Tensor<float> atoms({2, 2, 3, 3, 3});
  atoms.fill(1.0f);
  const auto filters = reconstruct_filters(atoms, Tensor<float>({2, 2 * 3}));
  for (Index i = 0; i < filters.size(); ++i) CHECK(filters[i] == 0.0f);
}

TEST_CASE("reconstruct_filters matches the index oracle") {
  Rng rng(7);
  Tensor<double> atoms({2, 3, 4, 3, 3}), coeff({3, 2 * 4});
  fill_uniform(atoms, rng, 1.0);
  fill_uniform(coeff, rng, 1.0);
  const auto filters = reconstruct_filters(atoms, coeff);
  const Index m = 4, cp = 2, c = 3;
  for (Index p = 0; p < 6; ++p)
    for (Index k = 0; k < c; ++k)
      for (Index q = 0; q < cp; ++q)
        for (Index t = 0; t < 9; ++t) {
          double want = 0.0;
          for (Index b = 0; b < m; ++b)
            want += coeff[k * cp * m + q * m + b] * atoms[(p * m + b) * 9 + t];
          CHECK(filters[((p * c + k) * cp + q) * 9 + t] ==
                doctest::Approx(want).epsilon(1e-6));
        }
}

TEST_CASE("forward_naive: zero generator reduces to the layer bias") {
  Rng rng(8);
  auto layer = make_acda_layer<float>(2, 3, 2, build_multiscale({3, 5}, 3), 4,
                                      PaddingMode::kCircular, rng);
  zero_generator(layer);
  layer.bias[0] = 0.25f;
  layer.bias[1] = -1.0f;
  layer.bias[2] = 3.5f;
  Tensor<float> x({2, 4, 5});
  fill_uniform(x, rng, 1.0);
  for (const auto& out : {forward_naive(layer, x), forward_fast(layer, x)})
    for (Index k = 0; k < 3; ++k)
      for (Index p = 0; p < 20; ++p) CHECK(out[k * 20 + p] == layer.bias[k]);
}

TEST_CASE("forward_naive on a 1x1 map equals the center-tap chain") {
  Rng rng(9);
  auto layer = make_acda_layer<double>(3, 2, 2, build_multiscale({3, 5}, 3), 5,
                                       PaddingMode::kZero, rng);
  Tensor<double> x({3, 1, 1});
  fill_uniform(x, rng, 1.0);
  const auto out = forward_naive(layer, x);

  const auto alpha = generate_coefficients(layer, x);
  const auto atoms = reconstruct_atoms(alpha, layer.bases);
  const auto filters = reconstruct_filters(atoms, layer.coeff);
  const Index L = 5, ctr = 2;
  for (Index k = 0; k < 2; ++k) {
    double want = layer.bias[k];
    for (Index q = 0; q < 3; ++q)
      want += filters[((0 * 2 + k) * 3 + q) * L * L + ctr * L + ctr] * x[q];
    CHECK(out[k] == doctest::Approx(want).epsilon(1e-9));
  }
}

TEST_CASE("forward_fast with position-independent filters equals plain conv2d") {
  Rng rng(10);
  const BasisSet bases = build_multiscale({3, 5, 7}, 6);
  auto layer = make_acda_layer<double>(2, 3, 1, bases, 4, PaddingMode::kCircular, rng);
  zero_generator(layer);
  const Index sel = 7;  // one scale-5 element
  layer.gen.b2[sel] = 1.0;  // alpha one-hot everywhere

  Tensor<double> x({2, 8, 8});
  fill_uniform(x, rng, 1.0);
  const auto fast = forward_fast(layer, x);

  // Static filter: K[k,cp] = A[k,cp] * psi[sel].
  const Index L = 7;
  Tensor<double> filter({3, 2, L, L});
  for (Index k = 0; k < 3; ++k)
    for (Index cp = 0; cp < 2; ++cp)
      for (Index t = 0; t < L * L; ++t)
        filter[((k * 2 + cp) * L * L) + t] =
            layer.coeff[k * 2 + cp] * bases.bases[sel * L * L + t];
  const auto want = conv2d(x, filter, &layer.bias, PaddingMode::kCircular);
  CHECK(max_rel_diff(fast, want, 1e-8) <= 1e-6);
}

TEST_CASE("fast path equals naive path over the configuration grid") {
  const auto report32 = equivalence_sweep<float>(123);
  CHECK(report32.cases.size() >= 20);
  CHECK(report32.max_rel_dev <= 1e-5);
  const auto report64 = equivalence_sweep<double>(123);
  CHECK(report64.max_rel_dev <= 1e-10);
}

TEST_CASE("translation equivariance of outputs and intermediates") {
  Rng rng(11);
  auto layer = make_acda_layer<float>(2, 2, 3, build_multiscale({3, 5, 7}, 6), 6,
                                      PaddingMode::kCircular, rng);
  Tensor<float> x({2, 9, 11});
  fill_uniform(x, rng, 1.0);
  const Index di = 4, dj = 7;
  const auto xs = circular_shift(x, di, dj);

  const auto out = forward_fast(layer, x);
  CHECK(max_rel_diff(forward_fast(layer, xs), circular_shift(out, di, dj), 1e-3f) <= 1e-6);

  // alpha and atoms from a shifted input equal the shifted alpha and atoms.
  const Index q = 18, m = 3, L = 7;
  const auto alpha = generate_coefficients(layer, x).reshaped({9 * 11, m * q});
  const auto alpha_s = generate_coefficients(layer, xs).reshaped({9 * 11, m * q});
  const auto atoms = reconstruct_atoms(generate_coefficients(layer, x), layer.bases)
                         .reshaped({9 * 11, m * L * L});
  const auto atoms_s = reconstruct_atoms(generate_coefficients(layer, xs), layer.bases)
                           .reshaped({9 * 11, m * L * L});
  for (Index i = 0; i < 9; ++i)
    for (Index j = 0; j < 11; ++j) {
      const Index p = i * 11 + j;
      const Index ps = (((i + di) % 9) * 11) + ((j + dj) % 11);
      for (Index k = 0; k < m * q; ++k)
        CHECK(alpha_s[ps * m * q + k] == alpha[p * m * q + k]);
      for (Index k = 0; k < m * L * L; ++k)
        CHECK(atoms_s[ps * m * L * L + k] == atoms[p * m * L * L + k]);
    }
}

TEST_CASE("trainable parameter count is independent of basis kernel sizes") {
  Rng rng(12);
  std::vector<std::vector<Index>> scale_sets = {{3}, {3, 5}, {5, 7}, {3, 5, 7}};
  std::vector<Index> counts;
  for (const auto& scales : scale_sets) {
    auto layer = make_acda_layer<float>(3, 4, 6, build_multiscale(scales, 6), 8,
                                        PaddingMode::kCircular, rng);
    counts.push_back(trainable_parameter_count(layer));
  }
  // Generator output width m*S*m' varies with S, so compare sets of equal S.
  CHECK(counts[1] == counts[2]);
  // Conv params grow with l^2; ACDA coefficient count never does.
  for (const auto& scales : scale_sets) {
    auto layer = make_acda_layer<float>(3, 4, 6, build_multiscale(scales, 6), 8,
                                        PaddingMode::kCircular, rng);
    CHECK(layer.coeff.size() + layer.bias.size() == 3 * 4 * 6 + 4);
  }
}

TEST_CASE("output ignores inputs beyond the active receptive field") {
  Rng rng(13);
  auto layer = make_acda_layer<float>(1, 1, 2, build_multiscale({3, 5, 7}, 6), 5,
                                      PaddingMode::kCircular, rng);
  // Zero every generator row that feeds basis elements of scales 5 and 7, so
  // alpha weights only scale-3 elements regardless of the input.
  const Index q = 18;
  for (Index o = 0; o < 2 * q; ++o) {
    if (o % q < 6) continue;
    layer.gen.b2[o] = 0.0f;
    for (Index i = 0; i < layer.gen.hidden_width * 9; ++i)
      layer.gen.w2[o * layer.gen.hidden_width * 9 + i] = 0.0f;
  }
  Tensor<float> x({1, 11, 11});
  fill_uniform(x, rng, 1.0);
  const auto base = forward_fast(layer, x);
  // Perturbing a pixel at Chebyshev distance > delta'+1 from the probe must not
  // change the probe output.
  const Index pi = 5, pj = 5;
  for (const auto& [qi, qj] : {std::pair<Index, Index>{0, 0}, {5, 9}, {9, 5}, {2, 2}}) {
    Tensor<float> bumped = x;
    bumped[qi * 11 + qj] += 10.0f;
    const auto out = forward_fast(layer, bumped);
    CHECK(out[pi * 11 + pj] == base[pi * 11 + pj]);
  }
  // A pixel inside the active field does change it.
  Tensor<float> bumped = x;
  bumped[pi * 11 + pj + 1] += 10.0f;
  CHECK(forward_fast(layer, bumped)[pi * 11 + pj] != base[pi * 11 + pj]);
}

TEST_CASE("coefficient_diversity examples") {
  Tensor<double> same({2, 2, 1, 3});
  for (Index p = 0; p < 4; ++p) {
    same[p * 3 + 0] = 0.2;
    same[p * 3 + 1] = -0.7;
    same[p * 3 + 2] = 0.1;
  }
  CHECK(coefficient_diversity(same) == doctest::Approx(0.0).epsilon(1e-12));

  Tensor<double> ortho({1, 2, 1, 2});
  ortho[0 * 2 + 0] = 1.0;
  ortho[1 * 2 + 1] = 2.0;
  CHECK(coefficient_diversity(ortho) == doctest::Approx(1.0));

  Rng rng(14);
  Tensor<double> alpha({4, 4, 2, 5});
  fill_uniform(alpha, rng, 1.0);
  double want = 0.0;
  Index pairs = 0;
  for (Index a = 0; a < 16; ++a)
    for (Index b = a + 1; b < 16; ++b) {
      double dot = 0, na = 0, nb = 0;
      for (Index k = 0; k < 10; ++k) {
        dot += alpha[a * 10 + k] * alpha[b * 10 + k];
        na += alpha[a * 10 + k] * alpha[a * 10 + k];
        nb += alpha[b * 10 + k] * alpha[b * 10 + k];
      }
      want += 1.0 - dot / std::sqrt(na * nb);
      ++pairs;
    }
  want /= static_cast<double>(pairs);
  CHECK(coefficient_diversity(alpha) == doctest::Approx(want).epsilon(1e-6));
}

TEST_CASE("coefficient_diversity error cases") {
  Tensor<double> zeros({2, 2, 1, 3});
  CHECK_THROWS_AS(coefficient_diversity(zeros), std::domain_error);
  Tensor<double> single({1, 1, 1, 3});
  CHECK_THROWS_AS(coefficient_diversity(single), std::invalid_argument);
  Tensor<double> one_live({2, 2, 1, 2});
  one_live[0] = 1.0;  // only one nonzero position: no pairs
  CHECK_THROWS_AS(coefficient_diversity(one_live), std::domain_error);
}

TEST_SUITE_END();
