#pragma once

#include <functional>
#include <string>
#include <vector>

#include "acda/layer.hpp"
#include "acda/toy.hpp"

namespace acda {

// Verification sweeps shared by the CLI check command and the acceptance suite.

struct EquivalenceCase {
  Index c_in, c_out, m, h, w;
  std::vector<Index> scales;
  double rel_dev = 0.0;
};

struct EquivalenceReport {
  std::vector<EquivalenceCase> cases;
  double max_rel_dev = 0.0;
};

/// Fixed 24-configuration grid spanning c',c in {1,2,4,8}, m in {1,3,6},
/// scale subsets of {3,5,7}, and h,w in {5,8,12}.
inline std::vector<EquivalenceCase> equivalence_grid() {
  using V = std::vector<Index>;
  return {
      {1, 1, 1, 5, 5, V{3}},       {2, 1, 3, 8, 5, V{5}},
      {1, 2, 6, 5, 8, V{7}},       {4, 2, 1, 8, 8, V{3, 5}},
      {2, 4, 3, 12, 8, V{5, 7}},   {8, 4, 6, 8, 12, V{3, 5, 7}},
      {4, 8, 1, 12, 5, V{3, 7}},   {8, 8, 3, 5, 12, V{3, 5, 7}},
      {1, 4, 6, 12, 12, V{3, 5}},  {2, 2, 6, 8, 8, V{3, 5, 7}},
      {4, 4, 3, 5, 5, V{7}},       {8, 1, 1, 12, 8, V{5}},
      {1, 8, 3, 8, 12, V{3}},      {2, 8, 6, 5, 5, V{5, 7}},
      {4, 1, 6, 8, 5, V{3, 5, 7}}, {8, 2, 3, 12, 12, V{3, 7}},
      {1, 1, 6, 12, 5, V{3, 5, 7}}, {2, 4, 1, 8, 8, V{7}},
      {4, 4, 6, 5, 8, V{3, 5}},    {8, 8, 6, 12, 12, V{3, 5, 7}},
      {1, 2, 1, 5, 12, V{5, 7}},   {2, 1, 6, 12, 8, V{3}},
      {4, 8, 3, 8, 8, V{3, 5, 7}}, {8, 4, 1, 5, 5, V{3, 5}},
  };
}

/// Max relative deviation |fast - naive| / (|naive| + 1e-8) over the grid,
/// with freshly seeded layers and inputs per case.
template <typename T>
EquivalenceReport equivalence_sweep(std::uint64_t seed,
                                    std::vector<EquivalenceCase> grid = equivalence_grid()) {
  EquivalenceReport report;
  Index hidden = 7;  // small generator; the identity under test is exact in any width
  for (EquivalenceCase& ec : grid) {
    Rng rng(seed ^ (static_cast<std::uint64_t>(ec.c_in * 131 + ec.c_out * 17 + ec.m) << 8));
    auto layer = make_acda_layer<T>(ec.c_in, ec.c_out, ec.m,
                                    build_multiscale(ec.scales, kDefaultBasisElements),
                                    hidden, PaddingMode::kCircular, rng);
    Tensor<T> x({ec.c_in, ec.h, ec.w});
    fill_uniform(x, rng, 1.0);
    const Tensor<T> fast = forward_fast(layer, x);
    const Tensor<T> naive = forward_naive(layer, x);
    double dev = 0.0;
    for (Index i = 0; i < fast.size(); ++i) {
      const double d = std::abs(static_cast<double>(fast[i]) - static_cast<double>(naive[i]));
      dev = std::max(dev, d / (std::abs(static_cast<double>(naive[i])) + 1e-8));
    }
    ec.rel_dev = dev;
    report.max_rel_dev = std::max(report.max_rel_dev, dev);
    report.cases.push_back(ec);
  }
  return report;
}

struct EquivarianceCase {
  std::string layer_kind;
  Index di = 0, dj = 0;
  double deviation = 0.0;
};

struct EquivarianceReport {
  std::vector<EquivarianceCase> cases;
  double max_deviation = 0.0;
};

/// Shift-then-forward vs forward-then-shift under circular padding for both
/// layer kinds; the shift list always includes (20,20).
template <typename T>
EquivarianceReport equivariance_sweep(std::uint64_t seed, Index h = 32, Index w = 32,
                                      std::vector<std::pair<Index, Index>> shifts = {}) {
  Rng rng(seed);
  if (shifts.empty()) {
    shifts = {{20, 20}, {1, 0}, {0, 1}};
    for (int i = 0; i < 3; ++i)
      shifts.emplace_back(static_cast<Index>(rng.below(static_cast<std::uint64_t>(h))),
                          static_cast<Index>(rng.below(static_cast<std::uint64_t>(w))));
  }
  auto acda = make_acda_layer<T>(2, 2, 3, build_multiscale({3, 5, 7}, kDefaultBasisElements),
                                 8, PaddingMode::kCircular, rng);
  auto conv = make_conv_layer<T>(2, 2, 7, PaddingMode::kCircular, rng);
  Tensor<T> x({2, h, w});
  fill_uniform(x, rng, 1.0);

  EquivarianceReport report;
  const Tensor<T> acda_base = forward_fast(acda, x);
  const Tensor<T> conv_base = forward(conv, x);
  for (const auto& [di, dj] : shifts) {
    const Tensor<T> xs = circular_shift(x, di, dj);
    EquivarianceCase a{"acda", di, dj,
                       static_cast<double>(max_abs_diff(forward_fast(acda, xs),
                                                        circular_shift(acda_base, di, dj)))};
    EquivarianceCase c{"conv", di, dj,
                       static_cast<double>(max_abs_diff(forward(conv, xs),
                                                        circular_shift(conv_base, di, dj)))};
    report.max_deviation = std::max({report.max_deviation, a.deviation, c.deviation});
    report.cases.push_back(a);
    report.cases.push_back(c);
  }
  return report;
}

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_param;
  Index worst_index = -1;
  double analytic = 0.0, numeric = 0.0;
  Index checked = 0;
};

/// Central-difference check of every element of every parameter against the
/// gradients already sitting in the set's accumulators. The oracle only calls
/// the forward path, so it is independent of the adjoint implementations.
template <typename T>
GradCheckResult finite_difference_check(ParameterSet<T>& params,
                                        const std::function<double()>& compute_loss,
                                        double eps = 1e-5) {
  static_assert(std::is_same_v<T, double>, "finite differences need 64-bit parameters");
  GradCheckResult result;
  for (Index pi = 0; pi < params.count(); ++pi) {
    Tensor<T>& value = params.value(pi);
    const Tensor<T>& grad = params.grad(pi);
    for (Index i = 0; i < value.size(); ++i) {
      const double orig = value[i];
      value[i] = orig + eps;
      const double lp = compute_loss();
      value[i] = orig - eps;
      const double lm = compute_loss();
      value[i] = orig;
      const double numeric = (lp - lm) / (2.0 * eps);
      const double analytic = grad[i];
      const double denom = std::max({std::abs(numeric), std::abs(analytic), 1e-6});
      const double rel = std::abs(numeric - analytic) / denom;
      ++result.checked;
      if (rel > result.max_rel_error) {
        result.max_rel_error = rel;
        result.worst_param = params.name(pi);
        result.worst_index = i;
        result.analytic = analytic;
        result.numeric = numeric;
      }
    }
  }
  return result;
}

/// End-to-end gradient check of a small 64-bit layer under MSE.
inline GradCheckResult acda_gradcheck(std::uint64_t seed, Index c_in = 2, Index c_out = 2,
                                      Index m = 2, Index h = 6, Index w = 6,
                                      Index hidden = 5) {
  Rng rng(seed);
  auto layer = make_acda_layer<double>(c_in, c_out, m,
                                       build_multiscale({3, 5}, 3), hidden,
                                       PaddingMode::kCircular, rng);
  Tensor<double> x({c_in, h, w});
  Tensor<double> target({c_out, h, w});
  fill_uniform(x, rng, 1.0);
  fill_uniform(target, rng, 1.0);

  ParameterSet<double> params = make_parameter_set(layer);
  {
    Tape<double> tape;
    const auto slots = bind_acda_params(tape, params);
    const Index pred = record_forward_fast(tape, layer, slots, tape.leaf(x));
    tape.backward(ops::mse_loss(tape, pred, tape.leaf(target)));
  }
  return finite_difference_check<double>(params, [&] {
    Tape<double> tape;
    const auto slots = leaf_acda_params(tape, layer);
    const Index pred = record_forward_fast(tape, layer, slots, tape.leaf(x));
    return tape.value(ops::mse_loss(tape, pred, tape.leaf(target)))[0];
  });
}

}  // namespace acda
