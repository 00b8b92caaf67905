#pragma once

#include <chrono>
#include <cmath>
#include <string>
#include <variant>
#include <vector>

#include "acda/layer.hpp"
#include "acda/rng.hpp"

namespace acda {

/// Pattern-detection problem: multi-scale patterns placed on a noisy map, the
/// target marks pattern centers with 1.
struct ToyConfig {
  Index map_size = 100;
  Index pattern_count = 25;
  std::vector<Index> pattern_scales = {3, 5, 7};
  double noise_sigma = 0.1;
  std::uint64_t seed = 1;
  Index kernel_size = 7;  // both layers
  double learning_rate = 0.01;
  Index max_iterations = 20000;
  double convergence_tol = 1e-5;  // relative improvement over a 100-iteration window
  Index atom_count = kDefaultAtomCount;
  // Generator hidden width for the toy layer. The single-channel toy input
  // needs far less width than a deep-feature layer; 16 trains to the same
  // quality as 64 in a fraction of the time (see README).
  Index generator_width = 16;
};

struct PatternCenter {
  Index i, j, scale;
};

template <typename T>
struct ToyInstance {
  Tensor<T> input;         // [1, n, n]
  Tensor<T> ground_truth;  // [1, n, n], 1 at pattern centers
  std::vector<PatternCenter> centers;
};

struct SynthesisError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TrainingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Deterministic synthesis: Gaussian background, then per-scale templates
/// (uniform values in [-1,1], rescaled to unit peak) added at non-overlapping
/// centers. Counts split evenly across scales, remainder to the smaller ones.
template <typename T>
ToyInstance<T> synthesize(const ToyConfig& config) {
  const Index n = config.map_size;
  detail::check(n >= 1, "map_size must be positive");
  for (Index l : config.pattern_scales)
    detail::check(l % 2 == 1 && l >= 1 && l <= n, "pattern scales must be odd and fit the map");

  Rng rng(config.seed);

  // Templates first, then noise, then placement; the draw order is part of the
  // determinism contract.
  std::vector<Tensor<double>> templates;
  for (Index l : config.pattern_scales) {
    Tensor<double> t({l, l});
    double peak = 0.0;
    for (Index i = 0; i < t.size(); ++i) {
      t[i] = rng.uniform(-1.0, 1.0);
      peak = std::max(peak, std::abs(t[i]));
    }
    for (Index i = 0; i < t.size(); ++i) t[i] /= peak;
    templates.push_back(std::move(t));
  }

  Tensor<double> input({1, n, n});
  for (Index i = 0; i < input.size(); ++i) input[i] = config.noise_sigma * rng.normal();

  Tensor<double> gt({1, n, n});
  std::vector<PatternCenter> centers;
  std::vector<char> occupied(static_cast<size_t>(n * n), 0);

  const Index s_count = static_cast<Index>(config.pattern_scales.size());
  for (Index s = 0; s < s_count; ++s) {
    Index count = 0;
    if (config.pattern_count > 0 && s_count > 0) {
      count = config.pattern_count / s_count;
      if (s < config.pattern_count % s_count) ++count;
    }
    const Index l = config.pattern_scales[static_cast<size_t>(s)];
    const Index d = l / 2;
    for (Index pat = 0; pat < count; ++pat) {
      bool placed = false;
      for (int attempt = 0; attempt < 10000 && !placed; ++attempt) {
        const Index ci = d + static_cast<Index>(rng.below(static_cast<std::uint64_t>(n - 2 * d)));
        const Index cj = d + static_cast<Index>(rng.below(static_cast<std::uint64_t>(n - 2 * d)));
        bool free = true;
        for (Index u = -d; u <= d && free; ++u)
          for (Index v = -d; v <= d && free; ++v)
            free = !occupied[static_cast<size_t>((ci + u) * n + cj + v)];
        if (!free) continue;
        const Tensor<double>& tpl = templates[static_cast<size_t>(s)];
        for (Index u = -d; u <= d; ++u)
          for (Index v = -d; v <= d; ++v) {
            occupied[static_cast<size_t>((ci + u) * n + cj + v)] = 1;
            input[(ci + u) * n + cj + v] += tpl[(u + d) * l + v + d];
          }
        gt[ci * n + cj] = 1.0;
        centers.push_back({ci, cj, l});
        placed = true;
      }
      if (!placed)
        throw SynthesisError("pattern placement failed after bounded rejection attempts");
    }
  }

  ToyInstance<T> instance;
  instance.input = input.cast<T>();
  instance.ground_truth = gt.cast<T>();
  instance.centers = std::move(centers);
  return instance;
}

enum class LayerKind { kConv, kAcda };

inline const char* to_string(LayerKind kind) {
  return kind == LayerKind::kConv ? "conv" : "acda";
}

struct LossRecord {
  Index iteration;
  double loss;
  double wall_ms;
};

template <typename T>
struct TrainResult {
  std::variant<ConvLayer<T>, AcdaLayer<T>> layer;
  double final_mse = 0.0;
  Index iterations = 0;
  std::vector<LossRecord> history;
};

/// Odd basis scales 3,5,...,kernel_size for the toy ACDA layer.
inline std::vector<Index> toy_basis_scales(Index kernel_size) {
  detail::check(kernel_size % 2 == 1 && kernel_size >= 3 && kernel_size <= 7,
                "toy kernel size must be odd and within the supported basis scales");
  std::vector<Index> scales;
  for (Index l = 3; l <= kernel_size; l += 2) scales.push_back(l);
  return scales;
}

/// Full-batch gradient descent on the single training sample under MSE; with one
/// sample this coincides with the SGD the training recipe names. Stops when the
/// relative improvement over the trailing 100 iterations drops below
/// convergence_tol, or at max_iterations.
template <typename T>
TrainResult<T> train_single_layer(LayerKind kind, const ToyInstance<T>& instance,
                                  const ToyConfig& config) {
  detail::check(instance.input.rank() == 3 && instance.input.extent(0) == 1,
                "toy instance must have a single input channel");
  const auto t0 = std::chrono::steady_clock::now();
  const auto elapsed_ms = [&t0] {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
  };

  // Separate init streams so the two layer kinds draw independent weights.
  Rng rng(config.seed ^ (kind == LayerKind::kConv ? 0x636f6e76ull : 0x61636461ull));

  TrainResult<T> result;
  ConvLayer<T> conv;
  AcdaLayer<T> acda;
  if (kind == LayerKind::kConv) {
    conv = make_conv_layer<T>(1, 1, config.kernel_size, PaddingMode::kCircular, rng);
  } else {
    acda = make_acda_layer<T>(1, 1, config.atom_count,
                              build_multiscale(toy_basis_scales(config.kernel_size),
                                               kDefaultBasisElements),
                              config.generator_width, PaddingMode::kCircular, rng);
  }
  ParameterSet<T> params = kind == LayerKind::kConv ? make_parameter_set(conv)
                                                    : make_parameter_set(acda);

  std::vector<double> losses;
  losses.reserve(static_cast<size_t>(config.max_iterations));
  const Index window = 100;

  for (Index it = 0; it < config.max_iterations; ++it) {
    Tape<T> tape;
    const Index input = tape.leaf(instance.input);
    const Index target = tape.leaf(instance.ground_truth);
    Index pred;
    if (kind == LayerKind::kConv) {
      const Index f = tape.param(params, "filter");
      const Index b = tape.param(params, "bias");
      pred = record_forward(tape, conv, f, b, input);
    } else {
      const auto slots = bind_acda_params(tape, params);
      pred = record_forward_fast(tape, acda, slots, input);
    }
    const Index loss_slot = ops::mse_loss(tape, pred, target);
    const double loss = static_cast<double>(tape.value(loss_slot)[0]);
    if (!std::isfinite(loss))
      throw TrainingError("training diverged: loss is not finite at iteration " +
                          std::to_string(it) + " (" + to_string(kind) + ", lr " +
                          std::to_string(config.learning_rate) + ")");
    losses.push_back(loss);
    result.history.push_back({it, loss, elapsed_ms()});

    tape.backward(loss_slot);
    sgd_step(params, config.learning_rate);

    if (it >= window) {
      const double past = losses[static_cast<size_t>(it - window)];
      if (past > 0.0 && (past - loss) / past < config.convergence_tol) {
        result.iterations = it + 1;
        break;
      }
    }
    result.iterations = it + 1;
  }

  result.final_mse = losses.empty() ? 0.0 : losses.back();
  if (kind == LayerKind::kConv)
    result.layer = std::move(conv);
  else
    result.layer = std::move(acda);
  return result;
}

template <typename T>
Tensor<T> toy_forward(const std::variant<ConvLayer<T>, AcdaLayer<T>>& layer,
                      const Tensor<T>& input) {
  if (std::holds_alternative<ConvLayer<T>>(layer))
    return forward(std::get<ConvLayer<T>>(layer), input);
  return forward_fast(std::get<AcdaLayer<T>>(layer), input);
}

/// Max absolute deviation between output(shift(input)) and shift(output(input)).
/// Exact (zero) for circular padding in exact arithmetic.
template <typename T>
double shift_test(const std::variant<ConvLayer<T>, AcdaLayer<T>>& layer,
                  const ToyInstance<T>& instance, Index di = 20, Index dj = 20) {
  const Tensor<T> base = toy_forward(layer, instance.input);
  const Tensor<T> shifted_out = toy_forward(layer, circular_shift(instance.input, di, dj));
  return static_cast<double>(max_abs_diff(shifted_out, circular_shift(base, di, dj)));
}

/// Counts ground-truth centers whose 3x3 neighborhood contains a prediction at
/// or above the threshold (detection within 1-pixel tolerance).
template <typename T>
Index detection_hits(const Tensor<T>& prediction, const std::vector<PatternCenter>& centers,
                     double threshold = 0.5) {
  detail::check(prediction.rank() == 3 && prediction.extent(0) == 1,
                "prediction must be [1,h,w]");
  const Index h = prediction.extent(1), w = prediction.extent(2);
  Index hits = 0;
  for (const PatternCenter& ctr : centers) {
    bool hit = false;
    for (Index u = -1; u <= 1 && !hit; ++u)
      for (Index v = -1; v <= 1 && !hit; ++v) {
        const Index i = ctr.i + u, j = ctr.j + v;
        if (i < 0 || i >= h || j < 0 || j >= w) continue;
        hit = static_cast<double>(prediction[i * w + j]) >= threshold;
      }
    if (hit) ++hits;
  }
  return hits;
}

}  // namespace acda
