#include <doctest.h>

#include <set>

#include "acda/toy.hpp"

using namespace acda;

namespace {

ToyConfig small_config(std::uint64_t seed) {
  ToyConfig cfg;
  cfg.map_size = 24;
  cfg.pattern_count = 4;
  cfg.seed = seed;
  cfg.max_iterations = 60;
  cfg.convergence_tol = 0.0;
  cfg.generator_width = 6;
  return cfg;
}

}  // namespace

TEST_SUITE_BEGIN("toy");

TEST_CASE("synthesize with zero patterns is pure noise") {
  ToyConfig cfg;
  cfg.pattern_count = 0;
  const auto inst = synthesize<float>(cfg);
  REQUIRE(inst.input.shape() == Shape{1, 100, 100});
  for (Index i = 0; i < inst.ground_truth.size(); ++i) CHECK(inst.ground_truth[i] == 0.0f);
  CHECK(inst.centers.empty());
  double sum_sq = 0.0;
  for (Index i = 0; i < inst.input.size(); ++i) sum_sq += inst.input[i] * inst.input[i];
  // Sample variance close to sigma^2.
  CHECK(sum_sq / inst.input.size() == doctest::Approx(0.01).epsilon(0.2));
}

TEST_CASE("default synthesis marks exactly 25 centers, split 9/8/8") {
  const ToyConfig cfg;
  const auto inst = synthesize<float>(cfg);
  Index ones = 0;
  for (Index i = 0; i < inst.ground_truth.size(); ++i)
    if (inst.ground_truth[i] == 1.0f) ++ones;
  CHECK(ones == 25);
  REQUIRE(inst.centers.size() == 25);
  Index per_scale[8] = {0};
  for (const auto& c : inst.centers) per_scale[c.scale] += 1;
  CHECK(per_scale[3] == 9);
  CHECK(per_scale[5] == 8);
  CHECK(per_scale[7] == 8);
}

TEST_CASE("pattern supports are pairwise disjoint") {
  const ToyConfig cfg;
  const auto inst = synthesize<float>(cfg);
  std::set<Index> covered;
  for (const auto& c : inst.centers) {
    const Index d = c.scale / 2;
    for (Index u = -d; u <= d; ++u)
      for (Index v = -d; v <= d; ++v) {
        const Index cell = (c.i + u) * cfg.map_size + c.j + v;
        CHECK(covered.insert(cell).second);
      }
  }
}

TEST_CASE("synthesis is bitwise deterministic in the seed") {
  ToyConfig cfg;
  cfg.seed = 77;
  const auto a = synthesize<float>(cfg);
  const auto b = synthesize<float>(cfg);
  CHECK(a.input == b.input);
  CHECK(a.ground_truth == b.ground_truth);
  cfg.seed = 78;
  CHECK_FALSE(synthesize<float>(cfg).input == a.input);
}

TEST_CASE("impossible placements raise a synthesis error") {
  ToyConfig cfg;
  cfg.map_size = 9;
  cfg.pattern_count = 30;  // 30 disjoint 3..7 patterns cannot fit on 9x9
  CHECK_THROWS_AS(synthesize<float>(cfg), SynthesisError);
}

TEST_CASE("toy basis scales derive from the kernel size") {
  CHECK(toy_basis_scales(7) == std::vector<Index>{3, 5, 7});
  CHECK(toy_basis_scales(5) == std::vector<Index>{3, 5});
  CHECK(toy_basis_scales(3) == std::vector<Index>{3});
  CHECK_THROWS_AS(toy_basis_scales(9), std::invalid_argument);
  CHECK_THROWS_AS(toy_basis_scales(4), std::invalid_argument);
}

TEST_CASE("training reduces the loss on a small instance") {
  const ToyConfig cfg = small_config(5);
  const auto inst = synthesize<float>(cfg);
  for (LayerKind kind : {LayerKind::kConv, LayerKind::kAcda}) {
    const auto result = train_single_layer(kind, inst, cfg);
    REQUIRE(result.history.size() == static_cast<size_t>(result.iterations));
    CHECK(result.iterations == 60);
    CHECK(result.final_mse < result.history.front().loss);
    CHECK(result.final_mse == result.history.back().loss);
    for (size_t i = 0; i < result.history.size(); ++i) {
      CHECK(result.history[i].iteration == static_cast<Index>(i));
      CHECK(std::isfinite(result.history[i].loss));
    }
  }
}

TEST_CASE("convergence window stops training early on a flat loss") {
  ToyConfig cfg = small_config(6);
  cfg.learning_rate = 0.0;  // loss cannot improve
  cfg.max_iterations = 500;
  cfg.convergence_tol = 1e-5;
  const auto inst = synthesize<float>(cfg);
  const auto result = train_single_layer(LayerKind::kConv, inst, cfg);
  CHECK(result.iterations == 101);  // first window check fires
}

TEST_CASE("divergence raises a training error with diagnostics") {
  ToyConfig cfg = small_config(7);
  cfg.learning_rate = 1e9;
  cfg.max_iterations = 500;
  CHECK_THROWS_AS(
      train_single_layer(LayerKind::kConv, synthesize<float>(cfg), cfg),
      TrainingError);
}

TEST_CASE("shift_test is zero for a zero shift and tiny for (20,20)") {
  const ToyConfig cfg = small_config(8);
  const auto inst = synthesize<float>(cfg);
  ToyConfig quick = cfg;
  quick.max_iterations = 5;
  for (LayerKind kind : {LayerKind::kConv, LayerKind::kAcda}) {
    const auto result = train_single_layer(kind, inst, quick);
    CHECK(shift_test(result.layer, inst, 0, 0) == 0.0);
    CHECK(shift_test(result.layer, inst, 20, 20) <= 1e-5);
  }
}

TEST_CASE("detection_hits counts centers within one pixel") {
  ToyConfig cfg;
  const auto inst = synthesize<float>(cfg);
  CHECK(detection_hits(inst.ground_truth, inst.centers) == 25);
  // Shifting the prediction by one pixel stays within tolerance.
  CHECK(detection_hits(circular_shift(inst.ground_truth, 1, 1), inst.centers) == 25);
  // Two pixels off misses (centers are interior, no wraparound effects).
  Tensor<float> zeros({1, 100, 100});
  CHECK(detection_hits(zeros, inst.centers) == 0);
}

TEST_SUITE_END();
