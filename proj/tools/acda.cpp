// Command-line front end: basis dumps, toy experiments, cost reports, and the
// verification sweeps, all reproducible from (config, seed).

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "acda/checks.hpp"
#include "acda/cost.hpp"
#include "acda/fourier_bessel.hpp"
#include "acda/layer_io.hpp"
#include "acda/pgm.hpp"
#include "acda/serialize.hpp"
#include "acda/toy.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 1;
constexpr int kExitRuntimeError = 2;

struct CommonOpts {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string precision = "f32";
  std::string out_dir;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "JSON config file");
  cmd->add_option("--seed", opts.seed, "Global seed override");
  cmd->add_option("--precision", opts.precision, "Scalar precision")
      ->check(CLI::IsMember({"f32", "f64"}));
  cmd->add_option("--out", opts.out_dir, "Output directory (default $ACDA_OUT_DIR or ./acda-out)");
}

fs::path resolve_out_dir(const CommonOpts& opts) {
  if (!opts.out_dir.empty()) return opts.out_dir;
  if (const char* env = std::getenv("ACDA_OUT_DIR")) return env;
  return "acda-out";
}

/// Files produced by one command, recorded into manifest.json.
class OutputDir {
 public:
  explicit OutputDir(fs::path dir, std::string command)
      : dir_(std::move(dir)), command_(std::move(command)) {
    fs::create_directories(dir_);
  }

  fs::path path(const std::string& name) {
    files_.push_back(name);
    return dir_ / name;
  }

  void write_json(const std::string& name, const json& j) {
    std::ofstream out(path(name));
    if (!out) throw std::runtime_error("cannot write " + name);
    out << j.dump(2) << "\n";
  }

  void note_subdir(const std::string& name) { files_.push_back(name + "/"); }

  void finish() {
    json manifest;
    manifest["command"] = command_;
    manifest["files"] = files_;
    std::ofstream out(dir_ / "manifest.json");
    out << manifest.dump(2) << "\n";
  }

  const fs::path& dir() const { return dir_; }

 private:
  fs::path dir_;
  std::string command_;
  std::vector<std::string> files_;
};

json load_config_json(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config: " + path);
  return json::parse(in);
}

void reject_unknown_keys(const json& j, const std::vector<std::string>& allowed,
                         const std::string& context) {
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const std::string& a : allowed) known = known || key == a;
    if (!known)
      throw std::invalid_argument("unknown " + context + " config field: " + key);
  }
}

template <typename V>
V config_value(const json& j, const std::string& key, V fallback) {
  if (!j.contains(key)) return fallback;
  return j.at(key).get<V>();
}

// ---------------------------------------------------------------------------
// gen-bases
// ---------------------------------------------------------------------------

int run_gen_bases(const CommonOpts& opts, std::vector<acda::Index> scales,
                  acda::Index m_prime) {
  OutputDir out(resolve_out_dir(opts), "gen-bases");
  const acda::BasisSet set = acda::build_multiscale(scales, m_prime);

  json config{{"scales", scales}, {"m_prime", m_prime}};
  out.write_json("config.json", config);

  acda::save_tensor(out.path("bases.tensor").string(), set.bases);
  const acda::Index L = set.padded_size;
  for (acda::Index e = 0; e < set.count(); ++e) {
    const acda::Index scale = set.scales[static_cast<size_t>(e / m_prime)];
    acda::Tensor<double> img({L, L});
    for (acda::Index i = 0; i < L * L; ++i) img[i] = set.bases[e * L * L + i];
    char name[64];
    std::snprintf(name, sizeof(name), "basis_%02lld_scale%lld.pgm",
                  static_cast<long long>(e), static_cast<long long>(scale));
    acda::write_pgm(out.path(name).string(), img);
  }
  out.finish();
  std::cout << "wrote " << set.count() << " basis elements (L=" << L << ") to "
            << out.dir().string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// toy
// ---------------------------------------------------------------------------

acda::ToyConfig parse_toy_config(const json& j, const CommonOpts& opts) {
  reject_unknown_keys(j,
                      {"map_size", "pattern_count", "pattern_scales", "noise_sigma",
                       "seed", "kernel_size", "learning_rate", "max_iterations",
                       "convergence_tol", "atom_count", "generator_width"},
                      "toy");
  acda::ToyConfig cfg;
  cfg.map_size = config_value<acda::Index>(j, "map_size", cfg.map_size);
  cfg.pattern_count = config_value<acda::Index>(j, "pattern_count", cfg.pattern_count);
  cfg.pattern_scales =
      config_value<std::vector<acda::Index>>(j, "pattern_scales", cfg.pattern_scales);
  cfg.noise_sigma = config_value<double>(j, "noise_sigma", cfg.noise_sigma);
  cfg.seed = config_value<std::uint64_t>(j, "seed", cfg.seed);
  cfg.kernel_size = config_value<acda::Index>(j, "kernel_size", cfg.kernel_size);
  cfg.learning_rate = config_value<double>(j, "learning_rate", cfg.learning_rate);
  cfg.max_iterations = config_value<acda::Index>(j, "max_iterations", cfg.max_iterations);
  cfg.convergence_tol = config_value<double>(j, "convergence_tol", cfg.convergence_tol);
  cfg.atom_count = config_value<acda::Index>(j, "atom_count", cfg.atom_count);
  cfg.generator_width = config_value<acda::Index>(j, "generator_width", cfg.generator_width);
  if (opts.seed) cfg.seed = *opts.seed;
  return cfg;
}

json toy_config_json(const acda::ToyConfig& cfg) {
  return json{{"map_size", cfg.map_size},
              {"pattern_count", cfg.pattern_count},
              {"pattern_scales", cfg.pattern_scales},
              {"noise_sigma", cfg.noise_sigma},
              {"seed", cfg.seed},
              {"kernel_size", cfg.kernel_size},
              {"learning_rate", cfg.learning_rate},
              {"max_iterations", cfg.max_iterations},
              {"convergence_tol", cfg.convergence_tol},
              {"atom_count", cfg.atom_count},
              {"generator_width", cfg.generator_width}};
}

template <typename T>
void write_loss_csv(const fs::path& path, const std::vector<acda::LossRecord>& history) {
  std::ofstream out(path);
  out << "iteration,loss,wall_ms\n";
  for (const acda::LossRecord& r : history) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%lld,%.9e,%.3f\n", static_cast<long long>(r.iteration),
                  r.loss, r.wall_ms);
    out << buf;
  }
}

template <typename T>
acda::Tensor<T> fresh_noise_shifted_input(const acda::ToyConfig& cfg,
                                          const acda::ToyInstance<T>& instance,
                                          acda::Index di, acda::Index dj) {
  // Paper-style qualitative variant: same patterns moved bottom-right onto a
  // fresh noise canvas (wrapping at the border).
  acda::Rng noise_rng(cfg.seed ^ 0x66726573686e6f69ull);
  const acda::Index n = cfg.map_size;
  acda::Tensor<double> canvas({1, n, n});
  for (acda::Index i = 0; i < canvas.size(); ++i)
    canvas[i] = cfg.noise_sigma * noise_rng.normal();

  acda::Rng tpl_rng(cfg.seed);
  std::vector<acda::Tensor<double>> templates;
  for (acda::Index l : cfg.pattern_scales) {
    acda::Tensor<double> t({l, l});
    double peak = 0.0;
    for (acda::Index i = 0; i < t.size(); ++i) {
      t[i] = tpl_rng.uniform(-1.0, 1.0);
      peak = std::max(peak, std::abs(t[i]));
    }
    for (acda::Index i = 0; i < t.size(); ++i) t[i] /= peak;
    templates.push_back(std::move(t));
  }
  const auto scale_index = [&](acda::Index l) {
    for (size_t s = 0; s < cfg.pattern_scales.size(); ++s)
      if (cfg.pattern_scales[s] == l) return s;
    throw std::runtime_error("instance scale missing from config");
  };
  const auto mod = [n](acda::Index a) { return ((a % n) + n) % n; };
  for (const acda::PatternCenter& ctr : instance.centers) {
    const acda::Tensor<double>& tpl = templates[scale_index(ctr.scale)];
    const acda::Index d = ctr.scale / 2;
    for (acda::Index u = -d; u <= d; ++u)
      for (acda::Index v = -d; v <= d; ++v)
        canvas[mod(ctr.i + di + u) * n + mod(ctr.j + dj + v)] +=
            tpl[(u + d) * ctr.scale + v + d];
  }
  return canvas.cast<T>();
}

template <typename T>
int run_toy_typed(const CommonOpts& opts, const acda::ToyConfig& cfg, acda::Index di,
                  acda::Index dj, bool fresh_noise, const std::vector<acda::Index>& sweep_m,
                  const std::vector<acda::Index>& sweep_scales) {
  OutputDir out(resolve_out_dir(opts), "toy");
  json config = toy_config_json(cfg);
  config["precision"] = opts.precision;
  config["shift"] = {di, dj};
  out.write_json("config.json", config);

  const acda::ToyInstance<T> instance = acda::synthesize<T>(cfg);
  acda::write_pgm(out.path("input.pgm").string(), instance.input.template cast<double>());
  acda::write_pgm(out.path("ground_truth.pgm").string(),
                  instance.ground_truth.template cast<double>());
  const acda::Tensor<T> shifted_input = acda::circular_shift(instance.input, di, dj);
  acda::write_pgm(out.path("input_shifted.pgm").string(),
                  shifted_input.template cast<double>());
  acda::write_pgm(out.path("ground_truth_shifted.pgm").string(),
                  acda::circular_shift(instance.ground_truth, di, dj).template cast<double>());

  json results;
  results["seed"] = cfg.seed;
  results["precision"] = opts.precision;
  results["shift"] = {di, dj};
  json runs = json::array();
  json timing;

  double conv_mse = 0.0, acda_mse = 0.0;
  for (const acda::LayerKind kind : {acda::LayerKind::kConv, acda::LayerKind::kAcda}) {
    const std::string name = acda::to_string(kind);
    const auto t0 = std::chrono::steady_clock::now();
    const acda::TrainResult<T> trained = acda::train_single_layer(kind, instance, cfg);
    const double train_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
            .count();
    write_loss_csv<T>(out.path("loss_" + name + ".csv"), trained.history);

    const acda::Tensor<T> pred = acda::toy_forward(trained.layer, instance.input);
    acda::write_pgm(out.path(name + "_pred.pgm").string(), pred.template cast<double>());
    acda::write_pgm(out.path(name + "_pred_shifted.pgm").string(),
                    acda::toy_forward(trained.layer, shifted_input).template cast<double>());
    const double deviation = acda::shift_test(trained.layer, instance, di, dj);

    json record{{"seed", cfg.seed},
                {"kind", name},
                {"iterations", trained.iterations},
                {"final_mse", trained.final_mse},
                {"shift_deviation", deviation}};
    if (kind == acda::LayerKind::kConv) {
      conv_mse = trained.final_mse;
      acda::save_layer(out.dir() / "conv_layer", std::get<acda::ConvLayer<T>>(trained.layer));
      out.note_subdir("conv_layer");
    } else {
      acda_mse = trained.final_mse;
      const auto& layer = std::get<acda::AcdaLayer<T>>(trained.layer);
      acda::save_layer(out.dir() / "acda_layer", layer);
      out.note_subdir("acda_layer");
      record["detection_hits"] = acda::detection_hits(pred, instance.centers);
      record["detection_total"] = static_cast<acda::Index>(instance.centers.size());
      if (fresh_noise) {
        const acda::Tensor<T> fresh = fresh_noise_shifted_input(cfg, instance, di, dj);
        acda::write_pgm(out.path("input_fresh_noise_shift.pgm").string(),
                        fresh.template cast<double>());
        acda::write_pgm(out.path("acda_pred_fresh_noise_shift.pgm").string(),
                        acda::forward_fast(layer, fresh).template cast<double>());
      }
    }
    runs.push_back(record);
    timing[name + "_train_ms"] = train_ms;
  }
  results["runs"] = runs;
  results["mse_ratio_conv_over_acda"] = acda_mse > 0.0 ? conv_mse / acda_mse : 0.0;
  results["timing"] = timing;

  if (!sweep_m.empty() || !sweep_scales.empty()) {
    json sweep = json::array();
    for (const acda::Index m : sweep_m) {
      acda::ToyConfig scfg = cfg;
      scfg.atom_count = m;
      const auto r = acda::train_single_layer(acda::LayerKind::kAcda, instance, scfg);
      sweep.push_back({{"atom_count", m},
                       {"kernel_size", scfg.kernel_size},
                       {"iterations", r.iterations},
                       {"final_mse", r.final_mse}});
    }
    for (const acda::Index ks : sweep_scales) {
      acda::ToyConfig scfg = cfg;
      scfg.kernel_size = ks;
      const auto r = acda::train_single_layer(acda::LayerKind::kAcda, instance, scfg);
      sweep.push_back({{"atom_count", scfg.atom_count},
                       {"kernel_size", ks},
                       {"iterations", r.iterations},
                       {"final_mse", r.final_mse}});
    }
    results["sweep"] = sweep;
  }

  out.write_json("results.json", results);
  out.finish();
  std::cout << "conv final mse " << conv_mse << ", acda final mse " << acda_mse
            << " (ratio " << (acda_mse > 0 ? conv_mse / acda_mse : 0.0) << ")\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// cost-report
// ---------------------------------------------------------------------------

acda::CostConfig parse_cost_config(const json& j) {
  reject_unknown_keys(j,
                      {"c_in", "c_out", "h", "w", "l", "m", "S", "m_prime", "d", "l_a",
                       "l_b", "L", "bytes_per_scalar"},
                      "cost");
  acda::CostConfig cfg;
  cfg.c_in = config_value<std::int64_t>(j, "c_in", cfg.c_in);
  cfg.c_out = config_value<std::int64_t>(j, "c_out", cfg.c_out);
  cfg.h = config_value<std::int64_t>(j, "h", cfg.h);
  cfg.w = config_value<std::int64_t>(j, "w", cfg.w);
  cfg.l = config_value<std::int64_t>(j, "l", cfg.l);
  cfg.m = config_value<std::int64_t>(j, "m", cfg.m);
  cfg.s = config_value<std::int64_t>(j, "S", cfg.s);
  cfg.m_prime = config_value<std::int64_t>(j, "m_prime", cfg.m_prime);
  cfg.d = config_value<std::int64_t>(j, "d", cfg.d);
  cfg.l_a = config_value<std::int64_t>(j, "l_a", cfg.l_a);
  cfg.l_b = config_value<std::int64_t>(j, "l_b", cfg.l_b);
  cfg.big_l = config_value<std::int64_t>(j, "L", cfg.big_l);
  cfg.bytes_per_scalar = config_value<std::int64_t>(j, "bytes_per_scalar", cfg.bytes_per_scalar);
  cfg.validate();
  return cfg;
}

json report_items_json(const acda::CostReport& report) {
  json flops, params;
  for (const auto& [name, v] : report.flops_items) flops[name] = v;
  for (const auto& [name, v] : report.params_items) params[name] = v;
  return json{{"flops", flops},
              {"flops_total", report.flops_total()},
              {"params", params},
              {"params_total", report.params_total()},
              {"flags", report.flags}};
}

int run_cost(const CommonOpts& opts) {
  const acda::CostConfig base = parse_cost_config(load_config_json(opts.config_path));
  OutputDir out(resolve_out_dir(opts), "cost-report");
  out.write_json("config.json",
                 json{{"c_in", base.c_in}, {"c_out", base.c_out}, {"h", base.h},
                      {"w", base.w}, {"l", base.l}, {"m", base.m}, {"S", base.s},
                      {"m_prime", base.m_prime}, {"d", base.d}, {"l_a", base.l_a},
                      {"l_b", base.l_b}, {"L", base.big_l},
                      {"bytes_per_scalar", base.bytes_per_scalar}});

  const std::string table = acda::cost_table_text(base);
  {
    std::ofstream txt(out.path("cost_table.txt"));
    txt << table;
  }
  std::cout << table;

  json rows = json::array();
  for (const acda::CostReference& ref : acda::cost_reference_table()) {
    acda::CostConfig cfg = base;
    cfg.l = ref.l;
    const auto conv = acda::conv_cost(cfg);
    const auto aconv = acda::acda_conv_cost(cfg);
    const auto afull = acda::acda_full_cost(cfg);
    const auto mem = acda::per_pixel_filter_memory(cfg);
    const auto dm = [](std::int64_t v, double ref_m) {
      return static_cast<double>(v) / 1e6 - ref_m;
    };
    rows.push_back(
        {{"kernel_size", ref.l},
         {"conv", report_items_json(conv)},
         {"acda_conv_only", report_items_json(aconv)},
         {"acda_full", report_items_json(afull)},
         {"reference_millions",
          {{"conv_flops", ref.conv_flops_m},
           {"acda_conv_flops", ref.acda_conv_flops_m},
           {"acda_full_flops", ref.acda_full_flops_m},
           {"conv_params", ref.conv_params_m},
           {"acda_conv_params", ref.acda_conv_params_m},
           {"acda_full_params", ref.acda_full_params_m}}},
         {"delta_millions",
          {{"conv_flops", dm(conv.flops_total(), ref.conv_flops_m)},
           {"acda_conv_flops", dm(aconv.flops_total(), ref.acda_conv_flops_m)},
           {"acda_full_flops", dm(afull.flops_total(), ref.acda_full_flops_m)},
           {"conv_params", dm(conv.params_total(), ref.conv_params_m)},
           {"acda_conv_params", dm(aconv.params_total(), ref.acda_conv_params_m)},
           {"acda_full_params", dm(afull.params_total(), ref.acda_full_params_m)}}},
         {"memory_bytes",
          {{"naive_per_pixel_filters", mem.naive_filter_bytes},
           {"acda_atoms", mem.acda_atom_bytes}}}});
  }
  out.write_json("cost_report.json", json{{"rows", rows}});
  out.finish();
  return kExitOk;
}

// ---------------------------------------------------------------------------
// check
// ---------------------------------------------------------------------------

template <typename T>
int run_check_typed(const CommonOpts& opts, const std::string& mode, std::uint64_t seed,
                    acda::Index height, acda::Index width) {
  OutputDir out(resolve_out_dir(opts), "check");
  out.write_json("config.json", json{{"mode", mode},
                                     {"seed", seed},
                                     {"precision", opts.precision},
                                     {"height", height},
                                     {"width", width}});
  json report{{"mode", mode}, {"seed", seed}};
  bool pass = true;

  if (mode == "equivalence") {
    const double tol = std::is_same_v<T, double> ? 1e-10 : 1e-5;
    const auto r = acda::equivalence_sweep<T>(seed);
    for (const auto& c : r.cases) {
      std::printf("equivalence c'=%lld c=%lld m=%lld %lldx%lld: rel dev %.3e\n",
                  static_cast<long long>(c.c_in), static_cast<long long>(c.c_out),
                  static_cast<long long>(c.m), static_cast<long long>(c.h),
                  static_cast<long long>(c.w), c.rel_dev);
      if (c.rel_dev > tol) pass = false;
    }
    std::printf("max relative deviation: %.3e (tolerance %.0e)\n", r.max_rel_dev, tol);
    report["max_rel_dev"] = r.max_rel_dev;
    report["tolerance"] = tol;
  } else if (mode == "equivariance") {
    const double tol = 1e-5;
    const auto r = acda::equivariance_sweep<T>(seed, height, width);
    for (const auto& c : r.cases)
      std::printf("equivariance %s shift (%lld,%lld): max abs dev %.3e\n",
                  c.layer_kind.c_str(), static_cast<long long>(c.di),
                  static_cast<long long>(c.dj), c.deviation);
    std::printf("max deviation: %.3e (tolerance %.0e)\n", r.max_deviation, tol);
    pass = r.max_deviation <= tol;
    report["max_deviation"] = r.max_deviation;
    report["tolerance"] = tol;
  } else {  // gradcheck (always 64-bit)
    const double tol = 1e-4;
    const auto r = acda::acda_gradcheck(seed);
    std::printf("gradcheck: %lld parameters, max rel error %.3e (worst %s[%lld]: "
                "analytic %.6e vs numeric %.6e)\n",
                static_cast<long long>(r.checked), r.max_rel_error, r.worst_param.c_str(),
                static_cast<long long>(r.worst_index), r.analytic, r.numeric);
    pass = r.max_rel_error <= tol;
    report["max_rel_error"] = r.max_rel_error;
    report["tolerance"] = tol;
    report["parameters_checked"] = r.checked;
  }

  report["pass"] = pass;
  out.write_json("report.json", report);
  out.finish();
  if (!pass) {
    std::cerr << "check failed: " << mode << " exceeded tolerance\n";
    return kExitRuntimeError;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive convolutions with dynamic atoms"};
  app.require_subcommand(1);

  CommonOpts gen_opts;
  std::vector<acda::Index> gen_scales = {3, 5, 7};
  acda::Index gen_m_prime = 6;
  CLI::App* gen = app.add_subcommand("gen-bases", "Build and dump the Fourier-Bessel bases");
  add_common(gen, gen_opts);
  gen->add_option("--scales", gen_scales, "Basis scales (odd, ascending)");
  gen->add_option("--m-prime", gen_m_prime, "Elements per scale");

  CommonOpts toy_opts;
  std::vector<acda::Index> shift = {20, 20};
  std::vector<acda::Index> sweep_m, sweep_scales;
  bool fresh_noise = false;
  CLI::App* toy = app.add_subcommand("toy", "Pattern-detection experiment");
  add_common(toy, toy_opts);
  toy->add_option("--shift", shift, "Translation test shift (di dj)")->expected(2);
  toy->add_option("--sweep-m", sweep_m, "Additional runs sweeping the atom count");
  toy->add_option("--sweep-scales", sweep_scales,
                  "Additional runs sweeping the kernel size (basis scales 3..k)");
  toy->add_flag("--fresh-noise", fresh_noise,
                "Also dump the qualitative shifted-patterns-on-fresh-noise panels");

  CommonOpts cost_opts;
  CLI::App* cost = app.add_subcommand("cost-report", "Analytic FLOPs/params/memory model");
  add_common(cost, cost_opts);

  CommonOpts check_opts;
  std::string check_mode = "equivalence";
  acda::Index check_h = 32, check_w = 32;
  CLI::App* check = app.add_subcommand("check", "Verification sweeps");
  add_common(check, check_opts);
  check->add_option("--mode", check_mode, "Property suite to run")
      ->check(CLI::IsMember({"equivalence", "equivariance", "gradcheck"}));
  check->add_option("--height", check_h, "Equivariance grid height");
  check->add_option("--width", check_w, "Equivariance grid width");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfigError;
  }

  try {
    if (gen->parsed()) return run_gen_bases(gen_opts, gen_scales, gen_m_prime);
    if (toy->parsed()) {
      const acda::ToyConfig cfg =
          parse_toy_config(load_config_json(toy_opts.config_path), toy_opts);
      if (toy_opts.precision == "f64")
        return run_toy_typed<double>(toy_opts, cfg, shift[0], shift[1], fresh_noise,
                                     sweep_m, sweep_scales);
      return run_toy_typed<float>(toy_opts, cfg, shift[0], shift[1], fresh_noise,
                                  sweep_m, sweep_scales);
    }
    if (cost->parsed()) return run_cost(cost_opts);
    if (check->parsed()) {
      const std::uint64_t seed = check_opts.seed.value_or(1);
      if (check_opts.precision == "f64")
        return run_check_typed<double>(check_opts, check_mode, seed, check_h, check_w);
      return run_check_typed<float>(check_opts, check_mode, seed, check_h, check_w);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntimeError;
  }
  return kExitConfigError;
}
