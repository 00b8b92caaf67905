#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "acda/layer.hpp"
#include "acda/serialize.hpp"

namespace acda {

// Layer checkpoint: one tensor container per parameter plus a sidecar naming
// each tensor's role and the hyperparameters. Bases are rebuilt from
// (scales, m') on load; construction is deterministic.

template <typename T>
void save_layer(const std::filesystem::path& dir, const AcdaLayer<T>& layer) {
  std::filesystem::create_directories(dir);
  nlohmann::json sidecar;
  sidecar["format"] = "acda-layer";
  sidecar["version"] = 1;
  sidecar["kind"] = "acda";
  sidecar["hyperparameters"] = {
      {"in_channels", layer.in_channels},
      {"out_channels", layer.out_channels},
      {"atom_count", layer.atom_count},
      {"scales", layer.bases.scales},
      {"basis_elements", layer.bases.elements_per_scale},
      {"hidden_width", layer.gen.hidden_width},
      {"padding", to_string(layer.mode)},
  };
  const std::pair<std::string, const Tensor<T>*> tensors[] = {
      {"coeff", &layer.coeff},   {"bias", &layer.bias},
      {"gen.w1", &layer.gen.w1}, {"gen.b1", &layer.gen.b1},
      {"gen.w2", &layer.gen.w2}, {"gen.b2", &layer.gen.b2},
  };
  nlohmann::json roles;
  for (const auto& [role, tensor] : tensors) {
    const std::string filename = role + ".tensor";
    save_tensor((dir / filename).string(), *tensor);
    roles[role] = filename;
  }
  sidecar["tensors"] = roles;
  std::ofstream out(dir / "layer.json");
  if (!out) throw std::runtime_error("cannot write sidecar in " + dir.string());
  out << sidecar.dump(2) << "\n";
}

template <typename T>
void save_layer(const std::filesystem::path& dir, const ConvLayer<T>& layer) {
  std::filesystem::create_directories(dir);
  nlohmann::json sidecar;
  sidecar["format"] = "acda-layer";
  sidecar["version"] = 1;
  sidecar["kind"] = "conv";
  sidecar["hyperparameters"] = {
      {"in_channels", layer.filter.extent(1)},
      {"out_channels", layer.filter.extent(0)},
      {"kernel_size", layer.filter.extent(2)},
      {"padding", to_string(layer.mode)},
  };
  save_tensor((dir / "filter.tensor").string(), layer.filter);
  save_tensor((dir / "bias.tensor").string(), layer.bias);
  sidecar["tensors"] = {{"filter", "filter.tensor"}, {"bias", "bias.tensor"}};
  std::ofstream out(dir / "layer.json");
  if (!out) throw std::runtime_error("cannot write sidecar in " + dir.string());
  out << sidecar.dump(2) << "\n";
}

namespace detail {

inline nlohmann::json load_sidecar(const std::filesystem::path& dir,
                                   const std::string& expected_kind) {
  std::ifstream in(dir / "layer.json");
  if (!in) throw std::runtime_error("missing layer sidecar in " + dir.string());
  nlohmann::json sidecar = nlohmann::json::parse(in);
  if (sidecar.value("format", "") != "acda-layer")
    throw std::runtime_error("not a layer checkpoint: " + dir.string());
  if (sidecar.value("kind", "") != expected_kind)
    throw std::runtime_error("layer kind mismatch in " + dir.string());
  return sidecar;
}

inline PaddingMode padding_from(const std::string& name) {
  if (name == "zero") return PaddingMode::kZero;
  if (name == "circular") return PaddingMode::kCircular;
  throw std::runtime_error("unknown padding mode: " + name);
}

}  // namespace detail

template <typename T>
AcdaLayer<T> load_acda_layer(const std::filesystem::path& dir) {
  const nlohmann::json sidecar = detail::load_sidecar(dir, "acda");
  const auto& hp = sidecar.at("hyperparameters");
  AcdaLayer<T> layer;
  layer.in_channels = hp.at("in_channels").get<Index>();
  layer.out_channels = hp.at("out_channels").get<Index>();
  layer.atom_count = hp.at("atom_count").get<Index>();
  layer.mode = detail::padding_from(hp.at("padding").get<std::string>());
  layer.bases = build_multiscale(hp.at("scales").get<std::vector<Index>>(),
                                 hp.at("basis_elements").get<Index>());
  layer.bases_cast = layer.bases.template cast<T>();
  layer.gen.hidden_width = hp.at("hidden_width").get<Index>();
  const auto& roles = sidecar.at("tensors");
  const auto load = [&](const char* role) {
    return load_tensor<T>((dir / roles.at(role).get<std::string>()).string());
  };
  layer.coeff = load("coeff");
  layer.bias = load("bias");
  layer.gen.w1 = load("gen.w1");
  layer.gen.b1 = load("gen.b1");
  layer.gen.w2 = load("gen.w2");
  layer.gen.b2 = load("gen.b2");
  detail::check(layer.gen.w2.extent(0) == layer.atom_count * layer.bases.count(),
                "checkpoint generator width does not match basis set");
  detail::check(layer.coeff.extent(1) == layer.in_channels * layer.atom_count,
                "checkpoint coefficient extent does not match hyperparameters");
  return layer;
}

template <typename T>
ConvLayer<T> load_conv_layer(const std::filesystem::path& dir) {
  const nlohmann::json sidecar = detail::load_sidecar(dir, "conv");
  const auto& roles = sidecar.at("tensors");
  ConvLayer<T> layer;
  layer.mode = detail::padding_from(
      sidecar.at("hyperparameters").at("padding").get<std::string>());
  layer.filter = load_tensor<T>((dir / roles.at("filter").get<std::string>()).string());
  layer.bias = load_tensor<T>((dir / roles.at("bias").get<std::string>()).string());
  return layer;
}

}  // namespace acda
