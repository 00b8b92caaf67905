#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace acda {

/// Inputs of the analytic FLOPs/parameter/memory model for one layer.
struct CostConfig {
  std::int64_t c_in = 256;   // c'
  std::int64_t c_out = 256;  // c
  std::int64_t h = 100;
  std::int64_t w = 100;
  std::int64_t l = 3;        // filter kernel size
  std::int64_t m = 6;        // atom count
  std::int64_t s = 3;        // basis scale count
  std::int64_t m_prime = 6;  // basis elements per scale
  std::int64_t d = 64;       // generator hidden width
  std::int64_t l_a = 1;      // generator squeeze kernel
  std::int64_t l_b = 3;      // generator output kernel
  std::int64_t big_l = 7;    // padded atom size (largest basis scale)
  std::int64_t bytes_per_scalar = 4;

  void validate() const;
};

/// Itemized FLOPs and parameters; totals are the sums of the items.
/// FLOPs convention: output_elements x (fan_in multiply-adds + 1 if biased),
/// counting one FLOP per multiply-add. Atom convolution is bias-free, the
/// coefficient convolution is biased. Parameter rows exclude biases for the
/// static filter and coefficient entries (matching the reference table); the
/// generator item includes its trainable biases.
struct CostReport {
  std::vector<std::pair<std::string, std::int64_t>> flops_items;
  std::vector<std::pair<std::string, std::int64_t>> params_items;
  std::vector<std::string> flags;

  std::int64_t flops_total() const;
  std::int64_t params_total() const;
};

/// Raw tensor footprint of per-pixel filters (what a direct per-pixel dynamic
/// filter bank must store per position) versus the ACDA atom tensor.
struct FilterMemory {
  std::int64_t naive_filter_bytes = 0;  // h*w*c*c'*l^2 * bytes
  std::int64_t acda_atom_bytes = 0;     // h*w*m*L^2 * bytes
};

CostReport conv_cost(const CostConfig& cfg);
CostReport acda_conv_cost(const CostConfig& cfg);
CostReport acda_full_cost(const CostConfig& cfg);
FilterMemory per_pixel_filter_memory(const CostConfig& cfg);

/// One kernel-size column of the published comparison table (values in
/// millions) used as embedded reference for delta reporting.
struct CostReference {
  std::int64_t l;
  double conv_flops_m;
  double acda_conv_flops_m;
  double acda_full_flops_m;
  double conv_params_m;
  double acda_conv_params_m;
  double acda_full_params_m;
};

const std::vector<CostReference>& cost_reference_table();

/// Plain-text table: model values side by side with the embedded reference
/// and deltas, plus the convention header and any discrepancy flags.
std::string cost_table_text(const CostConfig& base_cfg);

}  // namespace acda
