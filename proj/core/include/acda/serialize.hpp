#pragma once

#include <cstdint>
#include <fstream>
#include <string>

#include "acda/tensor.hpp"

namespace acda {

// Binary tensor container:
//   magic "ACDA" | version u8 (=1) | dtype u8 (0=f32, 1=f64) | rank u8 |
//   extents u64 LE per dim | raw scalars LE.

inline constexpr char kTensorMagic[4] = {'A', 'C', 'D', 'A'};
inline constexpr std::uint8_t kTensorFormatVersion = 1;

enum class DType : std::uint8_t { kF32 = 0, kF64 = 1 };

template <typename T>
constexpr DType dtype_of();
template <>
constexpr DType dtype_of<float>() { return DType::kF32; }
template <>
constexpr DType dtype_of<double>() { return DType::kF64; }

namespace detail {

void write_tensor_header(std::ostream& out, DType dtype, const Shape& shape);

struct TensorHeader {
  DType dtype;
  Shape shape;
};

TensorHeader read_tensor_header(std::istream& in, const std::string& path);

void write_le_bytes(std::ostream& out, const void* data, std::size_t n);
void read_le_bytes(std::istream& in, void* data, std::size_t n, const std::string& path);

}  // namespace detail

template <typename T>
void save_tensor(const std::string& path, const Tensor<T>& t) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  detail::write_tensor_header(out, dtype_of<T>(), t.shape());
  detail::write_le_bytes(out, t.data(), sizeof(T) * static_cast<std::size_t>(t.size()));
  if (!out) throw std::runtime_error("write failed: " + path);
}

/// Dtype of a tensor file without loading the payload.
DType peek_tensor_dtype(const std::string& path);

template <typename T>
Tensor<T> load_tensor(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  const auto header = detail::read_tensor_header(in, path);
  if (header.dtype != dtype_of<T>())
    throw std::runtime_error("tensor dtype mismatch in " + path);
  Tensor<T> t(header.shape);
  detail::read_le_bytes(in, t.data(), sizeof(T) * static_cast<std::size_t>(t.size()), path);
  return t;
}

/// Loads a tensor of either dtype, converting to T if needed.
template <typename T>
Tensor<T> load_tensor_as(const std::string& path) {
  if (peek_tensor_dtype(path) == dtype_of<T>()) return load_tensor<T>(path);
  if (peek_tensor_dtype(path) == DType::kF32) return load_tensor<float>(path).template cast<T>();
  return load_tensor<double>(path).template cast<T>();
}

}  // namespace acda
