#include "acda/serialize.hpp"

#include <bit>
#include <cstring>
#include <stdexcept>

namespace acda {

static_assert(std::endian::native == std::endian::little,
              "tensor container IO assumes a little-endian host");

namespace detail {

void write_le_bytes(std::ostream& out, const void* data, std::size_t n) {
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
}

void read_le_bytes(std::istream& in, void* data, std::size_t n, const std::string& path) {
  in.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n)
    throw std::runtime_error("truncated tensor file: " + path);
}

void write_tensor_header(std::ostream& out, DType dtype, const Shape& shape) {
  out.write(kTensorMagic, 4);
  const std::uint8_t version = kTensorFormatVersion;
  const std::uint8_t code = static_cast<std::uint8_t>(dtype);
  const std::uint8_t rank = static_cast<std::uint8_t>(shape.size());
  out.put(static_cast<char>(version));
  out.put(static_cast<char>(code));
  out.put(static_cast<char>(rank));
  for (Index e : shape) {
    const std::uint64_t v = static_cast<std::uint64_t>(e);
    write_le_bytes(out, &v, sizeof(v));
  }
}

TensorHeader read_tensor_header(std::istream& in, const std::string& path) {
  char magic[4];
  read_le_bytes(in, magic, 4, path);
  if (std::memcmp(magic, kTensorMagic, 4) != 0)
    throw std::runtime_error("not a tensor container: " + path);
  std::uint8_t version = 0, code = 0, rank = 0;
  read_le_bytes(in, &version, 1, path);
  read_le_bytes(in, &code, 1, path);
  read_le_bytes(in, &rank, 1, path);
  if (version != kTensorFormatVersion)
    throw std::runtime_error("unsupported tensor format version in " + path);
  if (code > 1) throw std::runtime_error("unknown dtype code in " + path);
  TensorHeader header;
  header.dtype = static_cast<DType>(code);
  header.shape.resize(rank);
  for (std::uint8_t d = 0; d < rank; ++d) {
    std::uint64_t v = 0;
    read_le_bytes(in, &v, sizeof(v), path);
    header.shape[d] = static_cast<Index>(v);
  }
  return header;
}

}  // namespace detail

DType peek_tensor_dtype(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  return detail::read_tensor_header(in, path).dtype;
}

}  // namespace acda
