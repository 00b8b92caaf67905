#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace acda {

using Index = std::int64_t;
using Shape = std::vector<Index>;

namespace detail {

inline void check(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

inline Index shape_size(const Shape& shape) {
  Index n = 1;
  for (Index e : shape) {
    if (e < 0) throw std::invalid_argument("negative tensor extent");
    n *= e;
  }
  return n;
}

}  // namespace detail

enum class PaddingMode { kZero, kCircular };

inline const char* to_string(PaddingMode mode) {
  return mode == PaddingMode::kZero ? "zero" : "circular";
}

/// Dense N-dimensional array of scalars, row-major.
template <typename T>
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape)
      : shape_(std::move(shape)), data_(detail::shape_size(shape_), T(0)) {}
  Tensor(Shape shape, std::vector<T> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    detail::check(detail::shape_size(shape_) == static_cast<Index>(data_.size()),
                  "tensor data length does not match shape");
  }

  static Tensor full(Shape shape, T value) {
    Tensor t(std::move(shape));
    for (T& v : t.data_) v = value;
    return t;
  }

  Index rank() const { return static_cast<Index>(shape_.size()); }
  const Shape& shape() const { return shape_; }
  Index extent(Index dim) const { return shape_.at(static_cast<size_t>(dim)); }
  Index size() const { return static_cast<Index>(data_.size()); }
  bool empty() const { return data_.empty(); }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::vector<T>& storage() { return data_; }
  const std::vector<T>& storage() const { return data_; }

  T& operator[](Index flat) { return data_[static_cast<size_t>(flat)]; }
  const T& operator[](Index flat) const { return data_[static_cast<size_t>(flat)]; }

  // Checked multi-index access; out-of-range indexing throws.
  template <typename... Ix>
  T& at(Ix... ix) {
    return data_[checked_offset({static_cast<Index>(ix)...})];
  }
  template <typename... Ix>
  const T& at(Ix... ix) const {
    return data_[checked_offset({static_cast<Index>(ix)...})];
  }

  Index offset(std::initializer_list<Index> ix) const {
    Index off = 0;
    auto it = ix.begin();
    for (size_t d = 0; d < shape_.size(); ++d, ++it) off = off * shape_[d] + *it;
    return off;
  }

  Tensor reshaped(Shape shape) const {
    detail::check(detail::shape_size(shape) == size(), "reshape changes element count");
    Tensor t;
    t.shape_ = std::move(shape);
    t.data_ = data_;
    return t;
  }

  void fill(T value) { std::fill(data_.begin(), data_.end(), value); }

  template <typename U>
  Tensor<U> cast() const {
    Tensor<U> t(shape_);
    for (Index i = 0; i < size(); ++i) t[i] = static_cast<U>(data_[i]);
    return t;
  }

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  size_t checked_offset(std::initializer_list<Index> ix) const {
    if (ix.size() != shape_.size())
      throw std::out_of_range("tensor index rank mismatch");
    Index off = 0;
    auto it = ix.begin();
    for (size_t d = 0; d < shape_.size(); ++d, ++it) {
      if (*it < 0 || *it >= shape_[d]) throw std::out_of_range("tensor index out of range");
      off = off * shape_[d] + *it;
    }
    return static_cast<size_t>(off);
  }

  Shape shape_;
  std::vector<T> data_;
};

/// Circularly shifts the two trailing spatial dims of a [c,h,w] tensor by (di,dj).
/// Output[c, (i+di) mod h, (j+dj) mod w] = input[c, i, j].
template <typename T>
Tensor<T> circular_shift(const Tensor<T>& in, Index di, Index dj) {
  detail::check(in.rank() == 3, "circular_shift expects a rank-3 tensor");
  const Index c = in.extent(0), h = in.extent(1), w = in.extent(2);
  Tensor<T> out(in.shape());
  const auto mod = [](Index a, Index m) { return ((a % m) + m) % m; };
  for (Index k = 0; k < c; ++k)
    for (Index i = 0; i < h; ++i) {
      const Index ii = mod(i + di, h);
      for (Index j = 0; j < w; ++j) out[(k * h + ii) * w + mod(j + dj, w)] = in[(k * h + i) * w + j];
    }
  return out;
}

template <typename T>
T max_abs_diff(const Tensor<T>& a, const Tensor<T>& b) {
  detail::check(a.same_shape(b), "max_abs_diff shape mismatch");
  T m = 0;
  for (Index i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

/// max_i |a_i - b_i| / (|b_i| + eps); the denominator guard keeps zero entries comparable.
template <typename T>
T max_rel_diff(const Tensor<T>& a, const Tensor<T>& b, T eps = T(1e-8)) {
  detail::check(a.same_shape(b), "max_rel_diff shape mismatch");
  T m = 0;
  for (Index i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a[i] - b[i]) / (std::abs(b[i]) + eps));
  return m;
}

template <typename T>
std::ostream& operator<<(std::ostream& os, const Tensor<T>& t) {
  os << "Tensor[";
  for (Index d = 0; d < t.rank(); ++d) os << (d ? "x" : "") << t.extent(d);
  return os << "]";
}

}  // namespace acda
