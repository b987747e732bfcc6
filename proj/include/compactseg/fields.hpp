#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "compactseg/errors.hpp"

namespace compactseg {

/// Width and height of a 2-D grid, in pixels.
struct Shape {
  int width = 0;
  int height = 0;

  [[nodiscard]] std::size_t size() const {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }
  friend bool operator==(const Shape&, const Shape&) = default;
};

inline std::string to_string(const Shape& s) {
  return std::to_string(s.width) + "x" + std::to_string(s.height);
}

/// Dense row-major 2-D grid. Pixel (x, y) lives at index y * width + x.
template <typename T>
class Grid {
 public:
  using value_type = T;

  Grid() = default;

  Grid(int width, int height, T fill = T{}) : shape_{width, height} {
    if (width < 1 || height < 1) {
      throw DimensionMismatch("grid dimensions must be >= 1, got " + to_string(shape_));
    }
    data_.assign(shape_.size(), fill);
  }

  explicit Grid(Shape shape, T fill = T{}) : Grid(shape.width, shape.height, fill) {}

  Grid(int width, int height, std::vector<T> data) : Grid(width, height) {
    if (data.size() != shape_.size()) {
      throw DimensionMismatch("data length " + std::to_string(data.size()) +
                              " does not match " + to_string(shape_));
    }
    data_ = std::move(data);
  }

  [[nodiscard]] int width() const { return shape_.width; }
  [[nodiscard]] int height() const { return shape_.height; }
  [[nodiscard]] Shape shape() const { return shape_; }
  [[nodiscard]] std::size_t size() const { return data_.size(); }
  [[nodiscard]] bool empty() const { return data_.empty(); }

  T& operator()(int x, int y) { return data_[index(x, y)]; }
  const T& operator()(int x, int y) const { return data_[index(x, y)]; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  [[nodiscard]] bool contains(int x, int y) const {
    return x >= 0 && y >= 0 && x < shape_.width && y < shape_.height;
  }

  [[nodiscard]] std::span<T> values() { return data_; }
  [[nodiscard]] std::span<const T> values() const { return data_; }

  auto begin() { return data_.begin(); }
  auto end() { return data_.end(); }
  auto begin() const { return data_.begin(); }
  auto end() const { return data_.end(); }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  [[nodiscard]] std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(shape_.width) +
           static_cast<std::size_t>(x);
  }

  Shape shape_{};
  std::vector<T> data_;
};

/// Real-valued image, region force, label or logit field.
using ScalarField = Grid<double>;

/// {0,1}-valued segmentation.
using BinaryMask = Grid<std::uint8_t>;

/// A ScalarField whose values all lie in [0,1]. Kept as an alias; use
/// is_label_field() at API boundaries that require the invariant.
using LabelField = ScalarField;

template <typename A, typename B>
void require_same_shape(const Grid<A>& a, const Grid<B>& b, const char* where) {
  if (a.shape() != b.shape()) {
    throw DimensionMismatch(std::string(where) + ": " + to_string(a.shape()) + " vs " +
                            to_string(b.shape()));
  }
}

/// Pairwise (tree) summation. Order depends only on the length, so results
/// are reproducible bit for bit.
template <typename F>
double pairwise_sum(std::size_t begin, std::size_t end, F&& term) {
  constexpr std::size_t kLeaf = 64;
  if (end - begin <= kLeaf) {
    double s = 0.0;
    for (std::size_t i = begin; i < end; ++i) s += term(i);
    return s;
  }
  const std::size_t mid = begin + (end - begin) / 2;
  return pairwise_sum(begin, mid, term) + pairwise_sum(mid, end, term);
}

/// Sum over pixels of a(x) b(x), unit pixel area.
inline double inner_product(const ScalarField& a, const ScalarField& b) {
  require_same_shape(a, b, "inner_product");
  return pairwise_sum(0, a.size(), [&](std::size_t i) { return a[i] * b[i]; });
}

inline double sum(const ScalarField& a) {
  return pairwise_sum(0, a.size(), [&](std::size_t i) { return a[i]; });
}

inline std::size_t count(const BinaryMask& m) {
  return static_cast<std::size_t>(std::count(m.begin(), m.end(), std::uint8_t{1}));
}

/// 1 where u > t (strict).
inline BinaryMask threshold(const ScalarField& u, double t) {
  BinaryMask out(u.shape());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = u[i] > t ? 1 : 0;
  return out;
}

inline ScalarField to_field(const BinaryMask& m) {
  ScalarField out(m.shape());
  for (std::size_t i = 0; i < m.size(); ++i) out[i] = m[i] ? 1.0 : 0.0;
  return out;
}

inline bool is_binary(const BinaryMask& m) {
  return std::all_of(m.begin(), m.end(), [](std::uint8_t v) { return v <= 1; });
}

inline bool is_finite(const ScalarField& a) {
  return std::all_of(a.begin(), a.end(), [](double v) { return std::isfinite(v); });
}

inline bool is_label_field(const ScalarField& u) {
  return std::all_of(u.begin(), u.end(), [](double v) { return v >= 0.0 && v <= 1.0; });
}

inline double max_abs_diff(const ScalarField& a, const ScalarField& b) {
  require_same_shape(a, b, "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

/// Elementwise map into a new field of the same shape.
template <typename F>
ScalarField map(const ScalarField& a, F&& f) {
  ScalarField out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = f(a[i]);
  return out;
}

}  // namespace compactseg
