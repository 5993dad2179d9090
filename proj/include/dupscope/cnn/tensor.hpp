#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "dupscope/error.hpp"

namespace dupscope::cnn {

/// Dense row-major tensor.
template <typename T>
struct BasicTensor {
  std::vector<std::size_t> shape;
  std::vector<T> data;

  BasicTensor() = default;
  explicit BasicTensor(std::vector<std::size_t> dims, T fill = T(0)) : shape(std::move(dims)) {
    data.assign(element_count(shape), fill);
  }

  static std::size_t element_count(const std::vector<std::size_t>& dims) {
    return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
  }

  std::size_t size() const noexcept { return data.size(); }
  std::size_t dim(std::size_t i) const { return shape.at(i); }
  std::size_t rank() const noexcept { return shape.size(); }

  bool all_finite() const {
    for (T v : data)
      if (!std::isfinite(static_cast<double>(v))) return false;
    return true;
  }

  void check() const {
    require(data.size() == element_count(shape), Errc::ShapeMismatch, "tensor data length does not match its shape");
  }

  template <typename U>
  BasicTensor<U> cast() const {
    BasicTensor<U> out;
    out.shape = shape;
    out.data.assign(data.begin(), data.end());
    return out;
  }
};

using Tensor = BasicTensor<float>;

inline std::string shape_string(const std::vector<std::size_t>& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) s += (i ? "," : "") + std::to_string(shape[i]);
  return s + "]";
}

/// Stacks equally shaped [c,h,w] tensors into one [n,c,h,w] batch.
template <typename T>
BasicTensor<T> stack(const std::vector<const BasicTensor<T>*>& items) {
  require(!items.empty(), Errc::EmptyDataset, "cannot stack an empty list");
  const auto& first = items.front()->shape;
  std::vector<std::size_t> dims{items.size()};
  dims.insert(dims.end(), first.begin(), first.end());
  BasicTensor<T> out;
  out.shape = dims;
  out.data.reserve(BasicTensor<T>::element_count(dims));
  for (const auto* t : items) {
    require(t->shape == first, Errc::ShapeMismatch, "stacked tensors differ in shape");
    out.data.insert(out.data.end(), t->data.begin(), t->data.end());
  }
  return out;
}

}  // namespace dupscope::cnn
