#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "vertiplan/error.hpp"

namespace vertiplan {

// Dense row-major M×N matrix.
template <typename T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, T fill = T{}) : rows_(rows), cols_(cols) {
    if (rows < 0 || cols < 0) throw InputError("matrix dimensions must be non-negative");
    data_.assign(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), fill);
  }
  Matrix(int rows, int cols, std::vector<T> data) : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (rows < 0 || cols < 0 ||
        data_.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols)) {
      throw InputError("matrix data size does not match dimensions");
    }
  }
  // Nested-list literal, mostly for tests: Matrix<int>{{1, 2}, {3, 4}}.
  Matrix(std::initializer_list<std::initializer_list<T>> rows) {
    rows_ = static_cast<int>(rows.size());
    cols_ = rows_ == 0 ? 0 : static_cast<int>(rows.begin()->size());
    data_.reserve(static_cast<std::size_t>(rows_) * static_cast<std::size_t>(cols_));
    for (const auto& row : rows) {
      if (static_cast<int>(row.size()) != cols_) throw InputError("ragged matrix literal");
      data_.insert(data_.end(), row.begin(), row.end());
    }
  }

  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }

  T& operator()(int r, int c) noexcept { return data_[index(r, c)]; }
  const T& operator()(int r, int c) const noexcept { return data_[index(r, c)]; }
  T& operator[](std::size_t flat) noexcept { return data_[flat]; }
  const T& operator[](std::size_t flat) const noexcept { return data_[flat]; }

  std::size_t index(int r, int c) const noexcept {
    return static_cast<std::size_t>(r) * static_cast<std::size_t>(cols_) + static_cast<std::size_t>(c);
  }

  std::span<T> flat() noexcept { return data_; }
  std::span<const T> flat() const noexcept { return data_; }
  const std::vector<T>& data() const noexcept { return data_; }

  bool same_shape(const Matrix& other) const noexcept {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  T sum() const { return std::accumulate(data_.begin(), data_.end(), T{}); }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<T> data_;
};

// Dense T×M×N tensor; slice t is a contiguous row-major M×N block.
template <typename T>
class Tensor3 {
 public:
  Tensor3() = default;
  Tensor3(int depth, int rows, int cols, T fill = T{}) : depth_(depth), rows_(rows), cols_(cols) {
    if (depth < 0 || rows < 0 || cols < 0) throw InputError("tensor dimensions must be non-negative");
    data_.assign(static_cast<std::size_t>(depth) * slice_size(), fill);
  }
  Tensor3(int depth, int rows, int cols, std::vector<T> data)
      : depth_(depth), rows_(rows), cols_(cols), data_(std::move(data)) {
    if (depth < 0 || rows < 0 || cols < 0 ||
        data_.size() != static_cast<std::size_t>(depth) * slice_size()) {
      throw InputError("tensor data size does not match dimensions");
    }
  }

  int depth() const noexcept { return depth_; }
  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }
  std::size_t slice_size() const noexcept {
    return static_cast<std::size_t>(rows_) * static_cast<std::size_t>(cols_);
  }

  T& operator()(int t, int r, int c) noexcept { return data_[index(t, r, c)]; }
  const T& operator()(int t, int r, int c) const noexcept { return data_[index(t, r, c)]; }

  std::size_t index(int t, int r, int c) const noexcept {
    return static_cast<std::size_t>(t) * slice_size() +
           static_cast<std::size_t>(r) * static_cast<std::size_t>(cols_) + static_cast<std::size_t>(c);
  }

  std::span<T> slice(int t) noexcept {
    return std::span<T>(data_).subspan(static_cast<std::size_t>(t) * slice_size(), slice_size());
  }
  std::span<const T> slice(int t) const noexcept {
    return std::span<const T>(data_).subspan(static_cast<std::size_t>(t) * slice_size(), slice_size());
  }

  Matrix<T> slice_matrix(int t) const {
    auto s = slice(t);
    return Matrix<T>(rows_, cols_, std::vector<T>(s.begin(), s.end()));
  }

  void set_slice(int t, const Matrix<T>& m) {
    if (m.rows() != rows_ || m.cols() != cols_) throw InputError("slice shape mismatch");
    std::copy(m.data().begin(), m.data().end(), slice(t).begin());
  }

  std::span<T> flat() noexcept { return data_; }
  std::span<const T> flat() const noexcept { return data_; }
  const std::vector<T>& data() const noexcept { return data_; }

  T sum() const { return std::accumulate(data_.begin(), data_.end(), T{}); }

  friend bool operator==(const Tensor3&, const Tensor3&) = default;

 private:
  int depth_ = 0;
  int rows_ = 0;
  int cols_ = 0;
  std::vector<T> data_;
};

using CountMatrix = Matrix<std::int64_t>;
using RealMatrix = Matrix<double>;
using CountTensor = Tensor3<std::int64_t>;

}  // namespace vertiplan
