// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace lipcap {

using Vector = std::vector<double>;

/// Dense row-major matrix of doubles with a fixed shape.
class Matrix {
public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  /// Takes ownership of `entries`; throws ShapeError unless
  /// entries.size() == rows * cols.
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0 || cols_ == 0; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  bool operator==(const Matrix&) const = default;

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Induced infinity norm: maximum absolute row sum.
double inf_norm(const Matrix& m);

/// Max norm of a vector; throws ShapeError on empty input.
double max_norm(std::span<const double> v);

/// Keeps the first m entries, or zero-pads up to length m.
Vector truncate_pad(std::span<const double> v, std::size_t m);

/// Left-to-right fold of truncate_pad over `ms`.
Vector chain_truncate_pad(std::span<const double> v, std::span<const std::size_t> ms);

Vector matvec(const Matrix& a, std::span<const double> x);
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);

Vector sub(std::span<const double> a, std::span<const double> b);
Vector add(std::span<const double> a, std::span<const double> b);
Vector scale(std::span<const double> a, double s);
double dot(std::span<const double> a, std::span<const double> b);

/// True when every entry is finite.
bool all_finite(std::span<const double> v);

}  // namespace lipcap
