// SPDX-License-Identifier: Apache-2.0
#include "lipcap/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lipcap/error.hpp"

namespace lipcap {

namespace {

void require_same_length(std::span<const double> a, std::span<const double> b, const char* op) {
  if (a.size() != b.size()) {
    throw ShapeError(std::string(op) + ": length mismatch (" + std::to_string(a.size()) + " vs " +
                     std::to_string(b.size()) + ")");
  }
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
  if (data_.size() != rows_ * cols_) {
    throw ShapeError("Matrix: " + std::to_string(data_.size()) + " entries for a " +
                     std::to_string(rows_) + "x" + std::to_string(cols_) + " shape");
  }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw ShapeError("Matrix: ragged initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

double inf_norm(const Matrix& m) {
  if (m.data().size() != m.rows() * m.cols()) throw ShapeError("inf_norm: malformed matrix");
  double best = 0.0;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    double s = 0.0;
    for (double v : m.row(r)) s += std::abs(v);
    best = std::max(best, s);
  }
  return best;
}

double max_norm(std::span<const double> v) {
  if (v.empty()) throw ShapeError("max_norm: empty vector");
  double best = 0.0;
  for (double x : v) best = std::max(best, std::abs(x));
  return best;
}

Vector truncate_pad(std::span<const double> v, std::size_t m) {
  if (m == 0) throw ArgumentError("truncate_pad: target length must be positive");
  Vector out(m, 0.0);
  std::copy_n(v.begin(), std::min(m, v.size()), out.begin());
  return out;
}

Vector chain_truncate_pad(std::span<const double> v, std::span<const std::size_t> ms) {
  if (ms.empty()) throw ArgumentError("chain_truncate_pad: empty length sequence");
  Vector cur(v.begin(), v.end());
  for (std::size_t m : ms) cur = truncate_pad(cur, m);
  return cur;
}

Vector matvec(const Matrix& a, std::span<const double> x) {
  if (a.cols() != x.size()) {
    throw ShapeError("matvec: matrix has " + std::to_string(a.cols()) + " columns, vector has " +
                     std::to_string(x.size()) + " entries");
  }
  Vector y(a.rows(), 0.0);
  for (std::size_t r = 0; r < a.rows(); ++r) {
    double s = 0.0;
    auto row = a.row(r);
    for (std::size_t c = 0; c < a.cols(); ++c) s += row[c] * x[c];
    y[r] = s;
  }
  return y;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw ShapeError("matmul: inner dimensions differ");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  }
  return c;
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

Vector sub(std::span<const double> a, std::span<const double> b) {
  require_same_length(a, b, "sub");
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

Vector add(std::span<const double> a, std::span<const double> b) {
  require_same_length(a, b, "add");
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

Vector scale(std::span<const double> a, double s) {
  Vector out(a.begin(), a.end());
  for (double& v : out) v *= s;
  return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
  require_same_length(a, b, "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace lipcap
