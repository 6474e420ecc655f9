#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mbp {

/// Thrown when operand shapes are incompatible. The message carries both shapes.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when an elementwise function produces NaN or Inf.
class NonFiniteError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  std::string shape() const;
  bool all_finite() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// c = a * b. Each c(i,j) is accumulated over k in ascending order.
Matrix matmul(const Matrix& a, const Matrix& b);

/// c = a^T * b without forming a^T; same per-cell summation order as
/// matmul(transpose(a), b).
Matrix transpose_matmul(const Matrix& a, const Matrix& b);

/// c = a * b^T, using only the first `b_rows` rows of b (all rows when 0).
/// Used to push deltas through a weight matrix whose last row is the bias.
Matrix matmul_transpose(const Matrix& a, const Matrix& b, std::size_t b_rows = 0);

Matrix transpose(const Matrix& a);

/// target(i,j) += scale * x[i] * d[j]
void outer_accumulate(Matrix& target, std::span<const double> x, std::span<const double> d,
                      double scale);

/// Applies f to every entry. Throws NonFiniteError if f yields NaN/Inf.
Matrix elementwise_map(const Matrix& a, const std::function<double(double)>& f);

/// [a | 1]: appends a column of ones (the bias input).
Matrix append_ones_column(const Matrix& a);

}  // namespace mbp
