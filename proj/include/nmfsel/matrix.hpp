#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "nmfsel/error.hpp"

namespace nmfsel {

using Vector = std::vector<double>;

/// Dense row-major matrix of doubles.
///
/// Zero-sized dimensions are admitted so that empty blocks (for instance the
/// off-support rows when the support is everything) can be represented; all
/// public entry points that consume user data reject them.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::initializer_list<std::initializer_list<double>> init);

  static Matrix identity(std::size_t n);
  static Matrix diag(std::span<const double> d);
  static Matrix from_rows(std::size_t rows, std::size_t cols, std::vector<double> data);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return rows_ == 0 || cols_ == 0; }

  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const noexcept {
    return {data_.data() + i * cols_, cols_};
  }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  Vector column(std::size_t j) const;

  Matrix transpose() const;
  bool all_finite() const noexcept;

  Matrix& operator+=(const Matrix& other);
  Matrix& operator-=(const Matrix& other);
  Matrix& operator*=(double s) noexcept;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(Matrix a, double s);
Matrix operator*(double s, Matrix a);

/// Dense product; parallel over output rows, bit-identical to matmul_serial.
Matrix operator*(const Matrix& a, const Matrix& b);
Matrix matmul_serial(const Matrix& a, const Matrix& b);
/// aᵀ·b without forming the transpose.
Matrix matmul_tn(const Matrix& a, const Matrix& b);
Vector matvec(const Matrix& a, std::span<const double> x);

/// Sorted distinct indices addressing rows or columns of a matrix.
class IndexSet {
 public:
  IndexSet() = default;
  /// Throws InvalidConfig unless `indices` is strictly increasing.
  explicit IndexSet(std::vector<std::size_t> indices);

  static IndexSet range(std::size_t begin, std::size_t end);
  /// Sorts and de-duplicates.
  static IndexSet from_unsorted(std::vector<std::size_t> indices);

  std::size_t size() const noexcept { return idx_.size(); }
  bool empty() const noexcept { return idx_.empty(); }
  std::size_t operator[](std::size_t k) const noexcept { return idx_[k]; }
  auto begin() const noexcept { return idx_.begin(); }
  auto end() const noexcept { return idx_.end(); }
  const std::vector<std::size_t>& indices() const noexcept { return idx_; }

  bool contains(std::size_t i) const noexcept;
  /// Indices of [0, n) not in this set.
  IndexSet complement(std::size_t n) const;
  /// Throws InvalidConfig if any index is >= n.
  void check_bounds(std::size_t n) const;

  friend bool operator==(const IndexSet&, const IndexSet&) = default;

 private:
  std::vector<std::size_t> idx_;
};

Matrix select_rows(const Matrix& m, const IndexSet& rows);
Matrix select_cols(const Matrix& m, const IndexSet& cols);

}  // namespace nmfsel
