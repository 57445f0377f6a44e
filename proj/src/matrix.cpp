#include "nmfsel/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace nmfsel {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::Io: return "Io";
    case Errc::Parse: return "Parse";
    case Errc::RaggedRows: return "RaggedRows";
    case Errc::NotSquare: return "NotSquare";
    case Errc::NotSymmetric: return "NotSymmetric";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::UnsupportedOrder: return "UnsupportedOrder";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::NoFeasibleTau: return "NoFeasibleTau";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::TooFewSamples: return "TooFewSamples";
    case Errc::NonFinite: return "NonFinite";
    case Errc::DimensionTooLarge: return "DimensionTooLarge";
    case Errc::DegenerateKurtosis: return "DegenerateKurtosis";
    case Errc::ZeroColumn: return "ZeroColumn";
    case Errc::NotConverged: return "NotConverged";
    case Errc::EmptySupportWithNonzeroRows: return "EmptySupportWithNonzeroRows";
    case Errc::SingularGram: return "SingularGram";
    case Errc::RankDeficient: return "RankDeficient";
    case Errc::SingularBlock: return "SingularBlock";
    case Errc::InfeasibleGamma: return "InfeasibleGamma";
  }
  return "Unknown";
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> init) {
  rows_ = init.size();
  cols_ = rows_ ? init.begin()->size() : 0;
  data_.reserve(rows_ * cols_);
  for (const auto& r : init) {
    if (r.size() != cols_) throw Error(Errc::RaggedRows, "initializer rows differ in length");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diag(std::span<const double> d) {
  Matrix m(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return m;
}

Matrix Matrix::from_rows(std::size_t rows, std::size_t cols, std::vector<double> data) {
  if (data.size() != rows * cols)
    throw Error(Errc::DimensionMismatch, "data length does not match rows*cols");
  Matrix m;
  m.rows_ = rows;
  m.cols_ = cols;
  m.data_ = std::move(data);
  return m;
}

Vector Matrix::column(std::size_t j) const {
  Vector c(rows_);
  for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
  return c;
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

bool Matrix::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
}

Matrix& Matrix::operator+=(const Matrix& other) {
  if (rows_ != other.rows_ || cols_ != other.cols_)
    throw Error(Errc::DimensionMismatch, "matrix sum");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
  if (rows_ != other.rows_ || cols_ != other.cols_)
    throw Error(Errc::DimensionMismatch, "matrix difference");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= other.data_[k];
  return *this;
}

Matrix& Matrix::operator*=(double s) noexcept {
  for (double& x : data_) x *= s;
  return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(Matrix a, double s) { return a *= s; }
Matrix operator*(double s, Matrix a) { return a *= s; }

namespace {

void check_product(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows())
    throw Error(Errc::DimensionMismatch,
                "product of " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                    " and " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
}

// One output row: c_i = sum_k a_ik b_k, accumulated in increasing k.
inline void product_row(const Matrix& a, const Matrix& b, std::size_t i, std::span<double> out) {
  const std::size_t n = b.cols();
  for (std::size_t k = 0; k < a.cols(); ++k) {
    const double aik = a(i, k);
    if (aik == 0.0) continue;
    const double* brow = b.row(k).data();
    for (std::size_t j = 0; j < n; ++j) out[j] += aik * brow[j];
  }
}

}  // namespace

Matrix operator*(const Matrix& a, const Matrix& b) {
  check_product(a, b);
  Matrix c(a.rows(), b.cols());
  const auto rows = static_cast<std::ptrdiff_t>(a.rows());
#pragma omp parallel for schedule(static) if (a.rows() * a.cols() * b.cols() > 32768)
  for (std::ptrdiff_t i = 0; i < rows; ++i) product_row(a, b, i, c.row(i));
  return c;
}

Matrix matmul_serial(const Matrix& a, const Matrix& b) {
  check_product(a, b);
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) product_row(a, b, i, c.row(i));
  return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw Error(Errc::DimensionMismatch, "transposed product");
  Matrix c(a.cols(), b.cols());
  const auto rows = static_cast<std::ptrdiff_t>(a.cols());
#pragma omp parallel for schedule(static) if (a.rows() * a.cols() * b.cols() > 32768)
  for (std::ptrdiff_t i = 0; i < rows; ++i) {
    auto out = c.row(i);
    for (std::size_t k = 0; k < a.rows(); ++k) {
      const double aki = a(k, i);
      if (aki == 0.0) continue;
      const double* brow = b.row(k).data();
      for (std::size_t j = 0; j < b.cols(); ++j) out[j] += aki * brow[j];
    }
  }
  return c;
}

Vector matvec(const Matrix& a, std::span<const double> x) {
  if (a.cols() != x.size()) throw Error(Errc::DimensionMismatch, "matrix-vector product");
  Vector y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

IndexSet::IndexSet(std::vector<std::size_t> indices) : idx_(std::move(indices)) {
  for (std::size_t k = 1; k < idx_.size(); ++k)
    if (idx_[k] <= idx_[k - 1]) throw Error(Errc::InvalidConfig, "index set not strictly increasing");
}

IndexSet IndexSet::range(std::size_t begin, std::size_t end) {
  std::vector<std::size_t> v;
  for (std::size_t i = begin; i < end; ++i) v.push_back(i);
  return IndexSet(std::move(v));
}

IndexSet IndexSet::from_unsorted(std::vector<std::size_t> indices) {
  std::sort(indices.begin(), indices.end());
  indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
  return IndexSet(std::move(indices));
}

bool IndexSet::contains(std::size_t i) const noexcept {
  return std::binary_search(idx_.begin(), idx_.end(), i);
}

IndexSet IndexSet::complement(std::size_t n) const {
  std::vector<std::size_t> v;
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (k < idx_.size() && idx_[k] == i) {
      ++k;
      continue;
    }
    v.push_back(i);
  }
  return IndexSet(std::move(v));
}

void IndexSet::check_bounds(std::size_t n) const {
  if (!idx_.empty() && idx_.back() >= n)
    throw Error(Errc::InvalidConfig, "index " + std::to_string(idx_.back()) + " out of bounds " +
                                         std::to_string(n));
}

Matrix select_rows(const Matrix& m, const IndexSet& rows) {
  rows.check_bounds(m.rows());
  Matrix out(rows.size(), m.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    auto src = m.row(rows[k]);
    std::copy(src.begin(), src.end(), out.row(k).begin());
  }
  return out;
}

Matrix select_cols(const Matrix& m, const IndexSet& cols) {
  cols.check_bounds(m.cols());
  Matrix out(m.rows(), cols.size());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t k = 0; k < cols.size(); ++k) out(i, k) = m(i, cols[k]);
  return out;
}

}  // namespace nmfsel
