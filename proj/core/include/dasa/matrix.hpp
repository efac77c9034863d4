#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace dasa {

using Vector = std::vector<double>;

// Dense row-major matrix of doubles. Shape mismatches throw
// std::invalid_argument naming both offending dimensions.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), v_(rows * cols, fill) {}

  static Matrix from_rows(std::span<const Vector> rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return v_.size(); }

  double& operator()(std::size_t r, std::size_t c) { return v_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return v_[r * cols_ + c]; }

  double* row(std::size_t r) { return v_.data() + r * cols_; }
  const double* row(std::size_t r) const { return v_.data() + r * cols_; }

  Vector row_vector(std::size_t r) const {
    return Vector(row(r), row(r) + cols_);
  }

  std::vector<double>& values() { return v_; }
  const std::vector<double>& values() const { return v_; }

  bool all_finite() const;

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> v_;
};

// Throws std::invalid_argument with a message naming where, got and want.
void check_dim(const std::string& where, std::size_t got, std::size_t want);

// y = m * x; x.size() must equal m.cols()
Vector matvec(const Matrix& m, const Vector& x);

// C = A * B^T with A (m x k), B (n x k) -> (m x n)
Matrix matmul_nt(const Matrix& a, const Matrix& b);

// C = A * B with A (m x k), B (k x n) -> (m x n)
Matrix matmul_nn(const Matrix& a, const Matrix& b);

// C = A^T * B with A (n x m), B (n x k) -> (m x k)
Matrix matmul_tn(const Matrix& a, const Matrix& b);

Vector col_sums(const Matrix& m);
Vector col_means(const Matrix& m);

// adds v to every row in place; v.size() must equal m.cols()
void add_row_inplace(Matrix& m, const Vector& v);

}  // namespace dasa
