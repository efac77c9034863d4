#include "dasa/matrix.hpp"

#include <cmath>
#include <stdexcept>

namespace dasa {

Matrix Matrix::from_rows(std::span<const Vector> rows) {
  if (rows.empty()) {
    return Matrix();
  }
  Matrix m(rows.size(), rows[0].size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    check_dim("Matrix::from_rows row length", rows[r].size(), m.cols_);
    double* dst = m.row(r);
    for (std::size_t c = 0; c < m.cols_; ++c) {
      dst[c] = rows[r][c];
    }
  }
  return m;
}

bool Matrix::all_finite() const {
  for (double x : v_) {
    if (!std::isfinite(x)) {
      return false;
    }
  }
  return true;
}

void check_dim(const std::string& where, std::size_t got, std::size_t want) {
  if (got != want) {
    throw std::invalid_argument(where + ": got dimension " + std::to_string(got) +
                                ", want " + std::to_string(want));
  }
}

Vector matvec(const Matrix& m, const Vector& x) {
  check_dim("matvec input length", x.size(), m.cols());
  Vector y(m.rows(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const double* row = m.row(r);
    double acc = 0.0;
    for (std::size_t c = 0; c < m.cols(); ++c) {
      acc += row[c] * x[c];
    }
    y[r] = acc;
  }
  return y;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  check_dim("matmul_nt inner dimension", b.cols(), a.cols());
  const std::size_t k = a.cols();
  Matrix c(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* ai = a.row(i);
    double* ci = c.row(i);
    for (std::size_t j = 0; j < b.rows(); ++j) {
      const double* bj = b.row(j);
      double acc = 0.0;
      for (std::size_t t = 0; t < k; ++t) {
        acc += ai[t] * bj[t];
      }
      ci[j] = acc;
    }
  }
  return c;
}

Matrix matmul_nn(const Matrix& a, const Matrix& b) {
  check_dim("matmul_nn inner dimension", b.rows(), a.cols());
  const std::size_t n = b.cols();
  Matrix c(a.rows(), n);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* ai = a.row(i);
    double* ci = c.row(i);
    for (std::size_t t = 0; t < a.cols(); ++t) {
      const double s = ai[t];
      const double* bt = b.row(t);
      for (std::size_t j = 0; j < n; ++j) {
        ci[j] += s * bt[j];
      }
    }
  }
  return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  check_dim("matmul_tn outer dimension", b.rows(), a.rows());
  const std::size_t k = b.cols();
  Matrix c(a.cols(), k);
  for (std::size_t n = 0; n < a.rows(); ++n) {
    const double* an = a.row(n);
    const double* bn = b.row(n);
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double s = an[i];
      double* ci = c.row(i);
      for (std::size_t j = 0; j < k; ++j) {
        ci[j] += s * bn[j];
      }
    }
  }
  return c;
}

Vector col_sums(const Matrix& m) {
  Vector s(m.cols(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const double* row = m.row(r);
    for (std::size_t c = 0; c < m.cols(); ++c) {
      s[c] += row[c];
    }
  }
  return s;
}

Vector col_means(const Matrix& m) {
  Vector s = col_sums(m);
  if (m.rows() > 0) {
    for (double& x : s) {
      x /= static_cast<double>(m.rows());
    }
  }
  return s;
}

void add_row_inplace(Matrix& m, const Vector& v) {
  check_dim("add_row_inplace vector length", v.size(), m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    double* row = m.row(r);
    for (std::size_t c = 0; c < m.cols(); ++c) {
      row[c] += v[c];
    }
  }
}

}  // namespace dasa
