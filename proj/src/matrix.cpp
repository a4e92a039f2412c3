#include "hgpl/matrix.hpp"

#include <cassert>
#include <cmath>

namespace hgpl {

Matrix matmul(const Matrix& a, const Matrix& b) {
  assert(a.cols() == b.rows());
  Matrix c(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    const double* arow = a.row(i);
    double* crow = c.row(i);
    for (int k = 0; k < a.cols(); ++k) {
      const double aik = arow[k];
      if (aik == 0.0) continue;
      const double* brow = b.row(k);
      for (int j = 0; j < b.cols(); ++j) crow[j] += aik * brow[j];
    }
  }
  return c;
}

Matrix matmul_at_b(const Matrix& a, const Matrix& b) {
  assert(a.rows() == b.rows());
  Matrix c(a.cols(), b.cols());
  for (int k = 0; k < a.rows(); ++k) {
    const double* arow = a.row(k);
    const double* brow = b.row(k);
    for (int i = 0; i < a.cols(); ++i) {
      const double aki = arow[i];
      if (aki == 0.0) continue;
      double* crow = c.row(i);
      for (int j = 0; j < b.cols(); ++j) crow[j] += aki * brow[j];
    }
  }
  return c;
}

Matrix matmul_a_bt(const Matrix& a, const Matrix& b) {
  assert(a.cols() == b.cols());
  Matrix c(a.rows(), b.rows());
  for (int i = 0; i < a.rows(); ++i) {
    const double* arow = a.row(i);
    double* crow = c.row(i);
    for (int j = 0; j < b.rows(); ++j) {
      const double* brow = b.row(j);
      double sum = 0.0;
      for (int k = 0; k < a.cols(); ++k) sum += arow[k] * brow[k];
      crow[j] = sum;
    }
  }
  return c;
}

void add_inplace(Matrix& acc, const Matrix& delta) {
  assert(acc.same_shape(delta));
  auto& a = acc.data();
  const auto& d = delta.data();
  for (size_t i = 0; i < a.size(); ++i) a[i] += d[i];
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  assert(a.same_shape(b));
  double worst = 0.0;
  for (size_t i = 0; i < a.data().size(); ++i) {
    worst = std::max(worst, std::fabs(a.data()[i] - b.data()[i]));
  }
  return worst;
}

Matrix spmm(const CsrMatrix& a, const Matrix& x) {
  assert(a.cols == x.rows());
  Matrix y(a.rows, x.cols());
  for (int i = 0; i < a.rows; ++i) {
    double* yrow = y.row(i);
    for (int p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p) {
      const double w = a.val[p];
      const double* xrow = x.row(a.col[p]);
      for (int j = 0; j < x.cols(); ++j) yrow[j] += w * xrow[j];
    }
  }
  return y;
}

}  // namespace hgpl
