#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace hgpl {

// Dense row-major matrix of doubles. Deliberately minimal: the graphs this
// project targets are small enough that naive loops beat the overhead of a
// full linear-algebra dependency.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols)
      : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols, 0.0) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool empty() const { return rows_ == 0 || cols_ == 0; }

  double* row(int r) { return data_.data() + static_cast<size_t>(r) * cols_; }
  const double* row(int r) const { return data_.data() + static_cast<size_t>(r) * cols_; }
  std::span<const double> row_span(int r) const { return {row(r), static_cast<size_t>(cols_)}; }

  double& at(int r, int c) { return data_[static_cast<size_t>(r) * cols_ + c]; }
  double at(int r, int c) const { return data_[static_cast<size_t>(r) * cols_ + c]; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  void fill(double value) { data_.assign(data_.size(), value); }

  bool same_shape(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

// c = a * b
Matrix matmul(const Matrix& a, const Matrix& b);
// c = a^T * b
Matrix matmul_at_b(const Matrix& a, const Matrix& b);
// c = a * b^T
Matrix matmul_a_bt(const Matrix& a, const Matrix& b);

void add_inplace(Matrix& acc, const Matrix& delta);
double max_abs_diff(const Matrix& a, const Matrix& b);

// Compressed sparse row. All operators built here are symmetric, so a single
// orientation covers both A*x and A^T*x.
struct CsrMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<int> row_ptr;  // size rows + 1
  std::vector<int> col;
  std::vector<double> val;
};

Matrix spmm(const CsrMatrix& a, const Matrix& x);

}  // namespace hgpl
