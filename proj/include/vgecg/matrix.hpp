#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace vgecg {

// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::vector<double>& values() { return data_; }
  const std::vector<double>& values() const { return data_; }

  void fill(double v);

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// A * B
Matrix matmul(const Matrix& a, const Matrix& b);
// A^T * B
Matrix matmul_tn(const Matrix& a, const Matrix& b);
// A * B^T
Matrix matmul_nt(const Matrix& a, const Matrix& b);

// Adds bias to every row.
void add_row_vector(Matrix& m, std::span<const double> bias);
// Column sums.
std::vector<double> column_sums(const Matrix& m);

}  // namespace vgecg
