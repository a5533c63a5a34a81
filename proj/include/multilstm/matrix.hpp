#pragma once

#include <span>
#include <string>
#include <vector>

namespace multilstm {

using Vec = std::vector<double>;

// Dense row-major matrix of doubles: the one numeric carrier for features,
// weights, activations, labels and predictions. 64-bit throughout; feature
// files are 32-bit on disk and widened on load.
struct Matrix {
  int rows = 0;
  int cols = 0;
  Vec data;  // rows * cols entries, row-major

  Matrix() = default;
  Matrix(int r, int c, double fill = 0.0);

  double& operator()(int r, int c) {
    return data[static_cast<std::size_t>(r) * cols + c];
  }
  double operator()(int r, int c) const {
    return data[static_cast<std::size_t>(r) * cols + c];
  }

  std::span<double> row(int r);
  std::span<const double> row(int r) const;
  Vec row_vec(int r) const;
  void set_row(int r, std::span<const double> values);

  bool same_shape(const Matrix& o) const {
    return rows == o.rows && cols == o.cols;
  }
  bool empty() const { return rows == 0 || cols == 0; }
  std::string shape_str() const;
};

// Standard product, a (m x k) * b (k x n). Throws ShapeError naming both
// shapes on an inner-dimension mismatch.
Matrix matmul(const Matrix& a, const Matrix& b);

// w (m x n) * x (n) -> m.
Vec matvec(const Matrix& w, const Vec& x);

// w^T * y with w (m x n), y (m) -> n.
Vec tmatvec(const Matrix& w, const Vec& y);

// acc += a * b^T, acc shaped (|a| x |b|).
void add_outer(Matrix& acc, const Vec& a, const Vec& b);

double sigmoid(double x);
double dot(std::span<const double> a, std::span<const double> b);

// Elementwise nonlinearities. Saturate, never overflow.
Matrix sigmoid(const Matrix& m);
Matrix tanh_elem(const Matrix& m);

// Max-shifted softmax. Empty input -> ArgumentError. Output is nonnegative,
// sums to 1 and is invariant to adding a constant to all logits.
Vec softmax(const Vec& logits);

// Throws NumericError naming `what` if any entry is NaN or infinite.
void check_finite(std::span<const double> v, const std::string& what);
void check_finite(const Matrix& m, const std::string& what);

}  // namespace multilstm
