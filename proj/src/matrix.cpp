#include "multilstm/matrix.hpp"

#include <cmath>

#include "multilstm/error.hpp"

namespace multilstm {

Matrix::Matrix(int r, int c, double fill)
    : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, fill) {
  if (r < 0 || c < 0) throw ArgumentError("Matrix: negative dimension");
}

std::span<double> Matrix::row(int r) {
  return {data.data() + static_cast<std::size_t>(r) * cols,
          static_cast<std::size_t>(cols)};
}

std::span<const double> Matrix::row(int r) const {
  return {data.data() + static_cast<std::size_t>(r) * cols,
          static_cast<std::size_t>(cols)};
}

Vec Matrix::row_vec(int r) const {
  auto s = row(r);
  return Vec(s.begin(), s.end());
}

void Matrix::set_row(int r, std::span<const double> values) {
  if (static_cast<int>(values.size()) != cols)
    throw ShapeError("set_row: " + std::to_string(values.size()) +
                     " values into " + shape_str() + " row");
  auto s = row(r);
  for (int j = 0; j < cols; ++j) s[j] = values[j];
}

std::string Matrix::shape_str() const {
  return std::to_string(rows) + "x" + std::to_string(cols);
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols != b.rows)
    throw ShapeError("matmul: " + a.shape_str() + " * " + b.shape_str() +
                     " (inner dimensions differ)");
  Matrix out(a.rows, b.cols, 0.0);
  for (int i = 0; i < a.rows; ++i) {
    const double* arow = a.data.data() + static_cast<std::size_t>(i) * a.cols;
    double* orow = out.data.data() + static_cast<std::size_t>(i) * b.cols;
    for (int k = 0; k < a.cols; ++k) {
      const double aik = arow[k];
      if (aik == 0.0) continue;
      const double* brow = b.data.data() + static_cast<std::size_t>(k) * b.cols;
      for (int j = 0; j < b.cols; ++j) orow[j] += aik * brow[j];
    }
  }
  return out;
}

Vec matvec(const Matrix& w, const Vec& x) {
  if (w.cols != static_cast<int>(x.size()))
    throw ShapeError("matvec: " + w.shape_str() + " * vector of length " +
                     std::to_string(x.size()));
  Vec out(w.rows, 0.0);
  for (int i = 0; i < w.rows; ++i) {
    const double* row = w.data.data() + static_cast<std::size_t>(i) * w.cols;
    double acc = 0.0;
    for (int j = 0; j < w.cols; ++j) acc += row[j] * x[j];
    out[i] = acc;
  }
  return out;
}

Vec tmatvec(const Matrix& w, const Vec& y) {
  if (w.rows != static_cast<int>(y.size()))
    throw ShapeError("tmatvec: " + w.shape_str() + "^T * vector of length " +
                     std::to_string(y.size()));
  Vec out(w.cols, 0.0);
  for (int i = 0; i < w.rows; ++i) {
    const double* row = w.data.data() + static_cast<std::size_t>(i) * w.cols;
    const double yi = y[i];
    if (yi == 0.0) continue;
    for (int j = 0; j < w.cols; ++j) out[j] += yi * row[j];
  }
  return out;
}

void add_outer(Matrix& acc, const Vec& a, const Vec& b) {
  if (acc.rows != static_cast<int>(a.size()) ||
      acc.cols != static_cast<int>(b.size()))
    throw ShapeError("add_outer: " + acc.shape_str() + " += outer(" +
                     std::to_string(a.size()) + ", " + std::to_string(b.size()) +
                     ")");
  for (int i = 0; i < acc.rows; ++i) {
    double* row = acc.data.data() + static_cast<std::size_t>(i) * acc.cols;
    const double ai = a[i];
    if (ai == 0.0) continue;
    for (int j = 0; j < acc.cols; ++j) row[j] += ai * b[j];
  }
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw ShapeError("dot: lengths " + std::to_string(a.size()) + " and " +
                     std::to_string(b.size()));
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

Matrix sigmoid(const Matrix& m) {
  Matrix out(m.rows, m.cols);
  for (std::size_t i = 0; i < m.data.size(); ++i) out.data[i] = sigmoid(m.data[i]);
  return out;
}

Matrix tanh_elem(const Matrix& m) {
  Matrix out(m.rows, m.cols);
  for (std::size_t i = 0; i < m.data.size(); ++i) out.data[i] = std::tanh(m.data[i]);
  return out;
}

Vec softmax(const Vec& logits) {
  if (logits.empty()) throw ArgumentError("softmax: empty input");
  double mx = logits[0];
  for (double v : logits) mx = std::max(mx, v);
  Vec out(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - mx);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
  return out;
}

void check_finite(std::span<const double> v, const std::string& what) {
  for (std::size_t i = 0; i < v.size(); ++i)
    if (!std::isfinite(v[i]))
      throw NumericError(what + ": non-finite value at index " +
                         std::to_string(i));
}

void check_finite(const Matrix& m, const std::string& what) {
  check_finite(std::span<const double>(m.data.data(), m.data.size()), what);
}

}  // namespace multilstm
