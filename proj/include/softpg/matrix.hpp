#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace softpg {

// Dense row-major matrix. All tabular quantities in this library (logits,
// policies, rewards, gradients) are small S x A tables, so a flat vector
// with explicit indexing is all we need.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols, fill) {
    if (rows < 0 || cols < 0) throw std::invalid_argument("Matrix: negative shape");
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int size() const { return rows_ * cols_; }

  double& operator()(int r, int c) { return data_[static_cast<size_t>(r) * cols_ + c]; }
  double operator()(int r, int c) const { return data_[static_cast<size_t>(r) * cols_ + c]; }

  double* row(int r) { return data_.data() + static_cast<size_t>(r) * cols_; }
  const double* row(int r) const { return data_.data() + static_cast<size_t>(r) * cols_; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool all_finite() const {
    for (double x : data_)
      if (!std::isfinite(x)) return false;
    return true;
  }

  Matrix& operator+=(const Matrix& o) {
    for (int i = 0; i < size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  Matrix& operator-=(const Matrix& o) {
    for (int i = 0; i < size(); ++i) data_[i] -= o.data_[i];
    return *this;
  }
  Matrix& operator*=(double s) {
    for (double& x : data_) x *= s;
    return *this;
  }

  friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
  friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
  friend Matrix operator*(Matrix a, double s) { return a *= s; }
  friend Matrix operator*(double s, Matrix a) { return a *= s; }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

inline double dot(const Matrix& a, const Matrix& b) {
  double s = 0.0;
  for (int i = 0; i < a.size(); ++i) s += a.data()[i] * b.data()[i];
  return s;
}

inline double norm2(const Matrix& a) { return std::sqrt(dot(a, a)); }

inline Matrix axpy(const Matrix& base, double scale, const Matrix& dir) {
  Matrix out = base;
  for (int i = 0; i < out.size(); ++i) out.data()[i] += scale * dir.data()[i];
  return out;
}

}  // namespace softpg
