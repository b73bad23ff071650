#pragma once

#include "fbh/errors.hpp"
#include "fbh/jet.hpp"

#include <cmath>
#include <vector>

namespace fbh {

// Small dense row-major matrix over doubles or jets.
template <class T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, const T& fill = T(0.0)) : r_(rows), c_(cols), a_(rows * cols, fill) {}
  int rows() const { return r_; }
  int cols() const { return c_; }
  T& operator()(int i, int j) { return a_[i * c_ + j]; }
  const T& operator()(int i, int j) const { return a_[i * c_ + j]; }

 private:
  int r_ = 0, c_ = 0;
  std::vector<T> a_;
};

using JetVec = std::vector<Jet>;
using JetMat = Matrix<Jet>;

inline double scalar_value(double v) { return v; }
inline double scalar_value(const Jet& v) { return v.value(); }

inline double jsqrt(double v) { return std::sqrt(v); }
inline Jet jsqrt(const Jet& v) { return sqrt(v); }

// Lower-triangular L with A = L L^T.  Throws SingularMetric when A is not
// numerically positive definite.
template <class T>
Matrix<T> cholesky(const Matrix<T>& a) {
  const int n = a.rows();
  double scale = 0.0;
  for (int i = 0; i < n; ++i) scale = std::max(scale, std::abs(scalar_value(a(i, i))));
  Matrix<T> l(n, n);
  for (int j = 0; j < n; ++j) {
    T d = a(j, j);
    for (int k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(scalar_value(d) > 1e-13 * std::max(scale, 1e-300)))
      throw SingularMetric("metric is not positive definite (pivot " + std::to_string(scalar_value(d)) + ")");
    l(j, j) = jsqrt(d);
    for (int i = j + 1; i < n; ++i) {
      T s = a(i, j);
      for (int k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / l(j, j);
    }
  }
  return l;
}

template <class T>
Matrix<T> lower_inverse(const Matrix<T>& l) {
  const int n = l.rows();
  Matrix<T> inv(n, n);
  for (int c = 0; c < n; ++c) {
    for (int i = c; i < n; ++i) {
      T s = (i == c) ? T(1.0) : T(0.0);
      for (int k = c; k < i; ++k) s -= l(i, k) * inv(k, c);
      inv(i, c) = s / l(i, i);
    }
  }
  return inv;
}

template <class T>
Matrix<T> spd_inverse(const Matrix<T>& a) {
  const auto li = lower_inverse(cholesky(a));
  const int n = a.rows();
  Matrix<T> r(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) {
      T s(0.0);
      for (int k = i; k < n; ++k) s += li(k, i) * li(k, j);
      r(i, j) = s;
      r(j, i) = s;
    }
  return r;
}

template <class T>
T determinant_spd(const Matrix<T>& a) {
  const auto l = cholesky(a);
  T d(1.0);
  for (int i = 0; i < a.rows(); ++i) d *= l(i, i) * l(i, i);
  return d;
}

}  // namespace fbh
