#pragma once

#include <cassert>
#include <cstddef>
#include <span>
#include <vector>

namespace commod {

using Vector = std::vector<double>;

// Dense row-major matrix backed by a flat vector.
struct Matrix {
  int rows = 0;
  int cols = 0;
  Vector a;

  Matrix() = default;
  Matrix(int r, int c, double fill = 0.0)
      : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, fill) {}

  double& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * cols + j]; }
  double operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * cols + j]; }

  std::span<double> row(int i) { return {a.data() + static_cast<std::size_t>(i) * cols, static_cast<std::size_t>(cols)}; }
  std::span<const double> row(int i) const { return {a.data() + static_cast<std::size_t>(i) * cols, static_cast<std::size_t>(cols)}; }

  void zero() { a.assign(a.size(), 0.0); }
};

inline double dot(std::span<const double> x, std::span<const double> y) {
  assert(x.size() == y.size());
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

// y += M x
inline void matvec_add(const Matrix& m, std::span<const double> x, std::span<double> y) {
  assert(static_cast<int>(x.size()) == m.cols && static_cast<int>(y.size()) == m.rows);
  for (int i = 0; i < m.rows; ++i) y[i] += dot(m.row(i), x);
}

// y += M^T x
inline void matvec_t_add(const Matrix& m, std::span<const double> x, std::span<double> y) {
  assert(static_cast<int>(x.size()) == m.rows && static_cast<int>(y.size()) == m.cols);
  for (int i = 0; i < m.rows; ++i) {
    const double xi = x[i];
    auto r = m.row(i);
    for (int j = 0; j < m.cols; ++j) y[j] += xi * r[j];
  }
}

// M += u v^T
inline void outer_add(std::span<const double> u, std::span<const double> v, Matrix& m) {
  assert(static_cast<int>(u.size()) == m.rows && static_cast<int>(v.size()) == m.cols);
  for (int i = 0; i < m.rows; ++i) {
    const double ui = u[i];
    auto r = m.row(i);
    for (int j = 0; j < m.cols; ++j) r[j] += ui * v[j];
  }
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

}  // namespace commod
