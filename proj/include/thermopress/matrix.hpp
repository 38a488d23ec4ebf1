#pragma once

#include <cassert>
#include <cstddef>
#include <span>
#include <vector>

namespace thermopress {

/// Minimal dense row-major matrix. Sizes here are tiny (alphabet-sized),
/// so no effort is spent on blocking or vectorisation.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> a;

  Matrix() = default;
  Matrix(int r, int c, double fill = 0.0)
      : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, fill) {}

  double& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * cols + j]; }
  double operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * cols + j]; }

  bool operator==(const Matrix&) const = default;

  /// y = M x
  void apply(std::span<const double> x, std::span<double> y) const {
    assert(static_cast<int>(x.size()) == cols && static_cast<int>(y.size()) == rows);
    for (int i = 0; i < rows; ++i) {
      double s = 0.0;
      const double* row = &a[static_cast<std::size_t>(i) * cols];
      for (int j = 0; j < cols; ++j) s += row[j] * x[j];
      y[i] = s;
    }
  }

  /// y = M^T x
  void apply_transpose(std::span<const double> x, std::span<double> y) const {
    assert(static_cast<int>(x.size()) == rows && static_cast<int>(y.size()) == cols);
    for (int j = 0; j < cols; ++j) y[j] = 0.0;
    for (int i = 0; i < rows; ++i) {
      const double xi = x[i];
      const double* row = &a[static_cast<std::size_t>(i) * cols];
      for (int j = 0; j < cols; ++j) y[j] += row[j] * xi;
    }
  }
};

/// Compensated (Kahan) accumulator; used wherever sums over many cylinders
/// must be reproducible and accurate.
struct KahanSum {
  double sum = 0.0;
  double c = 0.0;

  void add(double x) {
    double y = x - c;
    double t = sum + y;
    c = (t - sum) - y;
    sum = t;
  }
  double value() const { return sum; }
};

inline double sup_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) {
    double ax = x < 0 ? -x : x;
    if (ax > m) m = ax;
  }
  return m;
}

inline double dot(std::span<const double> x, std::span<const double> y) {
  assert(x.size() == y.size());
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

}  // namespace thermopress
