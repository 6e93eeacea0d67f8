#pragma once

#include <cmath>
#include <cstddef>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "steinmed/linalg.hpp"
#include "steinmed/model.hpp"

namespace steinmed::testing {

using LMatrix = std::vector<std::vector<long double>>;

inline Matrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& g) {
  std::normal_distribution<double> z;
  Matrix a(rows, cols);
  for (double& v : a.data()) v = z(g);
  return a;
}

inline std::vector<double> random_vector(std::size_t n, std::mt19937_64& g) {
  std::normal_distribution<double> z;
  std::vector<double> v(n);
  for (double& x : v) x = z(g);
  return v;
}

// Gauss-Jordan inverse with partial pivoting, extended precision.
inline LMatrix inverse(LMatrix a) {
  const std::size_t p = a.size();
  LMatrix inv(p, std::vector<long double>(p, 0.0L));
  for (std::size_t i = 0; i < p; ++i) inv[i][i] = 1.0L;
  for (std::size_t c = 0; c < p; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < p; ++r)
      if (std::fabs(a[r][c]) > std::fabs(a[piv][c])) piv = r;
    if (a[piv][c] == 0.0L) throw std::runtime_error("singular oracle matrix");
    std::swap(a[piv], a[c]);
    std::swap(inv[piv], inv[c]);
    const long double d = a[c][c];
    for (std::size_t j = 0; j < p; ++j) {
      a[c][j] /= d;
      inv[c][j] /= d;
    }
    for (std::size_t r = 0; r < p; ++r) {
      if (r == c) continue;
      const long double f = a[r][c];
      if (f == 0.0L) continue;
      for (std::size_t j = 0; j < p; ++j) {
        a[r][j] -= f * a[c][j];
        inv[r][j] -= f * inv[c][j];
      }
    }
  }
  return inv;
}

// A'B in extended precision.
inline LMatrix cross(const Matrix& a, const Matrix& b) {
  LMatrix out(a.cols(), std::vector<long double>(b.cols(), 0.0L));
  for (std::size_t i = 0; i < a.cols(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j)
      for (std::size_t r = 0; r < a.rows(); ++r)
        out[i][j] += static_cast<long double>(a(r, i)) * b(r, j);
  return out;
}

inline std::vector<long double> cross(const Matrix& a, std::span<const double> y) {
  std::vector<long double> out(a.cols(), 0.0L);
  for (std::size_t i = 0; i < a.cols(); ++i)
    for (std::size_t r = 0; r < a.rows(); ++r) out[i] += static_cast<long double>(a(r, i)) * y[r];
  return out;
}

inline std::vector<long double> times(const LMatrix& a, const std::vector<long double>& x) {
  std::vector<long double> out(a.size(), 0.0L);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < x.size(); ++j) out[i] += a[i][j] * x[j];
  return out;
}

inline LMatrix times(const LMatrix& a, const LMatrix& b) {
  LMatrix out(a.size(), std::vector<long double>(b[0].size(), 0.0L));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t k = 0; k < b.size(); ++k)
      for (std::size_t j = 0; j < b[0].size(); ++j) out[i][j] += a[i][k] * b[k][j];
  return out;
}

// (A'A)^{-1} A'y formed explicitly.
inline std::vector<long double> normal_equations(const Matrix& a, std::span<const double> y) {
  return times(inverse(cross(a, a)), cross(a, y));
}

// Z (Z'Z)^{-1} Z'V formed explicitly.
inline LMatrix explicit_projection(const Matrix& z, const Matrix& v) {
  const LMatrix coef = times(inverse(cross(z, z)), cross(z, v));
  LMatrix out(z.rows(), std::vector<long double>(v.cols(), 0.0L));
  for (std::size_t r = 0; r < z.rows(); ++r)
    for (std::size_t j = 0; j < v.cols(); ++j)
      for (std::size_t i = 0; i < z.cols(); ++i) out[r][j] += z(r, i) * coef[i][j];
  return out;
}

inline long double rss(const Matrix& a, std::span<const double> y) {
  const auto b = normal_equations(a, y);
  long double s = 0.0L;
  for (std::size_t r = 0; r < a.rows(); ++r) {
    long double fit = 0.0L;
    for (std::size_t j = 0; j < a.cols(); ++j) fit += a(r, j) * b[j];
    s += (y[r] - fit) * (y[r] - fit);
  }
  return s;
}

// Random trial with `covariates` non-intercept covariates, a mediator driven
// by R*X and a linear outcome.
inline TrialDataset random_trial(std::size_t n, std::size_t covariates, std::mt19937_64& g,
                                 double noise = 1.0) {
  std::normal_distribution<double> z;
  std::bernoulli_distribution coin(0.5);
  std::vector<std::vector<double>> x(covariates, std::vector<double>(n));
  std::vector<double> y(n), r(n), m(n);
  for (std::size_t i = 0; i < n; ++i) {
    r[i] = coin(g) ? 1.0 : 0.0;
    double mi = 0.5 * r[i] + noise * z(g);
    double yi = 0.3 * r[i] + noise * z(g);
    for (std::size_t j = 0; j < covariates; ++j) {
      x[j][i] = z(g);
      mi += 0.4 * r[i] * x[j][i] + 0.2 * x[j][i];
      yi += 0.1 * static_cast<double>(j + 1) * x[j][i];
    }
    m[i] = mi;
    y[i] = yi + 0.5 * mi;
  }
  return make_dataset(std::move(y), std::move(r), std::move(m), x);
}

}  // namespace steinmed::testing
