#include "steinmed/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "steinmed/errors.hpp"
#include "steinmed/kernels.hpp"

namespace steinmed {

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::from_columns(const std::vector<std::vector<double>>& columns) {
  if (columns.empty()) return {};
  const std::size_t rows = columns.front().size();
  Matrix m(rows, columns.size());
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (columns[j].size() != rows) throw DataError("from_columns: ragged columns");
    std::copy(columns[j].begin(), columns[j].end(), m.col(j).begin());
  }
  return m;
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  if (rows.size() == 0) return {};
  const std::size_t cols = rows.begin()->size();
  Matrix m(rows.size(), cols);
  std::size_t i = 0;
  for (const auto& row : rows) {
    if (row.size() != cols) throw DataError("from_rows: ragged rows");
    std::size_t j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (std::size_t j = 0; j < a.cols(); ++j)
    for (std::size_t i = 0; i < a.rows(); ++i) t(j, i) = a(i, j);
  return t;
}

Matrix multiply(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw DataError("multiply: inner dimensions differ");
  Matrix c(a.rows(), b.cols());
  for (std::size_t j = 0; j < b.cols(); ++j) {
    auto out = c.col(j);
    for (std::size_t l = 0; l < a.cols(); ++l) {
      kernels::axpy(b(l, j), a.col(l).data(), out.data(), a.rows());
    }
  }
  return c;
}

std::vector<double> multiply(const Matrix& a, std::span<const double> x) {
  if (a.cols() != x.size()) throw DataError("multiply: inner dimensions differ");
  std::vector<double> y(a.rows(), 0.0);
  for (std::size_t l = 0; l < a.cols(); ++l) kernels::axpy(x[l], a.col(l).data(), y.data(), y.size());
  return y;
}

Matrix cross_product(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw DataError("cross_product: row counts differ");
  Matrix c(a.cols(), b.cols());
  for (std::size_t i = 0; i < a.cols(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j)
      c(i, j) = kernels::dot(a.col(i).data(), b.col(j).data(), a.rows());
  return c;
}

std::vector<double> cross_product(const Matrix& a, std::span<const double> y) {
  if (a.rows() != y.size()) throw DataError("cross_product: row counts differ");
  std::vector<double> out(a.cols());
  for (std::size_t i = 0; i < a.cols(); ++i) out[i] = kernels::dot(a.col(i).data(), y.data(), y.size());
  return out;
}

double trace(const Matrix& a) {
  double t = 0.0;
  for (std::size_t i = 0; i < std::min(a.rows(), a.cols()); ++i) t += a(i, i);
  return t;
}

Matrix select_rows(const Matrix& a, std::span<const std::size_t> rows) {
  Matrix out(rows.size(), a.cols());
  for (std::size_t j = 0; j < a.cols(); ++j) {
    auto src = a.col(j);
    auto dst = out.col(j);
    for (std::size_t i = 0; i < rows.size(); ++i) dst[i] = src[rows[i]];
  }
  return out;
}

std::vector<double> select_rows(std::span<const double> y, std::span<const std::size_t> rows) {
  std::vector<double> out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) out[i] = y[rows[i]];
  return out;
}

double sum_of_squares(std::span<const double> x) { return kernels::dot(x.data(), x.data(), x.size()); }

// ---------------------------------------------------------------------------

namespace {

// Inverse of an upper-triangular p x p matrix; assumes a nonzero diagonal.
Matrix upper_inverse(const Matrix& r) {
  const std::size_t p = r.cols();
  Matrix inv(p, p);
  for (std::size_t j = 0; j < p; ++j) {
    inv(j, j) = 1.0 / r(j, j);
    for (std::size_t ii = j; ii-- > 0;) {
      double s = 0.0;
      for (std::size_t l = ii + 1; l <= j; ++l) s += r(ii, l) * inv(l, j);
      inv(ii, j) = -s / r(ii, ii);
    }
  }
  return inv;
}

double norm1(const Matrix& a) {
  double best = 0.0;
  for (std::size_t j = 0; j < a.cols(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) s += std::abs(a(i, j));
    best = std::max(best, s);
  }
  return best;
}

void normalize(std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  s = std::sqrt(s);
  if (s > 0.0)
    for (double& x : v) x /= s;
  // sign convention: largest component positive
  auto it = std::max_element(v.begin(), v.end(),
                             [](double a, double b) { return std::abs(a) < std::abs(b); });
  if (it != v.end() && *it < 0.0)
    for (double& x : v) x = -x;
}

}  // namespace

HouseholderQr::HouseholderQr(const Matrix& a, double max_condition)
    : qr_(a), tau_(a.cols(), 0.0), column_norms_(a.cols(), 0.0), max_condition_(max_condition) {
  const std::size_t n = qr_.rows();
  const std::size_t p = qr_.cols();
  if (n < p) throw DataError("QR: fewer rows than columns");

  for (std::size_t j = 0; j < p; ++j) column_norms_[j] = std::sqrt(sum_of_squares(a.col(j)));

  for (std::size_t j = 0; j < p; ++j) {
    double* x = qr_.col(j).data() + j;
    const std::size_t len = n - j;
    const double norm = std::sqrt(kernels::dot(x, x, len));
    if (norm == 0.0) {
      tau_[j] = 0.0;
      continue;
    }
    const double x0 = x[0];
    const double alpha = x0 >= 0.0 ? -norm : norm;
    const double v0 = x0 - alpha;
    if (len > 1) kernels::scale(1.0 / v0, x + 1, len - 1);
    tau_[j] = -v0 / alpha;
    x[0] = alpha;

    for (std::size_t c = j + 1; c < p; ++c) {
      double* y = qr_.col(c).data() + j;
      const double w = y[0] + (len > 1 ? kernels::dot(x + 1, y + 1, len - 1) : 0.0);
      const double tw = tau_[j] * w;
      y[0] -= tw;
      if (len > 1) kernels::axpy(-tw, x + 1, y + 1, len - 1);
    }
  }

  // Equilibrated condition number of R D^{-1}, D = original column norms.
  Matrix rs(p, p);
  double max_diag = 0.0;
  bool zero_column = false;
  for (std::size_t j = 0; j < p; ++j) {
    if (column_norms_[j] == 0.0) {
      zero_column = true;
      continue;
    }
    for (std::size_t i = 0; i <= j; ++i) rs(i, j) = qr_(i, j) / column_norms_[j];
    max_diag = std::max(max_diag, std::abs(rs(j, j)));
  }
  bool singular = zero_column || max_diag == 0.0;
  for (std::size_t j = 0; j < p && !singular; ++j) {
    if (std::abs(rs(j, j)) <= max_diag * std::numeric_limits<double>::epsilon()) singular = true;
  }
  if (singular) {
    condition_ = std::numeric_limits<double>::infinity();
  } else {
    condition_ = norm1(rs) * norm1(upper_inverse(rs));
    if (!std::isfinite(condition_)) condition_ = std::numeric_limits<double>::infinity();
  }
}

std::vector<double> HouseholderQr::near_null_direction() const {
  const std::size_t p = cols();
  std::vector<double> dir(p, 0.0);
  if (p == 0) return dir;

  for (std::size_t j = 0; j < p; ++j) {
    if (column_norms_[j] == 0.0) {
      dir[j] = 1.0;
      return dir;
    }
  }
  Matrix rs(p, p);
  double max_diag = 0.0;
  for (std::size_t j = 0; j < p; ++j) {
    for (std::size_t i = 0; i <= j; ++i) rs(i, j) = qr_(i, j) / column_norms_[j];
    max_diag = std::max(max_diag, std::abs(rs(j, j)));
  }

  std::vector<double> x(p, 0.0);
  std::size_t tiny = p;
  for (std::size_t j = 0; j < p; ++j) {
    if (std::abs(rs(j, j)) <= max_diag * 1e-13) {
      tiny = j;
      break;
    }
  }
  if (tiny < p) {
    // exact null vector of the leading (tiny+1) block: x_tiny = 1, back-solve above it
    x[tiny] = 1.0;
    for (std::size_t ii = tiny; ii-- > 0;) {
      double s = 0.0;
      for (std::size_t l = ii + 1; l <= tiny; ++l) s += rs(ii, l) * x[l];
      x[ii] = -s / rs(ii, ii);
    }
  } else {
    // inverse iteration on Rs'Rs for the smallest right singular vector
    const Matrix inv = upper_inverse(rs);
    std::fill(x.begin(), x.end(), 1.0);
    std::vector<double> tmp(p);
    for (int it = 0; it < 50; ++it) {
      // tmp = inv' x ; x = inv tmp
      for (std::size_t i = 0; i < p; ++i) {
        double s = 0.0;
        for (std::size_t l = 0; l <= i; ++l) s += inv(l, i) * x[l];
        tmp[i] = s;
      }
      for (std::size_t i = 0; i < p; ++i) {
        double s = 0.0;
        for (std::size_t l = i; l < p; ++l) s += inv(i, l) * tmp[l];
        x[i] = s;
      }
      normalize(x);
    }
  }
  for (std::size_t j = 0; j < p; ++j) dir[j] = x[j] / column_norms_[j];
  normalize(dir);
  return dir;
}

void HouseholderQr::require_full_rank(std::span<const std::string> names,
                                      std::string_view context) const {
  if (full_rank()) return;
  auto dir = near_null_direction();
  std::ostringstream msg;
  msg << context << (context.empty() ? "" : ": ") << "design is not of full column rank (condition ";
  if (std::isinf(condition_))
    msg << "inf";
  else
    msg << condition_;
  msg << " > " << max_condition_ << "); near-null direction: " << describe_direction(dir, names);
  throw IdentifiabilityError(msg.str(), std::move(dir), condition_);
}

void HouseholderQr::apply_qt(std::span<double> y) const {
  const std::size_t n = rows();
  if (y.size() != n) throw DataError("QR: vector length does not match rows");
  for (std::size_t j = 0; j < cols(); ++j) {
    if (tau_[j] == 0.0) continue;
    const double* v = qr_.col(j).data() + j;
    double* yy = y.data() + j;
    const std::size_t len = n - j;
    const double w = yy[0] + (len > 1 ? kernels::dot(v + 1, yy + 1, len - 1) : 0.0);
    const double tw = tau_[j] * w;
    yy[0] -= tw;
    if (len > 1) kernels::axpy(-tw, v + 1, yy + 1, len - 1);
  }
}

void HouseholderQr::apply_q(std::span<double> y) const {
  const std::size_t n = rows();
  if (y.size() != n) throw DataError("QR: vector length does not match rows");
  for (std::size_t j = cols(); j-- > 0;) {
    if (tau_[j] == 0.0) continue;
    const double* v = qr_.col(j).data() + j;
    double* yy = y.data() + j;
    const std::size_t len = n - j;
    const double w = yy[0] + (len > 1 ? kernels::dot(v + 1, yy + 1, len - 1) : 0.0);
    const double tw = tau_[j] * w;
    yy[0] -= tw;
    if (len > 1) kernels::axpy(-tw, v + 1, yy + 1, len - 1);
  }
}

std::vector<double> HouseholderQr::solve(std::span<const double> y) const {
  std::vector<double> work(y.begin(), y.end());
  apply_qt(work);
  const std::size_t p = cols();
  std::vector<double> b(p, 0.0);
  for (std::size_t ii = p; ii-- > 0;) {
    double s = work[ii];
    for (std::size_t l = ii + 1; l < p; ++l) s -= qr_(ii, l) * b[l];
    b[ii] = s / qr_(ii, ii);
  }
  return b;
}

std::vector<double> HouseholderQr::project(std::span<const double> y) const {
  std::vector<double> work(y.begin(), y.end());
  apply_qt(work);
  std::fill(work.begin() + static_cast<std::ptrdiff_t>(cols()), work.end(), 0.0);
  apply_q(work);
  return work;
}

Matrix HouseholderQr::r() const {
  const std::size_t p = cols();
  Matrix out(p, p);
  for (std::size_t j = 0; j < p; ++j)
    for (std::size_t i = 0; i <= j; ++i) out(i, j) = qr_(i, j);
  return out;
}

Matrix HouseholderQr::r_inverse() const { return upper_inverse(r()); }

Matrix HouseholderQr::inverse_gram() const {
  const Matrix inv = r_inverse();
  const std::size_t p = cols();
  Matrix g(p, p);
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = i; j < p; ++j) {
      double s = 0.0;
      for (std::size_t l = j; l < p; ++l) s += inv(i, l) * inv(j, l);
      g(i, j) = s;
      g(j, i) = s;
    }
  }
  return g;
}

std::string describe_direction(std::span<const double> direction,
                               std::span<const std::string> names) {
  double max_abs = 0.0;
  for (double d : direction) max_abs = std::max(max_abs, std::abs(d));
  std::ostringstream out;
  out.precision(3);
  bool first = true;
  for (std::size_t j = 0; j < direction.size(); ++j) {
    const double d = direction[j];
    if (max_abs == 0.0 || std::abs(d) < 1e-3 * max_abs) continue;
    const std::string label = j < names.size() ? names[j] : "col" + std::to_string(j);
    if (first) {
      if (d < 0) out << "-";
    } else {
      out << (d < 0 ? " - " : " + ");
    }
    out << std::abs(d) << "*" << label;
    first = false;
  }
  if (first) out << "(none)";
  return out.str();
}

}  // namespace steinmed
