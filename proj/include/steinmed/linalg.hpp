#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace steinmed {

/// Dense column-major matrix of doubles. Columns are contiguous so the
/// kernel layer can stream them.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n);
  static Matrix from_columns(const std::vector<std::vector<double>>& columns);
  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[j * rows_ + i]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[j * rows_ + i]; }

  std::span<double> col(std::size_t j) noexcept { return {data_.data() + j * rows_, rows_}; }
  std::span<const double> col(std::size_t j) const noexcept {
    return {data_.data() + j * rows_, rows_};
  }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix transpose(const Matrix& a);
Matrix multiply(const Matrix& a, const Matrix& b);
std::vector<double> multiply(const Matrix& a, std::span<const double> x);
/// A'B
Matrix cross_product(const Matrix& a, const Matrix& b);
/// A'y
std::vector<double> cross_product(const Matrix& a, std::span<const double> y);
double trace(const Matrix& a);
/// Copies the listed rows (with repetition) into a new matrix.
Matrix select_rows(const Matrix& a, std::span<const std::size_t> rows);
std::vector<double> select_rows(std::span<const double> y, std::span<const std::size_t> rows);

double sum_of_squares(std::span<const double> x);

inline constexpr double kDefaultMaxCondition = 1e10;

/// Householder QR of a tall matrix (rows >= cols), with a column-equilibrated
/// 1-norm condition estimate of R used as the rank test.
class HouseholderQr {
 public:
  explicit HouseholderQr(const Matrix& a, double max_condition = kDefaultMaxCondition);

  std::size_t rows() const noexcept { return qr_.rows(); }
  std::size_t cols() const noexcept { return qr_.cols(); }

  /// Infinity for exactly singular R.
  double condition() const noexcept { return condition_; }
  bool full_rank() const noexcept { return condition_ <= max_condition_; }

  /// Throws IdentifiabilityError naming the near-null column combination.
  /// `names` labels the columns (may be empty); `context` prefixes the message.
  void require_full_rank(std::span<const std::string> names, std::string_view context) const;

  /// Unit-norm coefficients c with A c ~ 0, in the original column scale.
  std::vector<double> near_null_direction() const;

  /// argmin_b ||y - A b||
  std::vector<double> solve(std::span<const double> y) const;
  /// Orthogonal projection of y onto span(A).
  std::vector<double> project(std::span<const double> y) const;
  void apply_qt(std::span<double> y) const;
  void apply_q(std::span<double> y) const;

  Matrix r() const;
  Matrix r_inverse() const;
  /// (A'A)^{-1} = R^{-1} R^{-T}, exactly symmetric.
  Matrix inverse_gram() const;

 private:
  Matrix qr_;
  std::vector<double> tau_;
  std::vector<double> column_norms_;
  double condition_ = 0.0;
  double max_condition_;
};

/// Formats a direction as "0.707*x1 - 0.707*x2" (small components omitted).
std::string describe_direction(std::span<const double> direction,
                               std::span<const std::string> names);

}  // namespace steinmed
