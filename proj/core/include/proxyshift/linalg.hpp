#pragma once

// Categorical probability types and the small dense linear-algebra kernels
// (pseudo-inverse, condition number, numeric rank) shared by the estimators.
//
// Conditional pmfs are stored as column-stochastic matrices: entry (i, j) is
// p(a_i | b_j), so each column is a pmf over the outcome axis.

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace proxyshift {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

inline constexpr double kStochasticTol = 1e-12;
inline constexpr double kRankTol = 1e-9;

/// Cardinalities of the five categorical axes plus optional labels.
struct CategorySpec {
  std::size_t k_E = 1;  // source domains (the target is extra)
  std::size_t k_U = 1;
  std::size_t k_W = 1;
  std::size_t k_X = 1;
  std::size_t k_Y = 1;
  std::vector<std::string> labels_E{}, labels_U{}, labels_W{}, labels_X{}, labels_Y{};

  /// Throws InvalidInput when a cardinality is zero or labels are
  /// duplicated or do not match their cardinality.
  void validate() const;

  friend bool operator==(const CategorySpec&, const CategorySpec&) = default;
};

struct StochasticViolation {
  enum class Kind { ColumnSum, Negative, NonPositive, NotFinite };
  Kind kind;
  std::size_t row = 0;  // meaningful for entry violations
  std::size_t col = 0;
  double value = 0.0;  // the offending column sum or entry

  std::string describe() const;
};

/// Checks that every entry is >= 0 (> 0 when strict_positive) and every
/// column sums to 1 within tol. Returns the first violation found, scanning
/// column by column.
std::optional<StochasticViolation> validate_stochastic(const Matrix& m, double tol = kStochasticTol,
                                                       bool strict_positive = false);

/// A validated column-stochastic matrix (rows = outcome, cols = condition).
class StochasticMatrix {
 public:
  StochasticMatrix() = default;
  /// Throws InvalidInput with the violation description.
  explicit StochasticMatrix(Matrix m, bool strict_positive = false, double tol = kStochasticTol);

  static StochasticMatrix identity(std::size_t k) { return StochasticMatrix(Matrix::Identity(k, k)); }

  std::size_t rows() const { return static_cast<std::size_t>(m_.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(m_.cols()); }
  double operator()(std::size_t r, std::size_t c) const { return m_(r, c); }
  const Matrix& matrix() const { return m_; }
  Vector column(std::size_t c) const { return m_.col(static_cast<Eigen::Index>(c)); }

 private:
  Matrix m_;
};

/// A validated pmf (entries >= 0, sum 1).
class ProbVector {
 public:
  ProbVector() = default;
  explicit ProbVector(Vector v, bool strict_positive = false, double tol = kStochasticTol);

  static ProbVector uniform(std::size_t k) {
    return ProbVector(Vector::Constant(static_cast<Eigen::Index>(k), 1.0 / static_cast<double>(k)));
  }

  std::size_t size() const { return static_cast<std::size_t>(v_.size()); }
  double operator[](std::size_t i) const { return v_(static_cast<Eigen::Index>(i)); }
  const Vector& vector() const { return v_; }

 private:
  Vector v_;
};

/// Singular values in descending order.
Vector singular_values(const Matrix& a);

/// Right pseudo-inverse A^T (A A^T)^{-1}, computed through the SVD.
/// Throws RankDeficiencyError when sigma_min / sigma_max < rel_tol or when
/// A has more rows than columns.
Matrix right_pseudoinverse(const Matrix& a, double rel_tol = kRankTol);

/// sigma_max / sigma_min over the first min(rows, cols) singular values;
/// +infinity when rows > cols, sigma_min < 1e-300 or
/// sigma_min <= eps * max(rows, cols) * sigma_max.
double condition_number(const Matrix& a);

/// Number of singular values >= rel_tol * sigma_max.
std::size_t numeric_row_rank(const Matrix& a, double rel_tol = kRankTol);

}  // namespace proxyshift
