#include "proxyshift/linalg.hpp"

#include "proxyshift/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

namespace proxyshift {

namespace {

void check_labels(const std::vector<std::string>& labels, std::size_t k, const char* axis) {
  if (labels.empty()) return;
  if (labels.size() != k) {
    throw InvalidInput(std::string("labels for axis ") + axis + " have size " +
                       std::to_string(labels.size()) + ", expected " + std::to_string(k));
  }
  std::set<std::string> seen(labels.begin(), labels.end());
  if (seen.size() != labels.size()) {
    throw InvalidInput(std::string("duplicate label on axis ") + axis);
  }
}

}  // namespace

void CategorySpec::validate() const {
  const std::pair<std::size_t, const char*> axes[] = {
      {k_E, "E"}, {k_U, "U"}, {k_W, "W"}, {k_X, "X"}, {k_Y, "Y"}};
  for (const auto& [k, name] : axes) {
    if (k < 1) throw InvalidInput(std::string("cardinality k_") + name + " must be >= 1");
  }
  check_labels(labels_E, k_E, "E");
  check_labels(labels_U, k_U, "U");
  check_labels(labels_W, k_W, "W");
  check_labels(labels_X, k_X, "X");
  check_labels(labels_Y, k_Y, "Y");
}

std::string StochasticViolation::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind) {
    case Kind::ColumnSum:
      os << "column " << col << " sums to " << value;
      break;
    case Kind::Negative:
      os << "negative entry " << value << " at (" << row << ", " << col << ")";
      break;
    case Kind::NonPositive:
      os << "zero entry at (" << row << ", " << col << ") violates strict positivity";
      break;
    case Kind::NotFinite:
      os << "non-finite entry at (" << row << ", " << col << ")";
      break;
  }
  return os.str();
}

std::optional<StochasticViolation> validate_stochastic(const Matrix& m, double tol, bool strict_positive) {
  using Kind = StochasticViolation::Kind;
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    double sum = 0.0;
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      const double v = m(r, c);
      const auto ur = static_cast<std::size_t>(r);
      const auto uc = static_cast<std::size_t>(c);
      if (!std::isfinite(v)) return StochasticViolation{Kind::NotFinite, ur, uc, v};
      if (v < 0.0) return StochasticViolation{Kind::Negative, ur, uc, v};
      if (strict_positive && v == 0.0) return StochasticViolation{Kind::NonPositive, ur, uc, v};
      sum += v;
    }
    if (std::abs(sum - 1.0) > tol) {
      return StochasticViolation{Kind::ColumnSum, 0, static_cast<std::size_t>(c), sum};
    }
  }
  return std::nullopt;
}

StochasticMatrix::StochasticMatrix(Matrix m, bool strict_positive, double tol) : m_(std::move(m)) {
  if (m_.size() == 0) throw InvalidInput("stochastic matrix must be non-empty");
  if (auto v = validate_stochastic(m_, tol, strict_positive)) {
    throw InvalidInput("not column-stochastic: " + v->describe());
  }
}

ProbVector::ProbVector(Vector v, bool strict_positive, double tol) : v_(std::move(v)) {
  if (v_.size() == 0) throw InvalidInput("probability vector must be non-empty");
  if (auto bad = validate_stochastic(v_, tol, strict_positive)) {
    auto d = *bad;
    if (d.kind == StochasticViolation::Kind::ColumnSum) {
      std::ostringstream os;
      os.precision(17);
      os << "probability vector sums to " << d.value;
      throw InvalidInput(os.str());
    }
    throw InvalidInput("invalid probability vector: " + d.describe());
  }
}

Vector singular_values(const Matrix& a) {
  if (a.size() == 0) return Vector();
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues();
}

Matrix right_pseudoinverse(const Matrix& a, double rel_tol) {
  if (a.size() == 0) throw InvalidInput("pseudo-inverse of an empty matrix");
  if (a.rows() > a.cols()) {
    throw RankDeficiencyError("rank deficient: matrix with " + std::to_string(a.rows()) + " rows and " +
                                  std::to_string(a.cols()) + " columns cannot have independent rows",
                              std::numeric_limits<double>::infinity());
  }
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  const double smax = s(0);
  const double smin = s(s.size() - 1);
  if (!(smax > 0.0) || smin < rel_tol * smax) {
    const double kappa = condition_number(a);
    std::ostringstream os;
    os << "rank deficient: rows are not linearly independent (condition number " << kappa << ")";
    throw RankDeficiencyError(os.str(), kappa);
  }
  // A = U S V^T with U square (rows <= cols), so A^+ = V S^{-1} U^T.
  return svd.matrixV() * s.cwiseInverse().asDiagonal() * svd.matrixU().transpose();
}

double condition_number(const Matrix& a) {
  const Vector s = singular_values(a);
  // More rows than columns: the rows cannot be independent.
  if (s.size() == 0 || a.rows() > a.cols()) return std::numeric_limits<double>::infinity();
  const double smin = s(s.size() - 1);
  // Below roundoff level the smallest singular value is numerically zero.
  const double roundoff = std::numeric_limits<double>::epsilon() * static_cast<double>(std::max(a.rows(), a.cols()));
  if (smin < 1e-300 || smin <= roundoff * s(0)) return std::numeric_limits<double>::infinity();
  return s(0) / smin;
}

std::size_t numeric_row_rank(const Matrix& a, double rel_tol) {
  const Vector s = singular_values(a);
  if (s.size() == 0 || s(0) <= 0.0) return 0;
  std::size_t rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) >= rel_tol * s(0)) ++rank;
  }
  return rank;
}

}  // namespace proxyshift
