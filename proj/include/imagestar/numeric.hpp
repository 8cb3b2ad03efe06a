#pragma once

#include <algorithm>
#include <stdexcept>
#include <string>

namespace imagestar {

/// Tolerances shared by every numerical routine in the library.
struct NumericConfig {
  /// Slack allowed when checking C x <= d, and the phase-1 infeasibility threshold.
  static constexpr double feasibility_tol = 1e-7;
  /// Smallest tableau entry accepted as a pivot.
  static constexpr double pivot_tol = 1e-9;
  /// Reduced costs above -optimality_tol are treated as non-negative.
  static constexpr double optimality_tol = 1e-9;
  /// Equality slack used by membership tests (x = c + V alpha).
  static constexpr double membership_tol = 1e-7;
  /// A concrete output counts as misclassified when y_j >= y_target - tie_tol.
  static constexpr double tie_tol = 1e-9;
  /// Simplex iteration cap; reaching it indicates a numerical breakdown.
  static constexpr long max_simplex_iterations = 200000;
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class EmptySet : public Error {
 public:
  using Error::Error;
};

class EmptyInput : public Error {
 public:
  using Error::Error;
};

class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

class NoAttackedPixels : public Error {
 public:
  using Error::Error;
};

class WitnessMappingFailed : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class NumericalFailure : public Error {
 public:
  using Error::Error;
};

/// Closed interval [lo, hi].
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  [[nodiscard]] bool contains(double x, double tol = 0.0) const {
    return x >= lo - tol && x <= hi + tol;
  }
  [[nodiscard]] bool contains(const Interval& other, double tol = 0.0) const {
    return other.lo >= lo - tol && other.hi <= hi + tol;
  }
  [[nodiscard]] double width() const { return hi - lo; }

  [[nodiscard]] Interval hull(const Interval& other) const {
    return {std::min(lo, other.lo), std::max(hi, other.hi)};
  }
};

}  // namespace imagestar
