#pragma once

#include <cstdint>

#include <Eigen/Dense>

namespace imagestar {

/// The polytope {alpha : C alpha <= d}. Equalities are written as two rows.
struct LinearConstraints {
  Eigen::MatrixXd C;
  Eigen::VectorXd d;

  LinearConstraints() = default;
  LinearConstraints(Eigen::MatrixXd c, Eigen::VectorXd rhs);

  /// Throws DimensionMismatch on inconsistent row counts and on NaN/Inf entries.
  void validate() const;

  [[nodiscard]] Eigen::Index num_vars() const { return C.cols(); }
  [[nodiscard]] Eigen::Index num_rows() const { return C.rows(); }

  /// Appends the rows of `extra`, which must have the same column count.
  void append(const LinearConstraints& extra);
  void append_row(const Eigen::RowVectorXd& row, double rhs);

  /// Box lb <= alpha <= ub as 2m rows.
  static LinearConstraints box(const Eigen::VectorXd& lb, const Eigen::VectorXd& ub);

  /// True when every row holds at `alpha` within `tol`.
  [[nodiscard]] bool satisfied_by(const Eigen::VectorXd& alpha, double tol) const;
};

enum class LPStatus { Optimal, Infeasible, Unbounded };

struct LPOutcome {
  LPStatus status = LPStatus::Infeasible;
  double value = 0.0;       // valid iff Optimal
  Eigen::VectorXd witness;  // valid iff Optimal

  [[nodiscard]] bool optimal() const { return status == LPStatus::Optimal; }
};

/// Global minimum of obj . alpha over {C alpha <= d}, by two-phase dense simplex
/// with Bland's rule. Throws DimensionMismatch when obj.size() != C.cols().
LPOutcome minimize(const Eigen::VectorXd& obj, const LinearConstraints& cons);

/// maximize(obj) = -minimize(-obj); the witness is shared, the value negated.
LPOutcome maximize(const Eigen::VectorXd& obj, const LinearConstraints& cons);

/// Phase-1 feasibility test.
bool is_feasible(const LinearConstraints& cons);

/// Same as is_feasible but returns a feasible point when one exists.
LPOutcome find_feasible_point(const LinearConstraints& cons);

/// Number of LPs solved by this process so far (all threads).
std::uint64_t lp_call_count();

}  // namespace imagestar
