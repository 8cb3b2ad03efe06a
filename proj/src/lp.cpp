#include "imagestar/lp.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "imagestar/numeric.hpp"

namespace imagestar {

namespace {

std::atomic<std::uint64_t> g_lp_calls{0};

// Dense simplex tableau over the standard form
//   [C  -C  I] [u; v; s] (+ artificials) = d,   u, v, s, a >= 0,
// with alpha = u - v. Rows with negative right-hand side are negated and
// receive an artificial column.
class Tableau {
 public:
  Tableau(const LinearConstraints& cons, const std::vector<Eigen::Index>& rows)
      : m_(cons.num_vars()), p_(static_cast<Eigen::Index>(rows.size())) {
    Eigen::Index num_art = 0;
    for (Eigen::Index r : rows)
      if (cons.d(r) < 0.0) ++num_art;
    first_art_ = 2 * m_ + p_;
    cols_ = first_art_ + num_art;
    stride_ = cols_ + 1;
    data_.assign(static_cast<std::size_t>(p_ * stride_), 0.0);
    obj_.assign(static_cast<std::size_t>(stride_), 0.0);
    basis_.resize(static_cast<std::size_t>(p_));

    Eigen::Index art = first_art_;
    for (Eigen::Index i = 0; i < p_; ++i) {
      const Eigen::Index r = rows[static_cast<std::size_t>(i)];
      const double sign = cons.d(r) < 0.0 ? -1.0 : 1.0;
      double* row = row_ptr(i);
      for (Eigen::Index j = 0; j < m_; ++j) {
        row[j] = sign * cons.C(r, j);
        row[m_ + j] = -sign * cons.C(r, j);
      }
      row[2 * m_ + i] = sign;
      row[cols_] = sign * cons.d(r);
      if (sign < 0.0) {
        row[art] = 1.0;
        basis_[static_cast<std::size_t>(i)] = art++;
      } else {
        basis_[static_cast<std::size_t>(i)] = 2 * m_ + i;
      }
    }
  }

  [[nodiscard]] bool has_artificials() const { return cols_ > first_art_; }

  // Phase 1: minimize the sum of artificials. Returns the attained sum.
  double phase_one() {
    std::vector<double> cost(static_cast<std::size_t>(cols_), 0.0);
    for (Eigen::Index j = first_art_; j < cols_; ++j) cost[static_cast<std::size_t>(j)] = 1.0;
    load_objective(cost);
    if (run(cols_) != Run::Optimal)
      throw NumericalFailure("phase-1 simplex reported an unbounded auxiliary problem");
    return -obj_[static_cast<std::size_t>(cols_)];
  }

  // Pivots remaining zero-valued artificials out of the basis where possible.
  void expel_artificials() {
    for (Eigen::Index i = 0; i < p_; ++i) {
      if (basis_[static_cast<std::size_t>(i)] < first_art_) continue;
      const double* row = row_ptr(i);
      for (Eigen::Index j = 0; j < first_art_; ++j) {
        if (std::abs(row[j]) > NumericConfig::pivot_tol) {
          pivot(i, j);
          break;
        }
      }
      // A row with no usable column is redundant; its artificial stays basic at zero.
    }
  }

  enum class Run { Optimal, Unbounded };

  // Phase 2 on the original objective over alpha.
  Run phase_two(const Eigen::VectorXd& objective) {
    std::vector<double> cost(static_cast<std::size_t>(cols_), 0.0);
    for (Eigen::Index j = 0; j < m_; ++j) {
      cost[static_cast<std::size_t>(j)] = objective(j);
      cost[static_cast<std::size_t>(m_ + j)] = -objective(j);
    }
    load_objective(cost);
    return run(first_art_);
  }

  [[nodiscard]] Eigen::VectorXd alpha() const {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(m_);
    for (Eigen::Index i = 0; i < p_; ++i) {
      const Eigen::Index b = basis_[static_cast<std::size_t>(i)];
      const double value = row_ptr(i)[cols_];
      if (b < m_)
        x(b) += value;
      else if (b < 2 * m_)
        x(b - m_) -= value;
    }
    return x;
  }

 private:
  double* row_ptr(Eigen::Index i) { return data_.data() + i * stride_; }
  [[nodiscard]] const double* row_ptr(Eigen::Index i) const { return data_.data() + i * stride_; }

  void load_objective(const std::vector<double>& cost) {
    std::copy(cost.begin(), cost.end(), obj_.begin());
    obj_[static_cast<std::size_t>(cols_)] = 0.0;
    for (Eigen::Index i = 0; i < p_; ++i) {
      const double cb = cost[static_cast<std::size_t>(basis_[static_cast<std::size_t>(i)])];
      if (cb == 0.0) continue;
      const double* row = row_ptr(i);
      for (Eigen::Index j = 0; j <= cols_; ++j) obj_[static_cast<std::size_t>(j)] -= cb * row[j];
    }
  }

  void pivot(Eigen::Index r, Eigen::Index c) {
    double* prow = row_ptr(r);
    const double inv = 1.0 / prow[c];
    for (Eigen::Index j = 0; j <= cols_; ++j) prow[j] *= inv;
    prow[c] = 1.0;
    for (Eigen::Index i = 0; i < p_; ++i) {
      if (i == r) continue;
      double* row = row_ptr(i);
      const double f = row[c];
      if (f == 0.0) continue;
      for (Eigen::Index j = 0; j <= cols_; ++j) row[j] -= f * prow[j];
      row[c] = 0.0;
    }
    const double f = obj_[static_cast<std::size_t>(c)];
    if (f != 0.0) {
      for (Eigen::Index j = 0; j <= cols_; ++j) obj_[static_cast<std::size_t>(j)] -= f * prow[j];
      obj_[static_cast<std::size_t>(c)] = 0.0;
    }
    basis_[static_cast<std::size_t>(r)] = c;
  }

  // Bland's rule: lowest-index improving column, lowest-index basic variable on ratio ties.
  Run run(Eigen::Index allowed_cols) {
    for (long iter = 0; iter < NumericConfig::max_simplex_iterations; ++iter) {
      Eigen::Index enter = -1;
      for (Eigen::Index j = 0; j < allowed_cols; ++j) {
        if (obj_[static_cast<std::size_t>(j)] < -NumericConfig::optimality_tol) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return Run::Optimal;

      Eigen::Index leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < p_; ++i) {
        const double* row = row_ptr(i);
        const double a = row[enter];
        if (a <= NumericConfig::pivot_tol) continue;
        const double ratio = std::max(row[cols_], 0.0) / a;
        if (leave < 0 || ratio < best - 1e-12 * (1.0 + std::abs(best))) {
          best = ratio;
          leave = i;
        } else if (ratio <= best + 1e-12 * (1.0 + std::abs(best)) &&
                   basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(leave)]) {
          leave = i;
        }
      }
      if (leave < 0) return Run::Unbounded;
      pivot(leave, enter);
    }
    throw NumericalFailure("simplex iteration limit reached");
  }

  Eigen::Index m_;
  Eigen::Index p_;
  Eigen::Index first_art_ = 0;
  Eigen::Index cols_ = 0;
  Eigen::Index stride_ = 0;
  std::vector<double> data_;
  std::vector<double> obj_;
  std::vector<Eigen::Index> basis_;
};

LPOutcome solve(const Eigen::VectorXd* objective, const LinearConstraints& cons) {
  g_lp_calls.fetch_add(1, std::memory_order_relaxed);
  cons.validate();
  const Eigen::Index m = cons.num_vars();
  if (objective != nullptr && objective->size() != m)
    throw DimensionMismatch("objective has " + std::to_string(objective->size()) +
                            " entries but constraints have " + std::to_string(m) + " columns");

  const double scale = 1.0 + (cons.d.size() > 0 ? cons.d.cwiseAbs().maxCoeff() : 0.0);
  const double infeasible_above = NumericConfig::feasibility_tol * scale;

  // Rows with an all-zero left-hand side reduce to 0 <= d.
  std::vector<Eigen::Index> rows;
  rows.reserve(static_cast<std::size_t>(cons.num_rows()));
  for (Eigen::Index r = 0; r < cons.num_rows(); ++r) {
    if (m > 0 && cons.C.row(r).cwiseAbs().maxCoeff() > 0.0) {
      rows.push_back(r);
    } else if (cons.d(r) < -infeasible_above) {
      return {LPStatus::Infeasible, 0.0, {}};
    }
  }

  Tableau tab(cons, rows);
  if (tab.has_artificials()) {
    if (tab.phase_one() > infeasible_above) return {LPStatus::Infeasible, 0.0, {}};
    tab.expel_artificials();
  }

  LPOutcome out;
  out.status = LPStatus::Optimal;
  if (objective != nullptr) {
    if (tab.phase_two(*objective) == Tableau::Run::Unbounded) return {LPStatus::Unbounded, 0.0, {}};
  }
  out.witness = tab.alpha();
  out.value = objective != nullptr ? objective->dot(out.witness) : 0.0;
  return out;
}

}  // namespace

LinearConstraints::LinearConstraints(Eigen::MatrixXd c, Eigen::VectorXd rhs)
    : C(std::move(c)), d(std::move(rhs)) {
  validate();
}

void LinearConstraints::validate() const {
  if (C.rows() != d.size())
    throw DimensionMismatch("constraint matrix has " + std::to_string(C.rows()) +
                            " rows but right-hand side has " + std::to_string(d.size()));
  if (!C.allFinite() || !d.allFinite()) throw DimensionMismatch("constraints contain NaN or Inf");
}

void LinearConstraints::append(const LinearConstraints& extra) {
  if (extra.num_rows() == 0) return;
  if (extra.num_vars() != num_vars())
    throw DimensionMismatch("cannot append constraints over " + std::to_string(extra.num_vars()) +
                            " variables to a system over " + std::to_string(num_vars()));
  const Eigen::Index p = C.rows();
  C.conservativeResize(p + extra.C.rows(), Eigen::NoChange);
  C.bottomRows(extra.C.rows()) = extra.C;
  d.conservativeResize(p + extra.d.size());
  d.tail(extra.d.size()) = extra.d;
}

void LinearConstraints::append_row(const Eigen::RowVectorXd& row, double rhs) {
  if (row.size() != num_vars()) throw DimensionMismatch("constraint row has wrong length");
  const Eigen::Index p = C.rows();
  C.conservativeResize(p + 1, Eigen::NoChange);
  C.row(p) = row;
  d.conservativeResize(p + 1);
  d(p) = rhs;
}

LinearConstraints LinearConstraints::box(const Eigen::VectorXd& lb, const Eigen::VectorXd& ub) {
  if (lb.size() != ub.size()) throw DimensionMismatch("box bounds differ in length");
  const Eigen::Index m = lb.size();
  LinearConstraints out;
  out.C = Eigen::MatrixXd::Zero(2 * m, m);
  out.d.resize(2 * m);
  for (Eigen::Index i = 0; i < m; ++i) {
    out.C(2 * i, i) = 1.0;
    out.d(2 * i) = ub(i);
    out.C(2 * i + 1, i) = -1.0;
    out.d(2 * i + 1) = -lb(i);
  }
  out.validate();
  return out;
}

bool LinearConstraints::satisfied_by(const Eigen::VectorXd& alpha, double tol) const {
  if (alpha.size() != num_vars()) return false;
  if (num_rows() == 0) return true;
  return ((C * alpha - d).array() <= tol).all();
}

LPOutcome minimize(const Eigen::VectorXd& obj, const LinearConstraints& cons) {
  return solve(&obj, cons);
}

LPOutcome maximize(const Eigen::VectorXd& obj, const LinearConstraints& cons) {
  const Eigen::VectorXd neg = -obj;
  LPOutcome out = solve(&neg, cons);
  if (out.optimal()) out.value = obj.dot(out.witness);
  return out;
}

bool is_feasible(const LinearConstraints& cons) { return solve(nullptr, cons).optimal(); }

LPOutcome find_feasible_point(const LinearConstraints& cons) { return solve(nullptr, cons); }

std::uint64_t lp_call_count() { return g_lp_calls.load(std::memory_order_relaxed); }

}  // namespace imagestar
