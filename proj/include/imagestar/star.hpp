#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "imagestar/lp.hpp"
#include "imagestar/numeric.hpp"

namespace imagestar {

/// Conjunction of linear constraints over the predicate variables, with a
/// lazily computed (and thread-safe) cache of per-variable bounds.
///
/// Predicates are immutable once built and are shared between stars through
/// shared_ptr<const Predicate>; only the bounds cache is ever written.
class Predicate {
 public:
  explicit Predicate(LinearConstraints cons);
  /// Constructs with bounds already known to be sound for every feasible alpha.
  Predicate(LinearConstraints cons, std::vector<Interval> bounds);

  Predicate(const Predicate&) = delete;
  Predicate& operator=(const Predicate&) = delete;

  static std::shared_ptr<const Predicate> make(LinearConstraints cons);
  static std::shared_ptr<const Predicate> box(const Eigen::VectorXd& lb, const Eigen::VectorXd& ub);

  [[nodiscard]] const LinearConstraints& constraints() const { return cons_; }
  [[nodiscard]] Eigen::Index num_vars() const { return cons_.num_vars(); }
  [[nodiscard]] Eigen::Index num_constraints() const { return cons_.num_rows(); }

  [[nodiscard]] bool bounds_fresh() const;
  /// Per-variable bounds; refreshes the cache with 2m LPs when stale.
  /// Throws EmptySet when the predicate is infeasible.
  [[nodiscard]] const std::vector<Interval>& bounds() const;
  /// Cached feasibility.
  [[nodiscard]] bool feasible() const;

  /// k points satisfying C alpha <= d. Box rejection sampling within the
  /// bounds first, hit-and-run inside the polytope when rejection stalls.
  /// Throws EmptySet when infeasible.
  [[nodiscard]] std::vector<Eigen::VectorXd> sample(std::size_t k, std::mt19937_64& rng) const;

 private:
  void refresh_locked() const;

  LinearConstraints cons_;
  mutable std::mutex mu_;
  mutable std::optional<bool> feasible_;
  mutable std::optional<std::vector<Interval>> bounds_;
  // LP witnesses collected while computing bounds; they seed hit-and-run.
  mutable std::vector<Eigen::VectorXd> extreme_points_;
  mutable bool extremes_ready_ = false;
};

using PredicatePtr = std::shared_ptr<const Predicate>;

/// Generalized star {c + V alpha : C alpha <= d} in R^n.
class Star {
 public:
  Star(Eigen::VectorXd center, Eigen::MatrixXd basis, PredicatePtr predicate);

  /// <0, I_n, C alpha <= d>.
  static Star from_polyhedron(const Eigen::MatrixXd& C, const Eigen::VectorXd& d, Eigen::Index n);

  [[nodiscard]] const Eigen::VectorXd& center() const { return center_; }
  [[nodiscard]] const Eigen::MatrixXd& basis() const { return basis_; }
  [[nodiscard]] const PredicatePtr& predicate() const { return predicate_; }
  [[nodiscard]] const LinearConstraints& constraints() const { return predicate_->constraints(); }
  [[nodiscard]] Eigen::Index dim() const { return center_.size(); }
  [[nodiscard]] Eigen::Index num_vars() const { return basis_.cols(); }

  /// <W c + b, W V, P>; the predicate object is shared.
  [[nodiscard]] Star affine_map(const Eigen::MatrixXd& W, const Eigen::VectorXd& b) const;

  /// Adds the rows (H V) alpha <= g - H c to the predicate.
  [[nodiscard]] Star intersect_halfspace(const Eigen::MatrixXd& H, const Eigen::VectorXd& g) const;

  [[nodiscard]] bool is_empty() const;

  [[nodiscard]] Interval exact_range(Eigen::Index i) const;
  [[nodiscard]] Interval estimate_range(Eigen::Index i) const;

  /// Point in the star for a given predicate assignment.
  [[nodiscard]] Eigen::VectorXd point(const Eigen::VectorXd& alpha) const { return center_ + basis_ * alpha; }

  [[nodiscard]] bool contains(const Eigen::VectorXd& x, double tol = NumericConfig::membership_tol) const;

  [[nodiscard]] std::vector<Eigen::VectorXd> sample(std::size_t k, std::uint64_t seed) const;

 private:
  Eigen::VectorXd center_;
  Eigen::MatrixXd basis_;
  PredicatePtr predicate_;
};

/// Interval bound of c + v . alpha given per-variable bounds.
Interval interval_bound(double c, const Eigen::Ref<const Eigen::RowVectorXd>& v, const std::vector<Interval>& bounds);

}  // namespace imagestar
