#include "imagestar/star.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace imagestar {

namespace {

constexpr std::size_t kRejectionTries = 64;
constexpr int kHitAndRunSteps = 6;

Eigen::VectorXd unit(Eigen::Index m, Eigen::Index i) {
  Eigen::VectorXd e = Eigen::VectorXd::Zero(m);
  e(i) = 1.0;
  return e;
}

}  // namespace

// ---------------------------------------------------------------------------
// Predicate

Predicate::Predicate(LinearConstraints cons) : cons_(std::move(cons)) { cons_.validate(); }

Predicate::Predicate(LinearConstraints cons, std::vector<Interval> bounds) : cons_(std::move(cons)) {
  cons_.validate();
  if (static_cast<Eigen::Index>(bounds.size()) != cons_.num_vars())
    throw DimensionMismatch("predicate bounds do not match the number of variables");
  bounds_ = std::move(bounds);
}

std::shared_ptr<const Predicate> Predicate::make(LinearConstraints cons) {
  return std::make_shared<const Predicate>(std::move(cons));
}

std::shared_ptr<const Predicate> Predicate::box(const Eigen::VectorXd& lb, const Eigen::VectorXd& ub) {
  std::vector<Interval> bounds(static_cast<std::size_t>(lb.size()));
  for (Eigen::Index i = 0; i < lb.size(); ++i) bounds[static_cast<std::size_t>(i)] = {lb(i), ub(i)};
  for (Eigen::Index i = 0; i < lb.size(); ++i)
    if (lb(i) > ub(i)) return make(LinearConstraints::box(lb, ub));
  return std::make_shared<const Predicate>(LinearConstraints::box(lb, ub), std::move(bounds));
}

bool Predicate::bounds_fresh() const {
  std::lock_guard lock(mu_);
  return bounds_.has_value();
}

void Predicate::refresh_locked() const {
  const Eigen::Index m = num_vars();
  std::vector<Interval> bounds(static_cast<std::size_t>(m));
  std::vector<Eigen::VectorXd> extremes;
  if (m == 0) {
    feasible_ = is_feasible(cons_);
    if (!*feasible_) throw EmptySet("predicate is infeasible");
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::VectorXd e = unit(m, i);
    const LPOutcome lo = minimize(e, cons_);
    if (lo.status == LPStatus::Infeasible) {
      feasible_ = false;
      throw EmptySet("predicate is infeasible");
    }
    const LPOutcome hi = maximize(e, cons_);
    auto& b = bounds[static_cast<std::size_t>(i)];
    b.lo = lo.optimal() ? lo.value : -std::numeric_limits<double>::infinity();
    b.hi = hi.optimal() ? hi.value : std::numeric_limits<double>::infinity();
    if (lo.optimal()) extremes.push_back(lo.witness);
    if (hi.optimal()) extremes.push_back(hi.witness);
  }
  feasible_ = true;
  // Bounds handed out earlier by reference stay valid: an existing entry is never replaced.
  if (!bounds_) bounds_ = std::move(bounds);
  extreme_points_ = std::move(extremes);
  extremes_ready_ = true;
}

const std::vector<Interval>& Predicate::bounds() const {
  std::lock_guard lock(mu_);
  if (feasible_.has_value() && !*feasible_) throw EmptySet("predicate is infeasible");
  if (!bounds_) refresh_locked();
  return *bounds_;
}

bool Predicate::feasible() const {
  std::lock_guard lock(mu_);
  if (!feasible_) feasible_ = is_feasible(cons_);
  return *feasible_;
}

std::vector<Eigen::VectorXd> Predicate::sample(std::size_t k, std::mt19937_64& rng) const {
  std::vector<Interval> bounds;
  std::vector<Eigen::VectorXd> extremes;
  {
    std::lock_guard lock(mu_);
    if (feasible_.has_value() && !*feasible_) throw EmptySet("cannot sample an empty set");
    if (!extremes_ready_) refresh_locked();
    bounds = *bounds_;
    extremes = extreme_points_;
  }

  const Eigen::Index m = num_vars();
  std::vector<Eigen::VectorXd> out;
  out.reserve(k);
  if (m == 0) {
    out.assign(k, Eigen::VectorXd());
    return out;
  }

  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  bool box_finite = true;
  for (const auto& b : bounds) box_finite = box_finite && std::isfinite(b.lo) && std::isfinite(b.hi);

  // Rejection sampling inside the bounding box of the predicate.
  bool rejection_ok = box_finite;
  while (rejection_ok && out.size() < k) {
    bool accepted = false;
    for (std::size_t t = 0; t < kRejectionTries; ++t) {
      Eigen::VectorXd a(m);
      for (Eigen::Index i = 0; i < m; ++i) {
        const auto& b = bounds[static_cast<std::size_t>(i)];
        a(i) = b.lo + (b.hi - b.lo) * uni(rng);
      }
      if (cons_.satisfied_by(a, 0.0)) {
        out.push_back(std::move(a));
        accepted = true;
        break;
      }
    }
    rejection_ok = accepted;
  }
  if (out.size() == k) return out;

  // Hit-and-run. Directions mix isotropic draws with differences of LP
  // vertices, which stay inside the affine hull of lower-dimensional sets.
  if (extremes.empty()) extremes.push_back(find_feasible_point(cons_).witness);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(m);
  for (const auto& e : extremes) x += e;
  x /= static_cast<double>(extremes.size());
  std::uniform_int_distribution<std::size_t> pick(0, extremes.size() - 1);

  const auto step = [&] {
    Eigen::VectorXd dir(m);
    if (extremes.size() >= 2 && uni(rng) < 0.5) {
      dir = extremes[pick(rng)] - extremes[pick(rng)];
    } else {
      for (Eigen::Index i = 0; i < m; ++i) dir(i) = gauss(rng);
    }
    const double norm = dir.norm();
    if (norm < 1e-12) return;
    dir /= norm;
    double tmin = -std::numeric_limits<double>::infinity();
    double tmax = std::numeric_limits<double>::infinity();
    const Eigen::VectorXd rate = cons_.C * dir;
    const Eigen::VectorXd slack = (cons_.d - cons_.C * x).cwiseMax(0.0);
    for (Eigen::Index r = 0; r < rate.size(); ++r) {
      if (rate(r) > 1e-12)
        tmax = std::min(tmax, slack(r) / rate(r));
      else if (rate(r) < -1e-12)
        tmin = std::max(tmin, slack(r) / rate(r));
    }
    if (!std::isfinite(tmin)) tmin = -1.0;
    if (!std::isfinite(tmax)) tmax = 1.0;
    if (tmax <= tmin) return;
    x += (tmin + (tmax - tmin) * uni(rng)) * dir;
  };

  while (out.size() < k) {
    for (int s = 0; s < kHitAndRunSteps; ++s) step();
    out.push_back(x);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Star

Interval interval_bound(double c, const Eigen::Ref<const Eigen::RowVectorXd>& v,
                        const std::vector<Interval>& bounds) {
  Interval out{c, c};
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    const double a = v(j);
    if (a == 0.0) continue;
    const auto& b = bounds[static_cast<std::size_t>(j)];
    const double x = a * b.lo;
    const double y = a * b.hi;
    out.lo += std::min(x, y);
    out.hi += std::max(x, y);
  }
  return out;
}

Star::Star(Eigen::VectorXd center, Eigen::MatrixXd basis, PredicatePtr predicate)
    : center_(std::move(center)), basis_(std::move(basis)), predicate_(std::move(predicate)) {
  if (!predicate_) throw DimensionMismatch("star requires a predicate");
  if (center_.size() < 1) throw DimensionMismatch("star dimension must be at least 1");
  if (basis_.rows() != center_.size())
    throw DimensionMismatch("basis has " + std::to_string(basis_.rows()) + " rows, center has " +
                            std::to_string(center_.size()));
  if (basis_.cols() != predicate_->num_vars())
    throw DimensionMismatch("basis has " + std::to_string(basis_.cols()) + " generators, predicate has " +
                            std::to_string(predicate_->num_vars()) + " variables");
}

Star Star::from_polyhedron(const Eigen::MatrixXd& C, const Eigen::VectorXd& d, Eigen::Index n) {
  if (C.cols() != n)
    throw DimensionMismatch("polyhedron has " + std::to_string(C.cols()) + " columns, expected " + std::to_string(n));
  return Star(Eigen::VectorXd::Zero(n), Eigen::MatrixXd::Identity(n, n), Predicate::make(LinearConstraints(C, d)));
}

Star Star::affine_map(const Eigen::MatrixXd& W, const Eigen::VectorXd& b) const {
  if (W.cols() != dim())
    throw DimensionMismatch("map has " + std::to_string(W.cols()) + " columns, star dimension is " +
                            std::to_string(dim()));
  if (b.size() != W.rows()) throw DimensionMismatch("offset length does not match map rows");
  return Star(W * center_ + b, W * basis_, predicate_);
}

Star Star::intersect_halfspace(const Eigen::MatrixXd& H, const Eigen::VectorXd& g) const {
  if (H.cols() != dim())
    throw DimensionMismatch("half-space has " + std::to_string(H.cols()) + " columns, star dimension is " +
                            std::to_string(dim()));
  if (g.size() != H.rows()) throw DimensionMismatch("half-space offset length does not match rows");
  LinearConstraints cons = constraints();
  cons.append(LinearConstraints(H * basis_, g - H * center_));
  return Star(center_, basis_, Predicate::make(std::move(cons)));
}

bool Star::is_empty() const { return !predicate_->feasible(); }

Interval Star::exact_range(Eigen::Index i) const {
  if (i < 0 || i >= dim()) throw DimensionMismatch("coordinate index out of range");
  if (num_vars() == 0) {
    if (is_empty()) throw EmptySet("exact range of an empty star");
    return {center_(i), center_(i)};
  }
  const Eigen::VectorXd row = basis_.row(i).transpose();
  const LPOutcome lo = minimize(row, constraints());
  if (lo.status == LPStatus::Infeasible) throw EmptySet("exact range of an empty star");
  const LPOutcome hi = maximize(row, constraints());
  const double inf = std::numeric_limits<double>::infinity();
  return {lo.optimal() ? center_(i) + lo.value : -inf, hi.optimal() ? center_(i) + hi.value : inf};
}

Interval Star::estimate_range(Eigen::Index i) const {
  if (i < 0 || i >= dim()) throw DimensionMismatch("coordinate index out of range");
  return interval_bound(center_(i), basis_.row(i), predicate_->bounds());
}

bool Star::contains(const Eigen::VectorXd& x, double tol) const {
  if (x.size() != dim()) throw DimensionMismatch("point dimension does not match star");
  const Eigen::Index m = num_vars();
  const Eigen::VectorXd diff = x - center_;

  // Coordinates with an all-zero generator row are fixed; check them directly
  // and keep the rest for the LP.
  std::vector<Eigen::Index> free_rows;
  for (Eigen::Index i = 0; i < dim(); ++i) {
    const double slack = tol * (1.0 + std::abs(x(i)));
    if (m == 0 || basis_.row(i).cwiseAbs().maxCoeff() == 0.0) {
      if (std::abs(diff(i)) > slack) return false;
    } else {
      free_rows.push_back(i);
    }
  }
  if (free_rows.empty()) return predicate_->feasible();

  LinearConstraints cons = constraints();
  const auto q = static_cast<Eigen::Index>(free_rows.size());
  LinearConstraints eq;
  eq.C.resize(2 * q, m);
  eq.d.resize(2 * q);
  for (Eigen::Index r = 0; r < q; ++r) {
    const Eigen::Index i = free_rows[static_cast<std::size_t>(r)];
    const double slack = tol * (1.0 + std::abs(x(i)));
    eq.C.row(2 * r) = basis_.row(i);
    eq.d(2 * r) = diff(i) + slack;
    eq.C.row(2 * r + 1) = -basis_.row(i);
    eq.d(2 * r + 1) = -diff(i) + slack;
  }
  cons.append(eq);
  return is_feasible(cons);
}

std::vector<Eigen::VectorXd> Star::sample(std::size_t k, std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  std::vector<Eigen::VectorXd> out;
  out.reserve(k);
  for (const auto& alpha : predicate_->sample(k, rng)) out.push_back(point(alpha));
  return out;
}

}  // namespace imagestar
