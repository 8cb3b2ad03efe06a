#include "imagestar/image_star.hpp"

#include <algorithm>
#include <limits>

namespace imagestar {

namespace {

Star build_star(const Image& anchor, const std::vector<Image>& generators, PredicatePtr predicate) {
  const auto n = static_cast<Eigen::Index>(anchor.size());
  Eigen::MatrixXd basis(n, static_cast<Eigen::Index>(generators.size()));
  for (std::size_t i = 0; i < generators.size(); ++i) {
    if (generators[i].shape() != anchor.shape())
      throw ShapeError("generator " + std::to_string(i) + " has shape " + generators[i].shape().str() +
                       ", anchor has " + anchor.shape().str());
    basis.col(static_cast<Eigen::Index>(i)) = generators[i].flatten();
  }
  return {anchor.flatten(), std::move(basis), std::move(predicate)};
}

}  // namespace

ImageStar::ImageStar(const Image& anchor, const std::vector<Image>& generators, PredicatePtr predicate)
    : shape_(anchor.shape()), star_(build_star(anchor, generators, std::move(predicate))) {}

ImageStar::ImageStar(Shape shape, Star star) : shape_(shape), star_(std::move(star)) {
  if (static_cast<std::size_t>(star_.dim()) != shape_.size())
    throw ShapeError("star of dimension " + std::to_string(star_.dim()) + " cannot be viewed as " + shape_.str());
}

ImageStar ImageStar::box(const Image& anchor, const std::vector<Image>& generators, const Eigen::VectorXd& lb,
                         const Eigen::VectorXd& ub) {
  return {anchor, generators, Predicate::box(lb, ub)};
}

ImageStar ImageStar::singleton(const Image& image) {
  return {image, {}, Predicate::box(Eigen::VectorXd(0), Eigen::VectorXd(0))};
}

Image ImageStar::generator(Eigen::Index i) const {
  if (i < 0 || i >= num_vars()) throw DimensionMismatch("generator index out of range");
  return {shape_, basis().col(i)};
}

ImageStar ImageStar::affine_scale(double gamma, double beta) const {
  Eigen::VectorXd c = gamma * center();
  c.array() += beta;
  return {shape_, Star(std::move(c), gamma * basis(), predicate())};
}

ImageStar ImageStar::affine_scale(double gamma, const Image& offset) const {
  if (offset.shape() != shape_)
    throw DimensionMismatch("offset image " + offset.shape().str() + " does not match " + shape_.str());
  return {shape_, Star(gamma * center() + offset.flatten(), gamma * basis(), predicate())};
}

ImageStar ImageStar::affine_scale(const std::vector<double>& gamma, const std::vector<double>& beta) const {
  if (gamma.size() != shape_.channels || beta.size() != shape_.channels)
    throw DimensionMismatch("per-channel scale/offset need " + std::to_string(shape_.channels) + " entries");
  Eigen::VectorXd c = center();
  Eigen::MatrixXd v = basis();
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    const std::size_t ch = static_cast<std::size_t>(i) % shape_.channels;
    c(i) = gamma[ch] * c(i) + beta[ch];
    v.row(i) *= gamma[ch];
  }
  return {shape_, Star(std::move(c), std::move(v), predicate())};
}

Interval ImageStar::pixel_exact_range(const PixelIndex& p) const {
  return star_.exact_range(static_cast<Eigen::Index>(flat_index(shape_, p)));
}

Interval ImageStar::pixel_estimate_range(const PixelIndex& p) const {
  return star_.estimate_range(static_cast<Eigen::Index>(flat_index(shape_, p)));
}

std::vector<PixelIndex> ImageStar::get_local_max_index(std::size_t row, std::size_t col, std::size_t pool_h,
                                                       std::size_t pool_w, std::size_t channel) const {
  if (pool_h == 0 || pool_w == 0 || row + pool_h > shape_.height || col + pool_w > shape_.width ||
      channel >= shape_.channels)
    throw ShapeError("pooling region outside image " + shape_.str());

  const auto& bounds = predicate()->bounds();  // throws EmptySet
  struct Entry {
    PixelIndex pos;
    Eigen::Index flat;
    Interval est;
  };
  std::vector<Entry> region;
  double max_lb = -std::numeric_limits<double>::infinity();
  for (std::size_t r = row; r < row + pool_h; ++r) {
    for (std::size_t c = col; c < col + pool_w; ++c) {
      const auto flat = static_cast<Eigen::Index>(flat_index(shape_, r, c, channel));
      const Interval est = interval_bound(center()(flat), basis().row(flat), bounds);
      region.push_back({{r, c, channel}, flat, est});
      max_lb = std::max(max_lb, est.lo);
    }
  }

  // Phase 1: discard positions whose estimated upper bound is strictly below
  // the best estimated lower bound, and collapse identical value expressions.
  std::vector<Entry> survivors;
  for (const auto& e : region) {
    if (e.est.hi < max_lb) continue;
    const bool duplicate = std::any_of(survivors.begin(), survivors.end(), [&](const Entry& s) {
      return center()(s.flat) == center()(e.flat) && basis().row(s.flat) == basis().row(e.flat);
    });
    if (!duplicate) survivors.push_back(e);
  }
  if (survivors.size() <= 1) {
    std::vector<PixelIndex> out;
    for (const auto& s : survivors) out.push_back(s.pos);
    return out;
  }

  // Phase 2: q is a candidate iff value(q) >= value(r) for all survivors r is feasible.
  std::vector<PixelIndex> out;
  for (const auto& q : survivors) {
    LinearConstraints cons = constraints();
    for (const auto& r : survivors) {
      if (r.flat == q.flat) continue;
      cons.append_row(basis().row(r.flat) - basis().row(q.flat), center()(q.flat) - center()(r.flat));
    }
    if (is_feasible(cons)) out.push_back(q.pos);
  }
  if (out.empty()) {
    // Only reachable through LP round-off; keeping every survivor stays sound.
    for (const auto& s : survivors) out.push_back(s.pos);
  }
  return out;
}

bool ImageStar::contains_image(const Image& x, double tol) const {
  if (x.shape() != shape_) throw DimensionMismatch("image " + x.shape().str() + " does not match " + shape_.str());
  return star_.contains(x.flatten(), tol);
}

std::vector<Image> ImageStar::sample(std::size_t k, std::uint64_t seed) const {
  std::vector<Image> out;
  out.reserve(k);
  for (const auto& v : star_.sample(k, seed)) out.emplace_back(shape_, v);
  return out;
}

}  // namespace imagestar
