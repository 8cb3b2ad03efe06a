#pragma once

#include <cstdint>
#include <vector>

#include "imagestar/image.hpp"
#include "imagestar/star.hpp"

namespace imagestar {

/// A set of images {c + sum_i alpha_i v_i : C alpha <= d} with anchor image c
/// and generator images v_i over one shared predicate.
///
/// Internally the anchor and generators are kept flattened (canonical order,
/// see flat_index) inside a Star, so flattening is free and lossless.
class ImageStar {
 public:
  ImageStar(const Image& anchor, const std::vector<Image>& generators, PredicatePtr predicate);
  ImageStar(Shape shape, Star star);

  /// Anchor plus one generator per predicate variable, lb <= alpha <= ub.
  static ImageStar box(const Image& anchor, const std::vector<Image>& generators, const Eigen::VectorXd& lb,
                       const Eigen::VectorXd& ub);
  /// The singleton {image}.
  static ImageStar singleton(const Image& image);

  static ImageStar from_star(Star star, Shape shape) { return {shape, std::move(star)}; }
  [[nodiscard]] const Star& to_star() const { return star_; }

  [[nodiscard]] const Shape& shape() const { return shape_; }
  [[nodiscard]] Eigen::Index num_vars() const { return star_.num_vars(); }
  [[nodiscard]] Eigen::Index num_pixels() const { return star_.dim(); }
  [[nodiscard]] const PredicatePtr& predicate() const { return star_.predicate(); }
  [[nodiscard]] const LinearConstraints& constraints() const { return star_.constraints(); }

  /// Flattened anchor and generator matrix (one column per generator).
  [[nodiscard]] const Eigen::VectorXd& center() const { return star_.center(); }
  [[nodiscard]] const Eigen::MatrixXd& basis() const { return star_.basis(); }

  [[nodiscard]] Image anchor() const { return {shape_, star_.center()}; }
  [[nodiscard]] Image generator(Eigen::Index i) const;

  [[nodiscard]] bool is_empty() const { return star_.is_empty(); }

  /// c' = gamma c + beta, V' = gamma V, predicate unchanged.
  [[nodiscard]] ImageStar affine_scale(double gamma, double beta) const;
  [[nodiscard]] ImageStar affine_scale(double gamma, const Image& offset) const;
  /// Per-channel scale and offset; both vectors must have one entry per channel.
  [[nodiscard]] ImageStar affine_scale(const std::vector<double>& gamma, const std::vector<double>& beta) const;

  [[nodiscard]] Interval pixel_exact_range(const PixelIndex& p) const;
  [[nodiscard]] Interval pixel_estimate_range(const PixelIndex& p) const;

  /// Positions in the pool_h x pool_w region starting at (row, col) of
  /// channel `channel` that attain the regional maximum for some feasible
  /// alpha. Estimated ranges prune first; survivors are confirmed by LP.
  /// Positions whose value expressions are identical are reported once.
  [[nodiscard]] std::vector<PixelIndex> get_local_max_index(std::size_t row, std::size_t col, std::size_t pool_h,
                                                            std::size_t pool_w, std::size_t channel) const;

  [[nodiscard]] bool contains_image(const Image& x, double tol = NumericConfig::membership_tol) const;

  [[nodiscard]] std::vector<Image> sample(std::size_t k, std::uint64_t seed) const;

  /// Image at a given predicate assignment.
  [[nodiscard]] Image image_at(const Eigen::VectorXd& alpha) const { return {shape_, star_.point(alpha)}; }

 private:
  Shape shape_;
  Star star_;
};

}  // namespace imagestar
