#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "imagestar/layers.hpp"

namespace imagestar {

/// Ordered layer list with validated geometry. Shapes are checked once, at
/// construction; reach and eval rely on that.
class Network {
 public:
  Network(Shape input_shape, std::vector<Layer> layers, std::vector<std::string> labels = {});

  [[nodiscard]] const Shape& input_shape() const { return input_shape_; }
  [[nodiscard]] const Shape& output_shape() const { return shapes_.back(); }
  /// shapes()[i] is the input shape of layer i; shapes().back() is the output.
  [[nodiscard]] const std::vector<Shape>& shapes() const { return shapes_; }
  [[nodiscard]] const std::vector<Layer>& layers() const { return layers_; }
  [[nodiscard]] const std::vector<std::string>& labels() const { return labels_; }
  [[nodiscard]] std::size_t num_outputs() const { return output_shape().size(); }

 private:
  Shape input_shape_;
  std::vector<Layer> layers_;
  std::vector<std::string> labels_;
  std::vector<Shape> shapes_;
};

struct ReachOptions {
  Scheme scheme = Scheme::Exact;
  /// Maximum number of live stars under the exact scheme.
  std::size_t star_budget = 10000;
  /// Worker threads for star-level parallelism; 0 picks hardware concurrency.
  unsigned threads = 0;
};

struct ReachStats {
  /// Number of stars after each layer.
  std::vector<std::size_t> stars_per_layer;
  /// LPs solved during the call (process-wide counter difference).
  std::uint64_t lp_calls = 0;
  double elapsed_seconds = 0.0;
};

struct ReachResult {
  std::vector<ImageStar> output_sets;
  ReachStats stats;
};

/// Layer-by-layer reachability. Under the exact scheme every layer maps each
/// incoming star independently and the results are concatenated in input
/// order, whatever the thread count.
ReachResult reach(const Network& net, const ImageStar& input, const ReachOptions& options = {});

/// Concrete inference; returns the flattened output.
Eigen::VectorXd eval(const Network& net, const Image& x);

/// Concrete inference keeping the output image geometry.
Image eval_image(const Network& net, const Image& x);

}  // namespace imagestar
