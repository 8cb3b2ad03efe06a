#pragma once

#include <array>
#include <cstddef>
#include <limits>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "imagestar/image.hpp"
#include "imagestar/image_star.hpp"

namespace imagestar {

struct Padding {
  std::size_t top = 0;
  std::size_t bottom = 0;
  std::size_t left = 0;
  std::size_t right = 0;
  friend bool operator==(const Padding&, const Padding&) = default;
};

using Pair = std::array<std::size_t, 2>;

/// Filter weights indexed (row, col, in_channel, filter).
struct FilterBank {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;
  std::size_t filters = 0;
  std::vector<double> data;

  FilterBank() = default;
  FilterBank(std::size_t h, std::size_t w, std::size_t nc, std::size_t nf, double fill = 0.0)
      : height(h), width(w), channels(nc), filters(nf), data(h * w * nc * nf, fill) {}

  double& at(std::size_t r, std::size_t c, std::size_t k, std::size_t f) {
    return data[((r * width + c) * channels + k) * filters + f];
  }
  [[nodiscard]] double at(std::size_t r, std::size_t c, std::size_t k, std::size_t f) const {
    return data[((r * width + c) * channels + k) * filters + f];
  }
  friend bool operator==(const FilterBank&, const FilterBank&) = default;
};

struct Conv2dLayer {
  FilterBank weights;
  std::vector<double> bias;  // one per filter
  Padding padding;
  Pair stride{1, 1};
  Pair dilation{1, 1};
};

struct AvgPoolLayer {
  Pair pool_size{2, 2};
  Padding padding;
  Pair stride{2, 2};
};

struct FCLayer {
  Eigen::MatrixXd weights;  // n_fc x m_fc
  Eigen::VectorXd bias;     // n_fc
};

struct BatchNormLayer {
  std::vector<double> mean;
  std::vector<double> variance;
  double epsilon = 1e-5;
  std::vector<double> scale;
  std::vector<double> offset;
};

struct MaxPoolLayer {
  Pair pool_size{2, 2};
  Padding padding;
  Pair stride{2, 2};
};

struct ReLULayer {};

using Layer = std::variant<Conv2dLayer, AvgPoolLayer, FCLayer, BatchNormLayer, MaxPoolLayer, ReLULayer>;

enum class Scheme { Exact, Approx };

/// Short type tag used in files and messages: conv2d, avgpool, fc, batchnorm, maxpool, relu.
const char* layer_kind(const Layer& layer);

/// Output geometry for a given input; throws ShapeError on incompatible layers.
Shape output_shape(const Layer& layer, const Shape& in);

/// Concrete forward pass of a single layer.
Image eval_layer(const Layer& layer, const Image& x);

// Closed-form layers: the predicate is carried over unchanged.
ImageStar reach_conv2d(const Conv2dLayer& layer, const ImageStar& in);
ImageStar reach_avgpool(const AvgPoolLayer& layer, const ImageStar& in);
ImageStar reach_fc(const FCLayer& layer, const ImageStar& in);
ImageStar reach_batchnorm(const BatchNormLayer& layer, const ImageStar& in);

/// Zero-pads the anchor and every generator.
ImageStar zero_pad(const ImageStar& in, const Padding& padding);

constexpr std::size_t kNoBudget = std::numeric_limits<std::size_t>::max();

/// Exact max pooling: regions with several max-point candidates split the set,
/// one branch per candidate; infeasible branches are dropped.
std::vector<ImageStar> reach_maxpool_exact(const MaxPoolLayer& layer, const ImageStar& in,
                                           std::size_t budget = kNoBudget);

/// Over-approximate max pooling: every multi-candidate region gets a fresh
/// predicate variable bounded below by each candidate and above by the
/// regional upper bound.
ImageStar reach_maxpool_approx(const MaxPoolLayer& layer, const ImageStar& in);

/// One exact ReLU step on a flat pixel index. Returns 0, 1 or 2 stars.
std::vector<ImageStar> step_relu(const ImageStar& in, std::size_t pixel);

/// Exact ReLU: step_relu folded over every pixel that can change sign.
std::vector<ImageStar> reach_relu_exact(const ImageStar& in, std::size_t budget = kNoBudget);

/// Triangle relaxation: one new variable and three constraints per splitting pixel.
ImageStar reach_relu_approx(const ImageStar& in);

/// Dispatches to the per-kind reach function. Empty branches are omitted.
std::vector<ImageStar> reach_layer(const Layer& layer, const ImageStar& in, Scheme scheme,
                                   std::size_t budget = kNoBudget);

}  // namespace imagestar
