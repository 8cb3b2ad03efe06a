#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace imagestar {

/// Image geometry: height x width x channels.
struct Shape {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;

  [[nodiscard]] std::size_t size() const { return height * width * channels; }
  [[nodiscard]] std::string str() const;
  friend bool operator==(const Shape&, const Shape&) = default;
};

/// Zero-based (row, col, channel) position.
struct PixelIndex {
  std::size_t row = 0;
  std::size_t col = 0;
  std::size_t channel = 0;
  friend bool operator==(const PixelIndex&, const PixelIndex&) = default;
};

/// Canonical flattening: row-major over (row, col), channels contiguous
/// within a pixel. Every flat vector in the library uses this order.
inline std::size_t flat_index(const Shape& s, std::size_t row, std::size_t col, std::size_t ch) {
  return (row * s.width + col) * s.channels + ch;
}

inline std::size_t flat_index(const Shape& s, const PixelIndex& p) {
  return flat_index(s, p.row, p.col, p.channel);
}

PixelIndex unflatten(const Shape& s, std::size_t flat);

/// Dense multi-channel image of doubles.
class Image {
 public:
  Image() = default;
  explicit Image(Shape shape, double fill = 0.0);
  Image(Shape shape, std::vector<double> data);
  Image(Shape shape, const Eigen::Ref<const Eigen::VectorXd>& flat);

  [[nodiscard]] const Shape& shape() const { return shape_; }
  [[nodiscard]] std::size_t size() const { return data_.size(); }

  double& at(std::size_t row, std::size_t col, std::size_t ch) { return data_[flat_index(shape_, row, col, ch)]; }
  [[nodiscard]] double at(std::size_t row, std::size_t col, std::size_t ch) const {
    return data_[flat_index(shape_, row, col, ch)];
  }

  [[nodiscard]] const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  [[nodiscard]] Eigen::VectorXd flatten() const;

  friend bool operator==(const Image&, const Image&) = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

}  // namespace imagestar
