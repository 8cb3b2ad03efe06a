#include "imagestar/image.hpp"

#include "imagestar/numeric.hpp"

namespace imagestar {

std::string Shape::str() const {
  return std::to_string(height) + "x" + std::to_string(width) + "x" + std::to_string(channels);
}

PixelIndex unflatten(const Shape& s, std::size_t flat) {
  const std::size_t ch = flat % s.channels;
  const std::size_t pix = flat / s.channels;
  return {pix / s.width, pix % s.width, ch};
}

Image::Image(Shape shape, double fill) : shape_(shape), data_(shape.size(), fill) {}

Image::Image(Shape shape, std::vector<double> data) : shape_(shape), data_(std::move(data)) {
  if (data_.size() != shape_.size())
    throw ShapeError("image " + shape_.str() + " needs " + std::to_string(shape_.size()) + " values, got " +
                     std::to_string(data_.size()));
}

Image::Image(Shape shape, const Eigen::Ref<const Eigen::VectorXd>& flat)
    : shape_(shape), data_(flat.data(), flat.data() + flat.size()) {
  if (data_.size() != shape_.size())
    throw ShapeError("image " + shape_.str() + " needs " + std::to_string(shape_.size()) + " values, got " +
                     std::to_string(data_.size()));
}

Eigen::VectorXd Image::flatten() const {
  return Eigen::Map<const Eigen::VectorXd>(data_.data(), static_cast<Eigen::Index>(data_.size()));
}

}  // namespace imagestar
