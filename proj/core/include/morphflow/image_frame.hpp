#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace morphflow {

/// Row-major W x H grid of signed values in [-1, 1]. Zero is the gray level,
/// so color inversion is plain arithmetic negation.
class ImageFrame {
 public:
  /// Throws Error(invalid_argument) unless width, height >= 1 and fill is in range.
  ImageFrame(int width, int height, double fill = 0.0);

  /// Throws unless values.size() == width * height and every value is in [-1, 1].
  static ImageFrame from_values(int width, int height, std::vector<double> values);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return values_.size(); }

  double at(int x, int y) const { return values_[index(x, y)]; }
  double& at(int x, int y) { return values_[index(x, y)]; }

  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }

  bool same_shape(const ImageFrame& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_;
  }

  bool in_range() const noexcept;

  friend bool operator==(const ImageFrame&, const ImageFrame&) = default;

 private:
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }

  int width_;
  int height_;
  std::vector<double> values_;
};

/// Equality of the IEEE bit patterns (distinguishes -0.0 from +0.0).
bool bitwise_equal(const ImageFrame& a, const ImageFrame& b) noexcept;

}  // namespace morphflow
