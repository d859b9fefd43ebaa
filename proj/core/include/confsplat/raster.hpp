#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace confsplat {

/// Row-major image buffer with 1 or 3 channels and a per-pixel validity mask.
///
/// Values are kept in double precision in memory; files store 32-bit floats or
/// 8-bit channels. Invalid pixels hold 0 in every channel.
class Raster {
 public:
  Raster() = default;
  Raster(int width, int height, int channels = 1, double fill = 0.0, bool valid = true);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  std::size_t pixel_count() const { return static_cast<std::size_t>(width_) * height_; }
  bool empty() const { return pixel_count() == 0; }

  double& at(int x, int y, int c = 0) { return data_[index(x, y, c)]; }
  double at(int x, int y, int c = 0) const { return data_[index(x, y, c)]; }

  bool valid(int x, int y) const { return mask_[pixel(x, y)] != 0; }
  bool valid(std::size_t p) const { return mask_[p] != 0; }
  void set_valid(int x, int y, bool v) { mask_[pixel(x, y)] = v ? 1 : 0; }
  /// Marks the pixel invalid and zeroes all its channels.
  void invalidate(int x, int y);
  void invalidate(std::size_t p);

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  std::span<std::uint8_t> mask() { return mask_; }
  std::span<const std::uint8_t> mask() const { return mask_; }

  std::size_t valid_count() const;
  bool same_size(const Raster& other) const {
    return width_ == other.width_ && height_ == other.height_;
  }
  bool same_shape(const Raster& other) const {
    return same_size(other) && channels_ == other.channels_;
  }

  /// Throws DimensionMismatch naming `what` if width/height differ.
  void require_same_size(const Raster& other, std::string_view what) const;
  void require_same_shape(const Raster& other, std::string_view what) const;

  /// 0.299 R + 0.587 G + 0.114 B for 3-channel rasters, a copy otherwise.
  Raster luma() const;

  bool operator==(const Raster& other) const = default;

 private:
  std::size_t pixel(int x, int y) const {
    return static_cast<std::size_t>(y) * width_ + static_cast<std::size_t>(x);
  }
  std::size_t index(int x, int y, int c) const { return pixel(x, y) * channels_ + c; }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 1;
  std::vector<double> data_;
  std::vector<std::uint8_t> mask_;
};

}  // namespace confsplat
