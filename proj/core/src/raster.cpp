#include "confsplat/raster.hpp"

#include <algorithm>
#include <string>

#include "confsplat/errors.hpp"

namespace confsplat {

Raster::Raster(int width, int height, int channels, double fill, bool valid)
    : width_(width), height_(height), channels_(channels) {
  if (width < 0 || height < 0) {
    throw InvalidParameter("raster: negative size");
  }
  if (channels != 1 && channels != 3) {
    throw InvalidParameter("raster: channels must be 1 or 3, got " + std::to_string(channels));
  }
  data_.assign(pixel_count() * channels_, valid ? fill : 0.0);
  mask_.assign(pixel_count(), valid ? 1 : 0);
}

void Raster::invalidate(int x, int y) { invalidate(pixel(x, y)); }

void Raster::invalidate(std::size_t p) {
  mask_[p] = 0;
  std::fill_n(data_.begin() + static_cast<std::ptrdiff_t>(p * channels_), channels_, 0.0);
}

std::size_t Raster::valid_count() const {
  return static_cast<std::size_t>(std::count(mask_.begin(), mask_.end(), std::uint8_t{1}));
}

void Raster::require_same_size(const Raster& other, std::string_view what) const {
  if (!same_size(other)) {
    throw DimensionMismatch(std::string(what) + ": raster sizes differ (" +
                            std::to_string(width_) + "x" + std::to_string(height_) + " vs " +
                            std::to_string(other.width_) + "x" + std::to_string(other.height_) +
                            ")");
  }
}

void Raster::require_same_shape(const Raster& other, std::string_view what) const {
  require_same_size(other, what);
  if (channels_ != other.channels_) {
    throw DimensionMismatch(std::string(what) + ": channel counts differ");
  }
}

Raster Raster::luma() const {
  if (channels_ == 1) {
    return *this;
  }
  Raster out(width_, height_, 1);
  for (std::size_t p = 0; p < pixel_count(); ++p) {
    const double* px = &data_[p * 3];
    out.data_[p] = 0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2];
    out.mask_[p] = mask_[p];
  }
  return out;
}

}  // namespace confsplat
