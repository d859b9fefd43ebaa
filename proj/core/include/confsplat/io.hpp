#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "confsplat/depth_align.hpp"
#include "confsplat/geometry.hpp"
#include "confsplat/raster.hpp"

namespace confsplat {

/// Single-channel raster as "CDG1", u32 width, u32 height (little endian), float32
/// payload and one validity byte per pixel. Values are rounded to float32.
void write_raw_depth(const std::filesystem::path& path, const Raster& raster);
Raster read_raw_depth(const std::filesystem::path& path);

/// 8-bit RGB (3 channels) or grayscale (1 channel) PNG; values in [0, 1] are
/// clamped and rounded. Reading always yields a valid 3-channel raster.
void write_png(const std::filesystem::path& path, const Raster& image);
Raster read_png(const std::filesystem::path& path);

/// {"K": [9], "R": [9], "T": [3], "width": w, "height": h}, matrices row-major.
void write_camera(const std::filesystem::path& path, const Camera& camera);
Camera read_camera(const std::filesystem::path& path);

/// {"scale", "shift", "alignment_loss", "valid_count", "pruned_count", "steps"}.
void write_alignment_sidecar(const std::filesystem::path& path, const AlignmentResult& result);
AlignmentResult read_alignment_sidecar(const std::filesystem::path& path);

/// Writes `text` to `path`, creating parent directories.
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

/// Comma-separated table with a header row. Numbers use the shortest exact form.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};
std::string format_csv(const CsvTable& table);
void write_csv(const std::filesystem::path& path, const CsvTable& table);
CsvTable read_csv(const std::filesystem::path& path);

/// Shortest decimal form that parses back to the same double ("inf"/"nan" otherwise).
std::string format_double(double v);

}  // namespace confsplat
