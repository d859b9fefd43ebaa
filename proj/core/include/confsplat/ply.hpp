#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "confsplat/geometry.hpp"
#include "confsplat/metrics.hpp"

namespace confsplat {

enum class PlyFormat { kAscii, kBinaryLittleEndian };

enum class PlyType { kInt8, kUint8, kInt16, kUint16, kInt32, kUint32, kFloat32, kFloat64 };

struct PlyProperty {
  std::string name;
  PlyType type = PlyType::kFloat32;
};

/// One element block with scalar properties. List properties are skipped on read.
struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<PlyProperty> properties;
  std::vector<double> values;  // count x properties, row-major

  /// Index of property `name`, or -1.
  int find(const std::string& property) const;
  double at(std::size_t row, int property) const { return values[row * properties.size() + property]; }
};

struct PlyFile {
  PlyFormat format = PlyFormat::kBinaryLittleEndian;
  std::vector<PlyElement> elements;

  const PlyElement* find(const std::string& element) const;
};

PlyFile read_ply(const std::filesystem::path& path);
void write_ply(const std::filesystem::path& path, const PlyFile& ply);

/// Vertices with x/y/z, optional `reproj_error` and optional red/green/blue.
SparsePointSet read_point_set(const std::filesystem::path& path);
void write_point_set(const std::filesystem::path& path, const SparsePointSet& points,
                     PlyFormat format = PlyFormat::kBinaryLittleEndian);

/// Vertices with x/y/z and optional nx/ny/nz.
PointCloud read_point_cloud(const std::filesystem::path& path);
/// Points plus one float property per vertex (e.g. per-point distances).
void write_point_cloud(const std::filesystem::path& path, const PointCloud& cloud,
                       const std::string& scalar_name = {}, std::span<const double> scalars = {},
                       PlyFormat format = PlyFormat::kBinaryLittleEndian);

/// Gaussians in their stored parameterization as 64-bit properties
/// x y z scale_0..2 (log) rot_0..3 opacity (logit) color_r color_g color_b.
void write_gaussians(const std::filesystem::path& path, std::span<const Gaussian> gaussians,
                     PlyFormat format = PlyFormat::kBinaryLittleEndian);
std::vector<Gaussian> read_gaussians(const std::filesystem::path& path);

}  // namespace confsplat
