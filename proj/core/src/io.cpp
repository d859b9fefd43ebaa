#include "confsplat/io.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <memory>
#include <nlohmann/json.hpp>
#include <sstream>

#include "confsplat/errors.hpp"

namespace confsplat {
namespace {

static_assert(std::endian::native == std::endian::little, "raw depth I/O assumes little endian");

using nlohmann::json;

void ensure_parent(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
}

json read_json(const std::filesystem::path& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw IoError("json: cannot parse " + path.string() + ": " + e.what());
  }
}

template <int R, int C>
Eigen::Matrix<double, R, C> matrix_from(const json& j, const char* key,
                                        const std::filesystem::path& path) {
  if (!j.contains(key) || !j[key].is_array() || j[key].size() != R * C) {
    throw IoError(std::string("camera: '") + key + "' must be an array of " +
                  std::to_string(R * C) + " numbers in " + path.string());
  }
  Eigen::Matrix<double, R, C> m;
  for (int r = 0; r < R; ++r) {
    for (int c = 0; c < C; ++c) m(r, c) = j[key][r * C + c].get<double>();
  }
  return m;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  ensure_parent(path);
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw IoError("cannot write " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_raw_depth(const std::filesystem::path& path, const Raster& raster) {
  if (raster.channels() != 1) {
    throw DimensionMismatch("raw depth: raster must have one channel");
  }
  ensure_parent(path);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("raw depth: cannot write " + path.string());
  const std::uint32_t size[2] = {static_cast<std::uint32_t>(raster.width()),
                                 static_cast<std::uint32_t>(raster.height())};
  out.write("CDG1", 4);
  out.write(reinterpret_cast<const char*>(size), sizeof(size));
  std::vector<float> payload(raster.pixel_count());
  for (std::size_t p = 0; p < payload.size(); ++p) {
    payload[p] = raster.valid(p) ? static_cast<float>(raster.data()[p]) : 0.0f;
  }
  out.write(reinterpret_cast<const char*>(payload.data()),
            static_cast<std::streamsize>(payload.size() * sizeof(float)));
  std::vector<char> mask(raster.pixel_count());
  for (std::size_t p = 0; p < mask.size(); ++p) mask[p] = raster.valid(p) ? 1 : 0;
  out.write(mask.data(), static_cast<std::streamsize>(mask.size()));
  if (!out) throw IoError("raw depth: write failed for " + path.string());
}

Raster read_raw_depth(const std::filesystem::path& path) {
  const std::string bytes = read_text(path);
  if (bytes.size() < 12 || bytes.compare(0, 4, "CDG1") != 0) {
    throw IoError("raw depth: bad magic in " + path.string());
  }
  std::uint32_t size[2];
  std::memcpy(size, bytes.data() + 4, sizeof(size));
  const std::uint64_t n = static_cast<std::uint64_t>(size[0]) * size[1];
  if (size[0] == 0 || size[1] == 0 || bytes.size() != 12 + 5 * n) {
    throw IoError("raw depth: size mismatch in " + path.string());
  }
  Raster out(static_cast<int>(size[0]), static_cast<int>(size[1]), 1);
  const char* payload = bytes.data() + 12;
  const char* mask = payload + 4 * n;
  for (std::size_t p = 0; p < n; ++p) {
    float v;
    std::memcpy(&v, payload + 4 * p, sizeof(float));
    if (mask[p] != 0 && mask[p] != 1) {
      throw IoError("raw depth: validity byte not 0/1 in " + path.string());
    }
    out.data()[p] = v;
    out.mask()[p] = static_cast<std::uint8_t>(mask[p]);
  }
  return out;
}

void write_png(const std::filesystem::path& path, const Raster& image) {
  if (image.channels() != 1 && image.channels() != 3) {
    throw DimensionMismatch("png: raster must have 1 or 3 channels");
  }
  ensure_parent(path);
  std::unique_ptr<FILE, int (*)(FILE*)> fp(std::fopen(path.c_str(), "wb"), std::fclose);
  if (!fp) throw IoError("png: cannot write " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw IoError("png: libpng initialization failed");
  }
  std::vector<png_byte> row(static_cast<std::size_t>(image.width()) * image.channels());
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("png: encoding failed for " + path.string());
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, image.width(), image.height(), 8,
               image.channels() == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      for (int c = 0; c < image.channels(); ++c) {
        const double v = std::clamp(image.at(x, y, c), 0.0, 1.0);
        row[static_cast<std::size_t>(x) * image.channels() + c] =
            static_cast<png_byte>(std::lround(v * 255.0));
      }
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

Raster read_png(const std::filesystem::path& path) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.c_str())) {
    throw IoError("png: cannot read " + path.string() + ": " + img.message);
  }
  img.format = PNG_FORMAT_RGB;
  std::vector<png_byte> buf(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, buf.data(), 0, nullptr)) {
    png_image_free(&img);
    throw IoError("png: decoding failed for " + path.string() + ": " + img.message);
  }
  Raster out(static_cast<int>(img.width), static_cast<int>(img.height), 3);
  for (std::size_t i = 0; i < buf.size(); ++i) out.data()[i] = buf[i] / 255.0;
  return out;
}

void write_camera(const std::filesystem::path& path, const Camera& camera) {
  json j;
  std::vector<double> k, r, t;
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      k.push_back(camera.K(a, b));
      r.push_back(camera.R(a, b));
    }
    t.push_back(camera.T[a]);
  }
  j["K"] = k;
  j["R"] = r;
  j["T"] = t;
  j["width"] = camera.width;
  j["height"] = camera.height;
  write_text(path, j.dump(2) + "\n");
}

Camera read_camera(const std::filesystem::path& path) {
  const json j = read_json(path);
  Camera cam;
  try {
    cam.K = matrix_from<3, 3>(j, "K", path);
    cam.R = matrix_from<3, 3>(j, "R", path);
    cam.T = matrix_from<3, 1>(j, "T", path);
    cam.width = j.at("width").get<int>();
    cam.height = j.at("height").get<int>();
  } catch (const json::exception& e) {
    throw IoError("camera: malformed " + path.string() + ": " + e.what());
  }
  cam.validate();
  return cam;
}

void write_alignment_sidecar(const std::filesystem::path& path, const AlignmentResult& result) {
  json j;
  j["scale"] = result.scale;
  j["shift"] = result.shift;
  j["alignment_loss"] = result.alignment_loss;
  j["valid_count"] = result.valid_count;
  j["pruned_count"] = result.pruned_count;
  j["steps"] = result.steps;
  write_text(path, j.dump(2) + "\n");
}

AlignmentResult read_alignment_sidecar(const std::filesystem::path& path) {
  const json j = read_json(path);
  AlignmentResult r;
  try {
    r.scale = j.at("scale").get<double>();
    r.shift = j.at("shift").get<double>();
    r.alignment_loss = j.at("alignment_loss").get<double>();
    r.valid_count = j.at("valid_count").get<std::size_t>();
    r.pruned_count = j.value("pruned_count", std::size_t{0});
    r.steps = j.value("steps", 0);
  } catch (const json::exception& e) {
    throw IoError("alignment sidecar: malformed " + path.string() + ": " + e.what());
  }
  return r;
}

std::string format_csv(const CsvTable& table) {
  std::string text;
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    text += (i ? "," : "") + table.header[i];
  }
  text += '\n';
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size()) {
      throw DimensionMismatch("csv: row width does not match header");
    }
    for (std::size_t i = 0; i < row.size(); ++i) {
      text += (i ? "," : "") + format_double(row[i]);
    }
    text += '\n';
  }
  return text;
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
  write_text(path, format_csv(table));
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::istringstream in(read_text(path));
  CsvTable table;
  std::string line;
  const auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(s);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    return cells;
  };
  if (!std::getline(in, line)) throw IoError("csv: empty file " + path.string());
  table.header = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    for (const std::string& cell : split(line)) {
      if (cell == "nan") {
        row.push_back(std::numeric_limits<double>::quiet_NaN());
      } else if (cell == "inf" || cell == "-inf") {
        row.push_back(cell[0] == '-' ? -std::numeric_limits<double>::infinity()
                                     : std::numeric_limits<double>::infinity());
      } else {
        double v = 0.0;
        const auto r = std::from_chars(cell.data(), cell.data() + cell.size(), v);
        if (r.ec != std::errc() || r.ptr != cell.data() + cell.size()) {
          throw IoError("csv: malformed number '" + cell + "' in " + path.string());
        }
        row.push_back(v);
      }
    }
    if (row.size() != table.header.size()) {
      throw IoError("csv: ragged row in " + path.string());
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace confsplat
