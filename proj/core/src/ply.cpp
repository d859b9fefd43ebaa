#include "confsplat/ply.hpp"

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "confsplat/errors.hpp"

namespace confsplat {
namespace {

static_assert(std::endian::native == std::endian::little, "binary PLY I/O assumes little endian");

struct TypeInfo {
  const char* name;
  const char* alias;
  PlyType type;
  std::size_t size;
};

constexpr TypeInfo kTypes[] = {
    {"char", "int8", PlyType::kInt8, 1},        {"uchar", "uint8", PlyType::kUint8, 1},
    {"short", "int16", PlyType::kInt16, 2},     {"ushort", "uint16", PlyType::kUint16, 2},
    {"int", "int32", PlyType::kInt32, 4},       {"uint", "uint32", PlyType::kUint32, 4},
    {"float", "float32", PlyType::kFloat32, 4}, {"double", "float64", PlyType::kFloat64, 8},
};

const TypeInfo& info(PlyType t) {
  for (const TypeInfo& i : kTypes) {
    if (i.type == t) return i;
  }
  throw IoError("ply: unknown property type");
}

PlyType parse_type(const std::string& s, const std::filesystem::path& path) {
  for (const TypeInfo& i : kTypes) {
    if (s == i.name || s == i.alias) return i.type;
  }
  throw IoError("ply: unsupported property type '" + s + "' in " + path.string());
}

template <typename T>
T read_raw(std::istream& in) {
  T v;
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  return v;
}

double read_binary(std::istream& in, PlyType t) {
  switch (t) {
    case PlyType::kInt8: return read_raw<std::int8_t>(in);
    case PlyType::kUint8: return read_raw<std::uint8_t>(in);
    case PlyType::kInt16: return read_raw<std::int16_t>(in);
    case PlyType::kUint16: return read_raw<std::uint16_t>(in);
    case PlyType::kInt32: return read_raw<std::int32_t>(in);
    case PlyType::kUint32: return read_raw<std::uint32_t>(in);
    case PlyType::kFloat32: return read_raw<float>(in);
    case PlyType::kFloat64: return read_raw<double>(in);
  }
  return 0.0;
}

template <typename T>
void write_raw(std::ostream& out, double v) {
  const T t = static_cast<T>(v);
  out.write(reinterpret_cast<const char*>(&t), sizeof(T));
}

void write_binary(std::ostream& out, PlyType t, double v) {
  switch (t) {
    case PlyType::kInt8: write_raw<std::int8_t>(out, v); break;
    case PlyType::kUint8: write_raw<std::uint8_t>(out, v); break;
    case PlyType::kInt16: write_raw<std::int16_t>(out, v); break;
    case PlyType::kUint16: write_raw<std::uint16_t>(out, v); break;
    case PlyType::kInt32: write_raw<std::int32_t>(out, v); break;
    case PlyType::kUint32: write_raw<std::uint32_t>(out, v); break;
    case PlyType::kFloat32: write_raw<float>(out, v); break;
    case PlyType::kFloat64: write_raw<double>(out, v); break;
  }
}

// Shortest representation that parses back to the same value of the stored type.
std::string format_ascii(PlyType t, double v) {
  char buf[64];
  std::to_chars_result r;
  if (t == PlyType::kFloat32) {
    r = std::to_chars(buf, buf + sizeof(buf), static_cast<float>(v));
  } else if (t == PlyType::kFloat64) {
    r = std::to_chars(buf, buf + sizeof(buf), v);
  } else {
    r = std::to_chars(buf, buf + sizeof(buf), static_cast<long long>(v));
  }
  return std::string(buf, r.ptr);
}

double parse_ascii(const std::string& token, PlyType t, const std::filesystem::path& path) {
  double v = 0.0;
  const char* end = token.data() + token.size();
  std::from_chars_result r;
  if (t == PlyType::kFloat32) {
    float f = 0.0f;
    r = std::from_chars(token.data(), end, f);
    v = f;
  } else {
    r = std::from_chars(token.data(), end, v);
  }
  if (r.ec != std::errc() || r.ptr != end) {
    throw IoError("ply: malformed value '" + token + "' in " + path.string());
  }
  return v;
}

struct ListSpec {
  PlyType count_type;
  PlyType item_type;
};

// Properties in file order; list properties are read and dropped.
struct RawProperty {
  PlyProperty scalar;
  std::optional<ListSpec> list;
};

}  // namespace

int PlyElement::find(const std::string& property) const {
  for (std::size_t i = 0; i < properties.size(); ++i) {
    if (properties[i].name == property) return static_cast<int>(i);
  }
  return -1;
}

const PlyElement* PlyFile::find(const std::string& element) const {
  for (const PlyElement& e : elements) {
    if (e.name == element) return &e;
  }
  return nullptr;
}

PlyFile read_ply(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("ply: cannot open " + path.string());
  }
  std::string line;
  std::getline(in, line);
  if (line != "ply" && line != "ply\r") {
    throw IoError("ply: missing magic in " + path.string());
  }
  PlyFile ply;
  std::vector<std::vector<RawProperty>> raw;
  bool have_format = false;
  while (true) {
    if (!std::getline(in, line)) {
      throw IoError("ply: truncated header in " + path.string());
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "end_header") break;
    if (key == "comment" || key == "obj_info" || key.empty()) continue;
    if (key == "format") {
      std::string fmt, version;
      ls >> fmt >> version;
      if (fmt == "ascii") {
        ply.format = PlyFormat::kAscii;
      } else if (fmt == "binary_little_endian") {
        ply.format = PlyFormat::kBinaryLittleEndian;
      } else {
        throw IoError("ply: unsupported format '" + fmt + "' in " + path.string());
      }
      have_format = true;
    } else if (key == "element") {
      PlyElement e;
      ls >> e.name >> e.count;
      if (!ls) throw IoError("ply: malformed element line in " + path.string());
      ply.elements.push_back(std::move(e));
      raw.emplace_back();
    } else if (key == "property") {
      if (ply.elements.empty()) {
        throw IoError("ply: property before element in " + path.string());
      }
      std::string type;
      ls >> type;
      RawProperty p;
      if (type == "list") {
        std::string count_type, item_type;
        ls >> count_type >> item_type >> p.scalar.name;
        p.list = ListSpec{parse_type(count_type, path), parse_type(item_type, path)};
      } else {
        p.scalar.type = parse_type(type, path);
        ls >> p.scalar.name;
        ply.elements.back().properties.push_back(p.scalar);
      }
      raw.back().push_back(p);
    } else {
      throw IoError("ply: unknown header keyword '" + key + "' in " + path.string());
    }
  }
  if (!have_format) {
    throw IoError("ply: missing format line in " + path.string());
  }

  for (std::size_t ei = 0; ei < ply.elements.size(); ++ei) {
    PlyElement& e = ply.elements[ei];
    e.values.reserve(e.count * e.properties.size());
    for (std::size_t row = 0; row < e.count; ++row) {
      if (ply.format == PlyFormat::kAscii) {
        if (!std::getline(in, line)) {
          throw IoError("ply: truncated data in " + path.string());
        }
        std::istringstream ls(line);
        std::string tok;
        for (const RawProperty& p : raw[ei]) {
          if (p.list) {
            std::size_t n = 0;
            ls >> n;
            for (std::size_t k = 0; k < n; ++k) ls >> tok;
          } else {
            if (!(ls >> tok)) throw IoError("ply: short data row in " + path.string());
            e.values.push_back(parse_ascii(tok, p.scalar.type, path));
          }
        }
      } else {
        for (const RawProperty& p : raw[ei]) {
          if (p.list) {
            const auto n = static_cast<std::size_t>(read_binary(in, p.list->count_type));
            for (std::size_t k = 0; k < n; ++k) read_binary(in, p.list->item_type);
          } else {
            e.values.push_back(read_binary(in, p.scalar.type));
          }
        }
        if (!in) throw IoError("ply: truncated data in " + path.string());
      }
    }
  }
  return ply;
}

void write_ply(const std::filesystem::path& path, const PlyFile& ply) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("ply: cannot write " + path.string());
  }
  out << "ply\nformat "
      << (ply.format == PlyFormat::kAscii ? "ascii" : "binary_little_endian") << " 1.0\n";
  for (const PlyElement& e : ply.elements) {
    if (e.values.size() != e.count * e.properties.size()) {
      throw DimensionMismatch("ply: element '" + e.name + "' value count does not match");
    }
    out << "element " << e.name << ' ' << e.count << '\n';
    for (const PlyProperty& p : e.properties) {
      out << "property " << info(p.type).name << ' ' << p.name << '\n';
    }
  }
  out << "end_header\n";
  for (const PlyElement& e : ply.elements) {
    const std::size_t np = e.properties.size();
    for (std::size_t row = 0; row < e.count; ++row) {
      for (std::size_t j = 0; j < np; ++j) {
        const double v = e.values[row * np + j];
        if (ply.format == PlyFormat::kAscii) {
          out << (j ? " " : "") << format_ascii(e.properties[j].type, v);
        } else {
          write_binary(out, e.properties[j].type, v);
        }
      }
      if (ply.format == PlyFormat::kAscii) out << '\n';
    }
  }
  if (!out) {
    throw IoError("ply: write failed for " + path.string());
  }
}

namespace {

const PlyElement& vertices(const PlyFile& ply, const std::filesystem::path& path) {
  const PlyElement* v = ply.find("vertex");
  if (!v) throw IoError("ply: no vertex element in " + path.string());
  return *v;
}

int require(const PlyElement& e, const std::string& name, const std::filesystem::path& path) {
  const int i = e.find(name);
  if (i < 0) throw IoError("ply: missing vertex property '" + name + "' in " + path.string());
  return i;
}

std::vector<Vec3> read_xyz(const PlyElement& v, const std::filesystem::path& path) {
  const int x = require(v, "x", path), y = require(v, "y", path), z = require(v, "z", path);
  std::vector<Vec3> pts;
  pts.reserve(v.count);
  for (std::size_t i = 0; i < v.count; ++i) pts.emplace_back(v.at(i, x), v.at(i, y), v.at(i, z));
  return pts;
}

PlyElement vertex_element(std::size_t count, std::vector<PlyProperty> props) {
  PlyElement e;
  e.name = "vertex";
  e.count = count;
  e.properties = std::move(props);
  e.values.reserve(count * e.properties.size());
  return e;
}

}  // namespace

SparsePointSet read_point_set(const std::filesystem::path& path) {
  const PlyFile ply = read_ply(path);
  const PlyElement& v = vertices(ply, path);
  SparsePointSet out;
  out.points = read_xyz(v, path);
  if (const int e = v.find("reproj_error"); e >= 0) {
    out.reproj_error.emplace();
    for (std::size_t i = 0; i < v.count; ++i) out.reproj_error->push_back(v.at(i, e));
  }
  const int r = v.find("red"), g = v.find("green"), b = v.find("blue");
  if (r >= 0 && g >= 0 && b >= 0) {
    const double norm = v.properties[r].type == PlyType::kUint8 ? 255.0 : 1.0;
    out.colors.emplace();
    for (std::size_t i = 0; i < v.count; ++i) {
      out.colors->emplace_back(v.at(i, r) / norm, v.at(i, g) / norm, v.at(i, b) / norm);
    }
  }
  out.validate();
  return out;
}

void write_point_set(const std::filesystem::path& path, const SparsePointSet& points,
                     PlyFormat format) {
  points.validate();
  std::vector<PlyProperty> props = {{"x", PlyType::kFloat64}, {"y", PlyType::kFloat64},
                                    {"z", PlyType::kFloat64}};
  if (points.reproj_error) props.push_back({"reproj_error", PlyType::kFloat32});
  if (points.colors) {
    for (const char* c : {"red", "green", "blue"}) props.push_back({c, PlyType::kFloat32});
  }
  PlyFile ply{format, {vertex_element(points.size(), props)}};
  auto& vals = ply.elements[0].values;
  for (std::size_t i = 0; i < points.size(); ++i) {
    vals.insert(vals.end(), {points.points[i].x(), points.points[i].y(), points.points[i].z()});
    if (points.reproj_error) vals.push_back((*points.reproj_error)[i]);
    if (points.colors) {
      const Vec3& c = (*points.colors)[i];
      vals.insert(vals.end(), {c.x(), c.y(), c.z()});
    }
  }
  write_ply(path, ply);
}

PointCloud read_point_cloud(const std::filesystem::path& path) {
  const PlyFile ply = read_ply(path);
  const PlyElement& v = vertices(ply, path);
  PointCloud out;
  out.points = read_xyz(v, path);
  const int nx = v.find("nx"), ny = v.find("ny"), nz = v.find("nz");
  if (nx >= 0 && ny >= 0 && nz >= 0) {
    out.normals.emplace();
    for (std::size_t i = 0; i < v.count; ++i) {
      out.normals->push_back(Vec3(v.at(i, nx), v.at(i, ny), v.at(i, nz)).normalized());
    }
  }
  return out;
}

void write_point_cloud(const std::filesystem::path& path, const PointCloud& cloud,
                       const std::string& scalar_name, std::span<const double> scalars,
                       PlyFormat format) {
  const bool with_scalar = !scalar_name.empty();
  if (with_scalar && scalars.size() != cloud.size()) {
    throw DimensionMismatch("ply: scalar count does not match point count");
  }
  std::vector<PlyProperty> props = {{"x", PlyType::kFloat64}, {"y", PlyType::kFloat64},
                                    {"z", PlyType::kFloat64}};
  if (cloud.normals) {
    for (const char* n : {"nx", "ny", "nz"}) props.push_back({n, PlyType::kFloat32});
  }
  if (with_scalar) props.push_back({scalar_name, PlyType::kFloat32});
  PlyFile ply{format, {vertex_element(cloud.size(), props)}};
  auto& vals = ply.elements[0].values;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    vals.insert(vals.end(), {cloud.points[i].x(), cloud.points[i].y(), cloud.points[i].z()});
    if (cloud.normals) {
      const Vec3& n = (*cloud.normals)[i];
      vals.insert(vals.end(), {n.x(), n.y(), n.z()});
    }
    if (with_scalar) vals.push_back(scalars[i]);
  }
  write_ply(path, ply);
}

namespace {

constexpr const char* kGaussianProps[] = {
    "x",     "y",     "z",     "scale_0", "scale_1", "scale_2", "rot_0",
    "rot_1", "rot_2", "rot_3", "opacity", "color_r", "color_g", "color_b"};
static_assert(std::size(kGaussianProps) == param::kCount);

}  // namespace

void write_gaussians(const std::filesystem::path& path, std::span<const Gaussian> gaussians,
                     PlyFormat format) {
  std::vector<PlyProperty> props;
  for (const char* name : kGaussianProps) props.push_back({name, PlyType::kFloat64});
  PlyFile ply{format, {vertex_element(gaussians.size(), props)}};
  const Eigen::VectorXd packed = pack_gaussians(gaussians);
  ply.elements[0].values.assign(packed.data(), packed.data() + packed.size());
  write_ply(path, ply);
}

std::vector<Gaussian> read_gaussians(const std::filesystem::path& path) {
  const PlyFile ply = read_ply(path);
  const PlyElement& v = vertices(ply, path);
  int idx[param::kCount];
  for (std::size_t j = 0; j < param::kCount; ++j) idx[j] = require(v, kGaussianProps[j], path);
  Eigen::VectorXd packed(static_cast<Eigen::Index>(v.count * param::kCount));
  for (std::size_t i = 0; i < v.count; ++i) {
    for (std::size_t j = 0; j < param::kCount; ++j) {
      packed[static_cast<Eigen::Index>(i * param::kCount + j)] = v.at(i, idx[j]);
    }
  }
  return unpack_gaussians(packed);
}

}  // namespace confsplat
