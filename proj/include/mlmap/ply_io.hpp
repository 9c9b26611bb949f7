// PLY reader/writer for clouds and maps. Schema: x,y,z,intensity,time_offset
// as float32 and sensor_id as uint8, binary little-endian or ASCII.
#pragma once

#include <mlmap/cloud.hpp>

#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

namespace mlmap {

enum class PlyFormat { BinaryLittleEndian, Ascii };

struct PlyComments {
  std::vector<std::string> lines;

  void add(const std::string& key, const std::string& value) { lines.push_back(key + " " + value); }

  /// Value of "key value" comment lines, empty if absent.
  std::string get(const std::string& key) const {
    for (const auto& l : lines) {
      if (l.rfind(key + " ", 0) == 0) return l.substr(key.size() + 1);
    }
    return {};
  }
};

namespace detail {

struct PlyProperty {
  std::string type;
  std::string name;
};

inline size_t ply_type_size(const std::string& t) {
  if (t == "char" || t == "uchar" || t == "int8" || t == "uint8") return 1;
  if (t == "short" || t == "ushort" || t == "int16" || t == "uint16") return 2;
  if (t == "int" || t == "uint" || t == "int32" || t == "uint32" || t == "float" || t == "float32")
    return 4;
  if (t == "double" || t == "float64") return 8;
  throw std::runtime_error("ply: unsupported property type " + t);
}

inline double ply_read_binary_value(const char* buf, const std::string& t) {
  if (t == "float" || t == "float32") {
    float v;
    std::memcpy(&v, buf, 4);
    return v;
  }
  if (t == "double" || t == "float64") {
    double v;
    std::memcpy(&v, buf, 8);
    return v;
  }
  if (t == "uchar" || t == "uint8") return static_cast<double>(static_cast<unsigned char>(buf[0]));
  if (t == "char" || t == "int8") return static_cast<double>(static_cast<signed char>(buf[0]));
  if (t == "short" || t == "int16") {
    int16_t v;
    std::memcpy(&v, buf, 2);
    return v;
  }
  if (t == "ushort" || t == "uint16") {
    uint16_t v;
    std::memcpy(&v, buf, 2);
    return v;
  }
  if (t == "int" || t == "int32") {
    int32_t v;
    std::memcpy(&v, buf, 4);
    return v;
  }
  if (t == "uint" || t == "uint32") {
    uint32_t v;
    std::memcpy(&v, buf, 4);
    return v;
  }
  throw std::runtime_error("ply: unsupported property type " + t);
}

}  // namespace detail

inline void write_ply(const std::string& path, const PointCloud& cloud,
                      PlyFormat format = PlyFormat::BinaryLittleEndian,
                      const PlyComments& comments = {}) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("ply: cannot open for writing: " + path);
  os << "ply\n";
  os << "format "
     << (format == PlyFormat::BinaryLittleEndian ? "binary_little_endian" : "ascii") << " 1.0\n";
  os << "comment stamp " << std::setprecision(17) << cloud.stamp << "\n";
  for (const auto& c : comments.lines) os << "comment " << c << "\n";
  os << "element vertex " << cloud.size() << "\n";
  os << "property float x\nproperty float y\nproperty float z\n";
  os << "property float intensity\nproperty float time_offset\n";
  os << "property uchar sensor_id\n";
  os << "end_header\n";
  if (format == PlyFormat::BinaryLittleEndian) {
    std::vector<char> row(4 * 5 + 1);
    for (size_t i = 0; i < cloud.size(); ++i) {
      const float xyz[3] = {static_cast<float>(cloud.points[i].x()),
                            static_cast<float>(cloud.points[i].y()),
                            static_cast<float>(cloud.points[i].z())};
      std::memcpy(row.data(), xyz, 12);
      std::memcpy(row.data() + 12, &cloud.intensity[i], 4);
      std::memcpy(row.data() + 16, &cloud.time_offset[i], 4);
      row[20] = static_cast<char>(cloud.sensor_id[i]);
      os.write(row.data(), row.size());
    }
  } else {
    os << std::setprecision(9);
    for (size_t i = 0; i < cloud.size(); ++i) {
      os << static_cast<float>(cloud.points[i].x()) << " " << static_cast<float>(cloud.points[i].y())
         << " " << static_cast<float>(cloud.points[i].z()) << " " << cloud.intensity[i] << " "
         << cloud.time_offset[i] << " " << static_cast<int>(cloud.sensor_id[i]) << "\n";
    }
  }
  if (!os) throw std::runtime_error("ply: write failed: " + path);
}

inline PointCloud read_ply(const std::string& path, PlyComments* comments_out = nullptr) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("ply: cannot open: " + path);
  std::string line;
  if (!std::getline(is, line) || line.rfind("ply", 0) != 0)
    throw std::runtime_error("ply: missing magic in " + path);

  bool binary = false;
  size_t vertex_count = 0;
  std::vector<detail::PlyProperty> props;
  PlyComments comments;
  double stamp = 0.0;
  bool in_vertex = false;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string tok;
    ls >> tok;
    if (tok == "format") {
      std::string fmt;
      ls >> fmt;
      if (fmt == "binary_little_endian") binary = true;
      else if (fmt == "ascii") binary = false;
      else throw std::runtime_error("ply: unsupported format " + fmt + " in " + path);
    } else if (tok == "comment") {
      std::string rest = line.substr(line.find("comment") + 8);
      std::istringstream cs(rest);
      std::string key;
      cs >> key;
      if (key == "stamp") {
        cs >> stamp;
      } else {
        comments.lines.push_back(rest);
      }
    } else if (tok == "element") {
      std::string name;
      size_t count;
      ls >> name >> count;
      in_vertex = (name == "vertex");
      if (in_vertex) vertex_count = count;
      else if (count > 0) throw std::runtime_error("ply: unsupported element " + name + " in " + path);
    } else if (tok == "property") {
      if (!in_vertex) continue;
      detail::PlyProperty p;
      ls >> p.type >> p.name;
      if (p.type == "list") throw std::runtime_error("ply: list properties unsupported in " + path);
      props.push_back(p);
    } else if (tok == "end_header") {
      break;
    }
  }

  int ix = -1, iy = -1, iz = -1, ii = -1, it = -1, is_id = -1;
  size_t row_size = 0;
  std::vector<size_t> offsets;
  for (size_t k = 0; k < props.size(); ++k) {
    offsets.push_back(row_size);
    row_size += detail::ply_type_size(props[k].type);
    if (props[k].name == "x") ix = static_cast<int>(k);
    else if (props[k].name == "y") iy = static_cast<int>(k);
    else if (props[k].name == "z") iz = static_cast<int>(k);
    else if (props[k].name == "intensity") ii = static_cast<int>(k);
    else if (props[k].name == "time_offset") it = static_cast<int>(k);
    else if (props[k].name == "sensor_id") is_id = static_cast<int>(k);
  }
  if (ix < 0 || iy < 0 || iz < 0)
    throw std::runtime_error("ply: missing x/y/z properties in " + path);

  PointCloud cloud;
  cloud.stamp = stamp;
  cloud.reserve(vertex_count);
  if (binary) {
    std::vector<char> row(row_size);
    for (size_t i = 0; i < vertex_count; ++i) {
      if (!is.read(row.data(), row.size()))
        throw std::runtime_error("ply: truncated vertex data in " + path);
      auto val = [&](int k) { return detail::ply_read_binary_value(row.data() + offsets[k], props[k].type); };
      cloud.push_back(Vec3(val(ix), val(iy), val(iz)),
                      ii >= 0 ? static_cast<float>(val(ii)) : 0.0f,
                      it >= 0 ? static_cast<float>(val(it)) : 0.0f,
                      is_id >= 0 ? static_cast<uint8_t>(val(is_id)) : 0);
    }
  } else {
    std::vector<double> vals(props.size());
    for (size_t i = 0; i < vertex_count; ++i) {
      if (!std::getline(is, line))
        throw std::runtime_error("ply: truncated vertex data in " + path);
      std::istringstream ls(line);
      for (auto& v : vals)
        if (!(ls >> v)) throw std::runtime_error("ply: bad vertex row in " + path);
      cloud.push_back(Vec3(vals[ix], vals[iy], vals[iz]),
                      ii >= 0 ? static_cast<float>(vals[ii]) : 0.0f,
                      it >= 0 ? static_cast<float>(vals[it]) : 0.0f,
                      is_id >= 0 ? static_cast<uint8_t>(vals[is_id]) : 0);
    }
  }
  if (comments_out) *comments_out = comments;
  return cloud;
}

}  // namespace mlmap
