// Copyright 2026 The lanesynth Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "lanesynth/io.hpp"

#include "lanesynth/error.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

namespace lanesynth
{

static_assert(std::endian::native == std::endian::little, "binary formats assume little-endian");

namespace
{

template <typename T>
void put(std::ostream & out, T value)
{
  out.write(reinterpret_cast<const char *>(&value), sizeof(T));
}

template <typename T>
T get(std::istream & in, const std::filesystem::path & path)
{
  T value{};
  if (!in.read(reinterpret_cast<char *>(&value), sizeof(T))) {
    fail(ErrorCode::kParse, "unexpected end of file in " + path.string());
  }
  return value;
}

std::ofstream open_out(const std::filesystem::path & path)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    fail(ErrorCode::kIo, "cannot write " + path.string());
  }
  return out;
}

std::ifstream open_in(const std::filesystem::path & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    fail(ErrorCode::kIo, "cannot open " + path.string());
  }
  return in;
}

std::uint8_t to_byte(double v)
{
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

}  // namespace

void write_depth_map(const std::filesystem::path & path, const DepthMap & depth)
{
  depth.validate();
  auto out = open_out(path);
  out.write("DMAP", 4);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(depth.width));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(depth.height));
  for (double d : depth.values) {
    put<float>(out, static_cast<float>(d));
  }
}

DepthMap read_depth_map(const std::filesystem::path & path)
{
  auto in = open_in(path);
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "DMAP", 4) != 0) {
    fail(ErrorCode::kParse, "missing DMAP magic in " + path.string());
  }
  DepthMap depth;
  depth.width = static_cast<int>(get<std::uint32_t>(in, path));
  depth.height = static_cast<int>(get<std::uint32_t>(in, path));
  if (depth.width <= 0 || depth.height <= 0 || depth.width > 1 << 16 || depth.height > 1 << 16) {
    fail(ErrorCode::kParse, "implausible depth map size in " + path.string());
  }
  const std::size_t n = static_cast<std::size_t>(depth.width) * depth.height;
  std::vector<float> raw(n);
  if (!in.read(reinterpret_cast<char *>(raw.data()), static_cast<std::streamsize>(n * sizeof(float)))) {
    fail(ErrorCode::kParse, "truncated depth map " + path.string());
  }
  depth.values.assign(raw.begin(), raw.end());
  depth.validate();
  return depth;
}

void write_pgm(const std::filesystem::path & path, const GrayImage & image)
{
  auto out = open_out(path);
  out << "P5\n" << image.width << " " << image.height << "\n255\n";
  for (float v : image.values) {
    put<std::uint8_t>(out, to_byte(v));
  }
}

void write_pgm(const std::filesystem::path & path, const EdgeMask & mask)
{
  auto out = open_out(path);
  out << "P5\n" << mask.width << " " << mask.height << "\n255\n";
  for (auto b : mask.bits) {
    put<std::uint8_t>(out, b ? 255 : 0);
  }
}

GrayImage read_pgm(const std::filesystem::path & path)
{
  auto in = open_in(path);
  std::string magic;
  int maxval = 0;
  GrayImage img;
  in >> magic >> img.width >> img.height >> maxval;
  if (magic != "P5" || img.width <= 0 || img.height <= 0 || maxval != 255) {
    fail(ErrorCode::kParse, "unsupported PGM header in " + path.string());
  }
  in.get();
  const std::size_t n = static_cast<std::size_t>(img.width) * img.height;
  std::vector<unsigned char> raw(n);
  if (!in.read(reinterpret_cast<char *>(raw.data()), static_cast<std::streamsize>(n))) {
    fail(ErrorCode::kParse, "truncated PGM " + path.string());
  }
  img.values.resize(n);
  std::transform(raw.begin(), raw.end(), img.values.begin(), [](unsigned char c) {
    return static_cast<float>(c) / 255.0f;
  });
  return img;
}

void write_ply(const std::filesystem::path & path, const PointCloud & cloud, PlyFormat format)
{
  auto out = open_out(path);
  out << "ply\n"
      << (format == PlyFormat::kAscii ? "format ascii 1.0\n" : "format binary_little_endian 1.0\n")
      << "element vertex " << cloud.size() << "\n"
      << "property float x\nproperty float y\nproperty float z\nend_header\n";
  if (format == PlyFormat::kAscii) {
    char buf[128];
    for (const auto & p : cloud.points) {
      std::snprintf(
        buf, sizeof(buf), "%.9g %.9g %.9g\n", static_cast<double>(static_cast<float>(p.x())),
        static_cast<double>(static_cast<float>(p.y())),
        static_cast<double>(static_cast<float>(p.z())));
      out << buf;
    }
  } else {
    for (const auto & p : cloud.points) {
      put<float>(out, static_cast<float>(p.x()));
      put<float>(out, static_cast<float>(p.y()));
      put<float>(out, static_cast<float>(p.z()));
    }
  }
}

namespace
{

std::size_t ply_type_size(const std::string & type)
{
  if (type == "char" || type == "uchar" || type == "int8" || type == "uint8") return 1;
  if (type == "short" || type == "ushort" || type == "int16" || type == "uint16") return 2;
  if (type == "int" || type == "uint" || type == "float" || type == "int32" || type == "uint32" ||
      type == "float32") {
    return 4;
  }
  if (type == "double" || type == "float64") return 8;
  return 0;
}

double ply_read_binary(const char * data, const std::string & type)
{
  if (type == "float" || type == "float32") {
    float f;
    std::memcpy(&f, data, 4);
    return f;
  }
  if (type == "double" || type == "float64") {
    double d;
    std::memcpy(&d, data, 8);
    return d;
  }
  fail(ErrorCode::kParse, "unsupported PLY coordinate type " + type);
}

}  // namespace

PointCloud read_ply(const std::filesystem::path & path)
{
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line) || line != "ply") {
    fail(ErrorCode::kParse, "missing ply magic in " + path.string());
  }
  bool ascii = false;
  std::size_t vertex_count = 0;
  bool in_vertex = false;
  bool seen_vertex = false;
  struct Prop
  {
    std::string type;
    std::string name;
  };
  std::vector<Prop> props;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "format") {
      std::string fmt;
      ls >> fmt;
      if (fmt == "ascii") {
        ascii = true;
      } else if (fmt != "binary_little_endian") {
        fail(ErrorCode::kParse, "unsupported PLY format " + fmt);
      }
    } else if (key == "element") {
      std::string name;
      ls >> name;
      if (seen_vertex) {
        in_vertex = false;
        continue;
      }
      in_vertex = name == "vertex";
      if (in_vertex) {
        seen_vertex = true;
        ls >> vertex_count;
      } else {
        fail(ErrorCode::kParse, "PLY elements before vertex are not supported");
      }
    } else if (key == "property" && in_vertex) {
      Prop p;
      ls >> p.type;
      if (p.type == "list") {
        fail(ErrorCode::kParse, "list properties on vertices are not supported");
      }
      ls >> p.name;
      if (ply_type_size(p.type) == 0) {
        fail(ErrorCode::kParse, "unknown PLY property type " + p.type);
      }
      props.push_back(p);
    } else if (key == "end_header") {
      break;
    }
  }
  int ix = -1;
  int iy = -1;
  int iz = -1;
  std::size_t stride = 0;
  std::vector<std::size_t> offsets;
  for (std::size_t i = 0; i < props.size(); ++i) {
    offsets.push_back(stride);
    stride += ply_type_size(props[i].type);
    if (props[i].name == "x") ix = static_cast<int>(i);
    if (props[i].name == "y") iy = static_cast<int>(i);
    if (props[i].name == "z") iz = static_cast<int>(i);
  }
  if (ix < 0 || iy < 0 || iz < 0) {
    fail(ErrorCode::kParse, "PLY vertex element lacks x/y/z in " + path.string());
  }
  PointCloud cloud;
  cloud.points.reserve(vertex_count);
  if (ascii) {
    std::vector<double> row(props.size());
    for (std::size_t n = 0; n < vertex_count; ++n) {
      for (std::size_t k = 0; k < row.size(); ++k) {
        if (!(in >> row[k])) {
          fail(ErrorCode::kParse, "truncated ascii PLY " + path.string());
        }
        if (props[k].type == "float" || props[k].type == "float32") {
          row[k] = static_cast<float>(row[k]);
        }
      }
      cloud.points.emplace_back(row[ix], row[iy], row[iz]);
    }
  } else {
    std::vector<char> buf(stride);
    for (std::size_t n = 0; n < vertex_count; ++n) {
      if (!in.read(buf.data(), static_cast<std::streamsize>(stride))) {
        fail(ErrorCode::kParse, "truncated binary PLY " + path.string());
      }
      cloud.points.emplace_back(
        ply_read_binary(buf.data() + offsets[ix], props[ix].type),
        ply_read_binary(buf.data() + offsets[iy], props[iy].type),
        ply_read_binary(buf.data() + offsets[iz], props[iz].type));
    }
  }
  return cloud;
}

void write_file_atomic(const std::filesystem::path & path, const std::string & contents)
{
  auto tmp = path;
  tmp += ".tmp";
  {
    auto out = open_out(tmp);
    out << contents;
    if (!out) {
      fail(ErrorCode::kIo, "failed writing " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path & path)
{
  auto in = open_in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace lanesynth
