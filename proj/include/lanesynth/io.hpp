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

#ifndef LANESYNTH__IO_HPP_
#define LANESYNTH__IO_HPP_

#include "lanesynth/depthcloud.hpp"
#include "lanesynth/geometry.hpp"

#include <filesystem>
#include <string>

namespace lanesynth
{

// Depth map file: "DMAP", u32 width, u32 height, width*height float32
// depths, row-major, little-endian.
void write_depth_map(const std::filesystem::path & path, const DepthMap & depth);
DepthMap read_depth_map(const std::filesystem::path & path);

// 8-bit binary PGM (P5); intensities are clamped to [0, 1].
void write_pgm(const std::filesystem::path & path, const GrayImage & image);
void write_pgm(const std::filesystem::path & path, const EdgeMask & mask);
GrayImage read_pgm(const std::filesystem::path & path);

enum class PlyFormat
{
  kAscii,
  kBinaryLittleEndian,
};

void write_ply(const std::filesystem::path & path, const PointCloud & cloud, PlyFormat format);

/// Reads the x, y, z properties of the vertex element; other properties are
/// skipped. The frame tag is not stored in PLY and must be set by the caller.
PointCloud read_ply(const std::filesystem::path & path);

/// Writes to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path & path, const std::string & contents);
std::string read_file(const std::filesystem::path & path);

}  // namespace lanesynth

#endif  // LANESYNTH__IO_HPP_
