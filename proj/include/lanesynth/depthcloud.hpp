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

#ifndef LANESYNTH__DEPTHCLOUD_HPP_
#define LANESYNTH__DEPTHCLOUD_HPP_

#include "lanesynth/geometry.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

namespace lanesynth
{

/// Row-major depth raster in meters (post scale calibration). Entries <= 0
/// mark invalid pixels.
struct DepthMap
{
  int width{0};
  int height{0};
  std::vector<double> values;

  double at(int u, int v) const { return values[static_cast<std::size_t>(v) * width + u]; }
  void validate() const;
};

/// Row-major single channel intensity raster, nominally in [0, 1].
struct GrayImage
{
  int width{0};
  int height{0};
  std::vector<float> values;

  float at(int u, int v) const { return values[static_cast<std::size_t>(v) * width + u]; }
};

struct EdgeMask
{
  int width{0};
  int height{0};
  std::vector<std::uint8_t> bits;

  bool at(int u, int v) const { return bits[static_cast<std::size_t>(v) * width + u] != 0; }
  std::size_t count() const;

  static EdgeMask filled(int width, int height, bool value);
};

struct CloudConfig
{
  double max_distance{20.0};
  int target_points{4096};
  int dilation_radius{1};
  double scale_factor{1.0};
  bool edge_filter{true};
  double edge_sigma{1.0};
  double edge_low{0.15};
  double edge_high{0.35};
  // Random per-frame subsample applied by make_local_cloud, 0 keeps all.
  int frame_point_cap{0};

  void validate() const;
  bool operator==(const CloudConfig &) const = default;
};

/// A cloud produced by unprojection, with the source pixel (v * width + u)
/// of every point.
struct PixelCloud
{
  PointCloud cloud;
  std::vector<std::uint32_t> pixels;
};

PixelCloud unproject(
  const CameraIntrinsics & intr, const DepthMap & depth, double scale_factor = 1.0,
  FrameId frame = FrameId{0});

/// Canny-style detector: Gaussian smoothing, Sobel gradient, non-maximum
/// suppression and hysteresis linking. Thresholds apply to the Sobel
/// gradient magnitude of the smoothed image.
EdgeMask edge_mask(const GrayImage & image, double low, double high, double sigma = 1.0);

/// Square structuring element of half-width radius.
EdgeMask dilate(const EdgeMask & mask, int radius);

/// Keeps points whose source pixel is set in the mask and whose Euclidean
/// distance from the camera is within cfg.max_distance.
PointCloud filter_cloud(const PixelCloud & cloud, const EdgeMask & mask, const CloudConfig & cfg);

PointCloud limit_distance(const PointCloud & cloud, double max_distance);

/// Exactly n points. Subsamples without replacement when the cloud is large
/// enough, otherwise keeps every point once and pads by drawing with
/// replacement. Throws kDegenerateFrame for an empty cloud.
PointCloud sample_fixed(const PointCloud & cloud, int n, std::uint64_t seed);

/// Depth -> edge filtered, distance limited local cloud. When
/// cfg.edge_filter is false the intensity raster is ignored.
/// Frames above cfg.frame_point_cap are subsampled, seeded by the frame id.
PointCloud make_local_cloud(
  const CameraIntrinsics & intr, const DepthMap & depth, const GrayImage & intensity,
  const CloudConfig & cfg, FrameId frame);

/// Scale factor that makes ground pixels sit camera_height below the camera:
/// median over the lower central image region of camera_height / Y, where Y
/// is the unscaled downward coordinate of the unprojected pixel.
std::optional<double> estimate_depth_scale(
  const CameraIntrinsics & intr, const DepthMap & depth, double camera_height);

}  // namespace lanesynth

#endif  // LANESYNTH__DEPTHCLOUD_HPP_
