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

#include "lanesynth/depthcloud.hpp"

#include "lanesynth/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace lanesynth
{

void DepthMap::validate() const
{
  if (width <= 0 || height <= 0 ||
      values.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    fail(ErrorCode::kConfiguration, "depth map size does not match its dimensions");
  }
  for (double d : values) {
    if (!std::isfinite(d)) {
      fail(ErrorCode::kInvalidInput, "depth map contains non-finite values");
    }
  }
}

std::size_t EdgeMask::count() const
{
  return static_cast<std::size_t>(std::count_if(bits.begin(), bits.end(), [](auto b) {
    return b != 0;
  }));
}

EdgeMask EdgeMask::filled(int width, int height, bool value)
{
  return EdgeMask{
    width, height,
    std::vector<std::uint8_t>(static_cast<std::size_t>(width) * height, value ? 1 : 0)};
}

void CloudConfig::validate() const
{
  if (!(max_distance > 0.0) || target_points <= 0 || dilation_radius < 0 ||
      !(scale_factor > 0.0) || edge_low < 0.0 || edge_high < edge_low || edge_sigma < 0.0 ||
      frame_point_cap < 0) {
    fail(ErrorCode::kConfiguration, "invalid cloud configuration");
  }
}

PixelCloud unproject(
  const CameraIntrinsics & intr, const DepthMap & depth, double scale_factor, FrameId frame)
{
  if (depth.width != intr.width || depth.height != intr.height) {
    fail(ErrorCode::kConfiguration, "depth map dimensions do not match camera intrinsics");
  }
  depth.validate();
  PixelCloud out;
  out.cloud.frame = frame;
  for (int v = 0; v < depth.height; ++v) {
    for (int u = 0; u < depth.width; ++u) {
      const double d = depth.at(u, v);
      if (!(d > 0.0)) {
        continue;
      }
      const double z = d * scale_factor;
      out.cloud.points.emplace_back(z * (u - intr.cx) / intr.fx, z * (v - intr.cy) / intr.fy, z);
      out.pixels.push_back(static_cast<std::uint32_t>(v * depth.width + u));
    }
  }
  return out;
}

namespace
{

std::vector<float> gaussian_blur(const GrayImage & img, double sigma)
{
  const int w = img.width;
  const int h = img.height;
  if (sigma <= 0.0) {
    return img.values;
  }
  const int radius = std::max(1, static_cast<int>(std::ceil(2.5 * sigma)));
  std::vector<float> kernel(static_cast<std::size_t>(2 * radius + 1));
  float sum = 0.0f;
  for (int i = -radius; i <= radius; ++i) {
    kernel[static_cast<std::size_t>(i + radius)] =
      static_cast<float>(std::exp(-(i * i) / (2.0 * sigma * sigma)));
    sum += kernel[static_cast<std::size_t>(i + radius)];
  }
  for (auto & k : kernel) {
    k /= sum;
  }
  std::vector<float> tmp(img.values.size());
  std::vector<float> out(img.values.size());
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      float acc = 0.0f;
      for (int i = -radius; i <= radius; ++i) {
        const int uu = std::clamp(u + i, 0, w - 1);
        acc += kernel[static_cast<std::size_t>(i + radius)] * img.at(uu, v);
      }
      tmp[static_cast<std::size_t>(v) * w + u] = acc;
    }
  }
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      float acc = 0.0f;
      for (int i = -radius; i <= radius; ++i) {
        const int vv = std::clamp(v + i, 0, h - 1);
        acc += kernel[static_cast<std::size_t>(i + radius)] * tmp[static_cast<std::size_t>(vv) * w + u];
      }
      out[static_cast<std::size_t>(v) * w + u] = acc;
    }
  }
  return out;
}

}  // namespace

EdgeMask edge_mask(const GrayImage & image, double low, double high, double sigma)
{
  const int w = image.width;
  const int h = image.height;
  if (w <= 0 || h <= 0 || image.values.size() != static_cast<std::size_t>(w) * h) {
    fail(ErrorCode::kConfiguration, "edge detection needs a non-empty image");
  }
  if (low < 0.0 || high < low) {
    fail(ErrorCode::kConfiguration, "edge thresholds must satisfy 0 <= low <= high");
  }
  const std::vector<float> s = gaussian_blur(image, sigma);
  auto px = [&](int u, int v) {
    return s[static_cast<std::size_t>(std::clamp(v, 0, h - 1)) * w + std::clamp(u, 0, w - 1)];
  };

  const std::size_t count = static_cast<std::size_t>(w) * h;
  std::vector<float> mag(count);
  std::vector<std::uint8_t> dir(count);
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      const float gx = (px(u + 1, v - 1) + 2.0f * px(u + 1, v) + px(u + 1, v + 1)) -
                       (px(u - 1, v - 1) + 2.0f * px(u - 1, v) + px(u - 1, v + 1));
      const float gy = (px(u - 1, v + 1) + 2.0f * px(u, v + 1) + px(u + 1, v + 1)) -
                       (px(u - 1, v - 1) + 2.0f * px(u, v - 1) + px(u + 1, v - 1));
      const std::size_t i = static_cast<std::size_t>(v) * w + u;
      mag[i] = std::sqrt(gx * gx + gy * gy);
      double angle = std::atan2(gy, gx) * 180.0 / M_PI;
      if (angle < 0.0) {
        angle += 180.0;
      }
      if (angle < 22.5 || angle >= 157.5) {
        dir[i] = 0;
      } else if (angle < 67.5) {
        dir[i] = 1;
      } else if (angle < 112.5) {
        dir[i] = 2;
      } else {
        dir[i] = 3;
      }
    }
  }

  // Non-maximum suppression. A plateau of two equal maxima keeps the pixel
  // on the negative side of the gradient direction so a step yields a single
  // pixel wide edge; the relative tolerance absorbs float rounding in ties.
  static constexpr int kDu[4] = {1, 1, 0, -1};
  static constexpr int kDv[4] = {0, 1, 1, 1};
  auto mag_at = [&](int u, int v) -> float {
    if (u < 0 || v < 0 || u >= w || v >= h) {
      return 0.0f;
    }
    return mag[static_cast<std::size_t>(v) * w + u];
  };
  std::vector<std::uint8_t> state(count, 0);  // 0 none, 1 weak, 2 strong
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      const std::size_t i = static_cast<std::size_t>(v) * w + u;
      const float m = mag[i];
      if (m < low || m <= 0.0f) {
        continue;
      }
      const int d = dir[i];
      const float before = mag_at(u - kDu[d], v - kDv[d]);
      const float after = mag_at(u + kDu[d], v + kDv[d]);
      const float tol = 1e-4f * m;
      if (m > before + tol && m >= after - tol) {
        state[i] = m >= high ? 2 : 1;
      }
    }
  }

  EdgeMask out = EdgeMask::filled(w, h, false);
  std::vector<std::size_t> stack;
  for (std::size_t i = 0; i < count; ++i) {
    if (state[i] == 2 && !out.bits[i]) {
      out.bits[i] = 1;
      stack.push_back(i);
      while (!stack.empty()) {
        const std::size_t j = stack.back();
        stack.pop_back();
        const int ju = static_cast<int>(j % w);
        const int jv = static_cast<int>(j / w);
        for (int dv = -1; dv <= 1; ++dv) {
          for (int du = -1; du <= 1; ++du) {
            const int nu = ju + du;
            const int nv = jv + dv;
            if (nu < 0 || nv < 0 || nu >= w || nv >= h) {
              continue;
            }
            const std::size_t k = static_cast<std::size_t>(nv) * w + nu;
            if (state[k] != 0 && !out.bits[k]) {
              out.bits[k] = 1;
              stack.push_back(k);
            }
          }
        }
      }
    }
  }
  return out;
}

EdgeMask dilate(const EdgeMask & mask, int radius)
{
  if (radius < 0) {
    fail(ErrorCode::kInvalidArgument, "dilation radius must be non-negative");
  }
  if (radius == 0) {
    return mask;
  }
  const int w = mask.width;
  const int h = mask.height;
  EdgeMask rows = EdgeMask::filled(w, h, false);
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      if (!mask.at(u, v)) {
        continue;
      }
      for (int du = std::max(0, u - radius); du <= std::min(w - 1, u + radius); ++du) {
        rows.bits[static_cast<std::size_t>(v) * w + du] = 1;
      }
    }
  }
  EdgeMask out = EdgeMask::filled(w, h, false);
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      if (!rows.at(u, v)) {
        continue;
      }
      for (int dv = std::max(0, v - radius); dv <= std::min(h - 1, v + radius); ++dv) {
        out.bits[static_cast<std::size_t>(dv) * w + u] = 1;
      }
    }
  }
  return out;
}

PointCloud filter_cloud(const PixelCloud & cloud, const EdgeMask & mask, const CloudConfig & cfg)
{
  PointCloud out;
  out.frame = cloud.cloud.frame;
  for (std::size_t i = 0; i < cloud.cloud.points.size(); ++i) {
    const auto & p = cloud.cloud.points[i];
    if (mask.bits[cloud.pixels[i]] && p.norm() <= cfg.max_distance) {
      out.points.push_back(p);
    }
  }
  return out;
}

PointCloud limit_distance(const PointCloud & cloud, double max_distance)
{
  PointCloud out;
  out.frame = cloud.frame;
  for (const auto & p : cloud.points) {
    if (p.norm() <= max_distance) {
      out.points.push_back(p);
    }
  }
  return out;
}

PointCloud sample_fixed(const PointCloud & cloud, int n, std::uint64_t seed)
{
  if (n <= 0) {
    fail(ErrorCode::kInvalidArgument, "sample size must be positive");
  }
  if (cloud.empty()) {
    fail(ErrorCode::kDegenerateFrame, "cannot sample from an empty cloud");
  }
  std::mt19937_64 rng(seed);
  const std::size_t m = cloud.size();
  const auto count = static_cast<std::size_t>(n);
  std::vector<std::size_t> idx(m);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::vector<std::size_t> chosen;
  chosen.reserve(count);
  if (m >= count) {
    for (std::size_t i = 0; i < count; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, m - 1);
      std::swap(idx[i], idx[pick(rng)]);
    }
    chosen.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(count));
  } else {
    chosen = idx;
    std::uniform_int_distribution<std::size_t> pick(0, m - 1);
    while (chosen.size() < count) {
      chosen.push_back(pick(rng));
    }
  }
  PointCloud out;
  out.frame = cloud.frame;
  out.points.reserve(count);
  for (std::size_t i : chosen) {
    out.points.push_back(cloud.points[i]);
  }
  return out;
}

PointCloud make_local_cloud(
  const CameraIntrinsics & intr, const DepthMap & depth, const GrayImage & intensity,
  const CloudConfig & cfg, FrameId frame)
{
  cfg.validate();
  const PixelCloud full = unproject(intr, depth, cfg.scale_factor, frame);
  PointCloud out;
  if (!cfg.edge_filter) {
    out = filter_cloud(full, EdgeMask::filled(depth.width, depth.height, true), cfg);
  } else {
    if (intensity.width != depth.width || intensity.height != depth.height) {
      fail(ErrorCode::kConfiguration, "intensity raster does not match the depth map");
    }
    const EdgeMask edges = dilate(
      edge_mask(intensity, cfg.edge_low, cfg.edge_high, cfg.edge_sigma), cfg.dilation_radius);
    out = filter_cloud(full, edges, cfg);
  }
  if (cfg.frame_point_cap > 0 && out.size() > static_cast<std::size_t>(cfg.frame_point_cap)) {
    out = sample_fixed(out, cfg.frame_point_cap, static_cast<std::uint64_t>(frame.value) ^ 0x5eedULL);
  }
  return out;
}

std::optional<double> estimate_depth_scale(
  const CameraIntrinsics & intr, const DepthMap & depth, double camera_height)
{
  if (!(camera_height > 0.0)) {
    fail(ErrorCode::kInvalidArgument, "camera height must be positive");
  }
  std::vector<double> ratios;
  const int v0 = depth.height - std::max(1, depth.height / 4);
  const int u0 = static_cast<int>(intr.cx) - depth.width / 8;
  const int u1 = static_cast<int>(intr.cx) + depth.width / 8;
  for (int v = std::max(v0, static_cast<int>(std::ceil(intr.cy)) + 1); v < depth.height; ++v) {
    for (int u = std::max(0, u0); u < std::min(depth.width, u1); ++u) {
      const double d = depth.at(u, v);
      if (d > 0.0) {
        ratios.push_back(camera_height / (d * (v - intr.cy) / intr.fy));
      }
    }
  }
  if (ratios.empty()) {
    return std::nullopt;
  }
  auto mid = ratios.begin() + static_cast<std::ptrdiff_t>(ratios.size() / 2);
  std::nth_element(ratios.begin(), mid, ratios.end());
  return *mid;
}

}  // namespace lanesynth
