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

#include "lanesynth/augmentation.hpp"

#include "lanesynth/error.hpp"
#include "lanesynth/parallel.hpp"

#include <cmath>
#include <optional>
#include <utility>

namespace lanesynth
{

void AugmentConfig::validate() const
{
  if (
    max_lookback < 0 || !(max_distance > 0.0) || coverage_cell <= 0 || !(coverage_target >= 0.0) ||
    coverage_target > 1.0) {
    fail(ErrorCode::kConfiguration, "invalid augmentation configuration");
  }
  for (double x : offsets) {
    if (!std::isfinite(x)) {
      fail(ErrorCode::kConfiguration, "trajectory offsets must be finite");
    }
  }
}

std::vector<double> AugmentConfig::uniform_offsets(int count, double lo, double hi)
{
  std::vector<double> out;
  if (count == 1) {
    out.push_back((lo + hi) / 2.0);
  }
  for (int i = 0; count > 1 && i < count; ++i) {
    out.push_back(lo + (hi - lo) * i / (count - 1));
  }
  return out;
}

PointCloud align_concat(const FrameRecord & base, const FrameRecord & prev)
{
  PointCloud out = apply(relative_transform(base.pose, prev.pose), prev.cloud, base.id);
  out.points.insert(out.points.end(), base.cloud.points.begin(), base.cloud.points.end());
  return out;
}

PointCloud counteract_filter(
  const FrameRecord & base, const PointCloud & aligned_prev, const CameraIntrinsics & intr)
{
  PointCloud out;
  out.frame = base.id;
  for (const auto & p : aligned_prev.points) {
    if (!in_view(intr, p)) {
      out.points.push_back(p);
    }
  }
  return out;
}

namespace
{

class CoverageGrid
{
public:
  CoverageGrid(const CameraIntrinsics & intr, int cell)
  : intr_(intr),
    cell_(cell),
    cols_((intr.width + cell - 1) / cell),
    rows_((intr.height + cell - 1) / cell),
    cells_(static_cast<std::size_t>(cols_ * rows_), 0)
  {
  }

  void mark(const Eigen::Vector3d & p)
  {
    if (!(p.z() > 0.0)) {
      return;
    }
    const ImagePoint ip = project(intr_, p);
    if (!in_image_plane(intr_, ip)) {
      return;
    }
    auto & c = cells_[static_cast<std::size_t>(
      static_cast<int>(ip.y_im) / cell_ * cols_ + static_cast<int>(ip.x_im) / cell_)];
    if (!c) {
      c = 1;
      ++occupied_;
    }
  }

  double fraction() const { return static_cast<double>(occupied_) / static_cast<double>(cells_.size()); }

private:
  CameraIntrinsics intr_;
  int cell_;
  int cols_;
  int rows_;
  std::vector<std::uint8_t> cells_;
  std::size_t occupied_{0};
};

}  // namespace

SynthesizedFrame synthesize_frame(
  const std::vector<FrameRecord> & frames, std::size_t base_idx, double x,
  const CameraIntrinsics & intr, const AugmentConfig & cfg)
{
  if (base_idx >= frames.size()) {
    fail(ErrorCode::kInvalidArgument, "base frame index out of range");
  }
  const FrameRecord & base = frames[base_idx];
  const bool shifted = x != 0.0;
  const RigidTransform to_new = inverse(lateral_shift(x));
  auto in_new = [&](const Eigen::Vector3d & p) { return shifted ? Eigen::Vector3d(to_new * p) : p; };

  std::vector<Eigen::Vector3d> acc = base.cloud.points;
  std::vector<std::int64_t> provenance(acc.size(), base.id.value);

  SynthesizedFrame out;
  if (cfg.align && cfg.max_lookback > 0) {
    CoverageGrid coverage(intr, cfg.coverage_cell);
    for (const auto & p : acc) {
      coverage.mark(in_new(p));
    }
    bool covered = coverage.fraction() >= cfg.coverage_target;
    // Maps base-frame coordinates into every preceding frame already merged,
    // so later frames only fill regions none of them observed.
    std::vector<RigidTransform> merged_views;
    for (int k = 1; k <= cfg.max_lookback && !covered; ++k) {
      if (base_idx < static_cast<std::size_t>(k)) {
        break;
      }
      const FrameRecord & prev = frames[base_idx - static_cast<std::size_t>(k)];
      const RigidTransform base_from_prev = relative_transform(base.pose, prev.pose);
      const std::size_t before = acc.size();
      for (const auto & local : prev.cloud.points) {
        const Eigen::Vector3d q = base_from_prev * local;
        if (cfg.counteract) {
          if (in_view(intr, q)) {
            continue;
          }
          bool seen = false;
          for (const auto & view : merged_views) {
            if (in_view(intr, view * q)) {
              seen = true;
              break;
            }
          }
          if (seen) {
            continue;
          }
        }
        acc.push_back(q);
        provenance.push_back(prev.id.value);
      }
      merged_views.push_back(relative_transform(prev.pose, base.pose));
      out.lookback_used = k;
      for (std::size_t i = before; i < acc.size(); ++i) {
        coverage.mark(in_new(acc[i]));
      }
      covered = coverage.fraction() >= cfg.coverage_target;
    }
    out.coverage = coverage.fraction();
    out.insufficient_lookback = !covered && out.lookback_used < cfg.max_lookback;
  }

  out.record.id = base.id;
  out.record.timestamp = base.timestamp;
  out.record.pose = compose(base.pose, lateral_shift(x));
  out.record.cloud.frame = base.id;
  for (std::size_t i = 0; i < acc.size(); ++i) {
    const Eigen::Vector3d q = in_new(acc[i]);
    if (in_view(intr, q) && q.norm() <= cfg.max_distance) {
      out.record.cloud.points.push_back(q);
      out.provenance.push_back(provenance[i]);
    }
  }
  if (out.record.cloud.empty()) {
    fail(ErrorCode::kDegenerateFrame, "synthesized frame has no points");
  }
  return out;
}

void for_each_synthesized(
  const std::vector<FrameRecord> & frames, const CameraIntrinsics & intr,
  const AugmentConfig & cfg, int jobs, const FrameSink & sink)
{
  cfg.validate();
  if (frames.empty()) {
    fail(ErrorCode::kInvalidArgument, "no frames to augment");
  }
  for (std::size_t t = 0; t <= cfg.offsets.size(); ++t) {
    AugmentConfig local = cfg;
    const double offset = t == 0 ? 0.0 : cfg.offsets[t - 1];
    if (t == 0) {
      local.align = false;
    }
    parallel_for(frames.size(), jobs, [&](std::size_t i) {
      std::optional<SynthesizedFrame> result;
      try {
        result = synthesize_frame(frames, i, offset, intr, local);
      } catch (const Error & e) {
        if (e.code() != ErrorCode::kDegenerateFrame) {
          throw;
        }
      }
      sink(t, i, std::move(result));
    });
  }
}

std::vector<Trajectory> generate_trajectories(
  const std::vector<FrameRecord> & frames, const CameraIntrinsics & intr,
  const AugmentConfig & cfg, int jobs)
{
  std::vector<std::vector<std::optional<SynthesizedFrame>>> slots(
    cfg.offsets.size() + 1, std::vector<std::optional<SynthesizedFrame>>(frames.size()));
  for_each_synthesized(frames, intr, cfg, jobs, [&](std::size_t t, std::size_t i, auto && r) {
    slots[t][i] = std::move(r);
  });
  std::vector<Trajectory> out;
  for (std::size_t t = 0; t < slots.size(); ++t) {
    Trajectory traj;
    traj.reference = t == 0;
    traj.offset = t == 0 ? 0.0 : cfg.offsets[t - 1];
    for (std::size_t i = 0; i < frames.size(); ++i) {
      if (slots[t][i]) {
        traj.frames.push_back(std::move(*slots[t][i]));
      } else {
        traj.dropped.push_back(frames[i].id);
      }
    }
    out.push_back(std::move(traj));
  }
  return out;
}

}  // namespace lanesynth
