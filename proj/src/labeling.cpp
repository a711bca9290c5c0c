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

#include "lanesynth/labeling.hpp"

#include "lanesynth/depthcloud.hpp"
#include "lanesynth/error.hpp"
#include "lanesynth/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace lanesynth
{

void SteeringParams::validate() const
{
  if (!(alpha > 0.0) || !(lookahead > 0.0)) {
    fail(ErrorCode::kConfiguration, "steering alpha and lookahead must be positive");
  }
}

void LabelConfig::validate() const
{
  if (!(lookahead > 0.0) || !(clamp > 0.0) || n_points <= 0) {
    fail(ErrorCode::kConfiguration, "invalid label configuration");
  }
}

std::size_t select_future_frame(
  const std::vector<RigidTransform> & poses, std::size_t i, double lookahead)
{
  if (i >= poses.size()) {
    fail(ErrorCode::kInvalidArgument, "frame index out of range");
  }
  if (!(lookahead > 0.0)) {
    fail(ErrorCode::kInvalidArgument, "lookahead must be positive");
  }
  const RigidTransform to_local = inverse(poses[i]);
  for (std::size_t j = i + 1; j < poses.size(); ++j) {
    if ((to_local * poses[j].translation()).z() >= lookahead) {
      return j;
    }
  }
  fail(ErrorCode::kEndOfTrajectory, "no frame far enough ahead");
}

double lateral_offset(const RigidTransform & pose_i, const RigidTransform & pose_j)
{
  return relative_transform(pose_i, pose_j).translation().x();
}

double steering_from_offset(double delta_x, const SteeringParams & p)
{
  return std::atan(delta_x * p.alpha);
}

std::uint64_t sample_seed(std::uint64_t seed, std::size_t trajectory, std::int64_t frame)
{
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(seed) ^ trajectory) ^ static_cast<std::uint64_t>(frame));
}

Labeler::Labeler(std::vector<RigidTransform> reference_poses, LabelConfig cfg)
: poses_(std::move(reference_poses)), future_(poses_.size()), cfg_(cfg)
{
  cfg_.validate();
  if (poses_.empty()) {
    fail(ErrorCode::kInvalidArgument, "reference poses are empty");
  }
  for (std::size_t i = 0; i < poses_.size(); ++i) {
    try {
      future_[i] = select_future_frame(poses_, i, cfg_.lookahead);
    } catch (const Error & e) {
      if (e.code() != ErrorCode::kEndOfTrajectory) {
        throw;
      }
    }
  }
}

std::optional<LabeledSample> Labeler::label(
  const SynthesizedFrame & frame, double trajectory_offset, std::size_t trajectory) const
{
  const std::int64_t id = frame.record.id.value;
  if (id < 0 || static_cast<std::size_t>(id) >= poses_.size()) {
    fail(ErrorCode::kInvalidArgument, "frame id outside the reference sequence");
  }
  const auto j = future_[static_cast<std::size_t>(id)];
  if (!j || (cfg_.skip_insufficient_lookback && frame.insufficient_lookback)) {
    return std::nullopt;
  }
  LabeledSample s;
  s.cloud = sample_fixed(frame.record.cloud, cfg_.n_points, sample_seed(cfg_.seed, trajectory, id));
  s.delta_x = lateral_offset(frame.record.pose, poses_[*j]);
  if (std::abs(s.delta_x) > cfg_.clamp) {
    s.delta_x = std::clamp(s.delta_x, -cfg_.clamp, cfg_.clamp);
    s.clamped = true;
  }
  s.trajectory_offset = trajectory_offset;
  s.frame = frame.record.id;
  s.future_frame = FrameId{static_cast<std::int64_t>(*j)};
  return s;
}

std::vector<LabeledSample> build_dataset(
  const std::vector<Trajectory> & trajectories, const std::vector<RigidTransform> & reference_poses,
  const LabelConfig & cfg, DatasetReport * report, int jobs)
{
  const Labeler labeler(reference_poses, cfg);
  std::vector<LabeledSample> out;
  DatasetReport local;
  for (std::size_t t = 0; t < trajectories.size(); ++t) {
    const Trajectory & traj = trajectories[t];
    std::vector<std::optional<LabeledSample>> slots(traj.frames.size());
    parallel_for(traj.frames.size(), jobs, [&](std::size_t k) {
      slots[k] = labeler.label(traj.frames[k], traj.offset, t);
    });
    TrajectoryStats stats{traj.offset, 0, traj.dropped.size()};
    for (auto & slot : slots) {
      if (!slot) {
        ++stats.dropped;
        continue;
      }
      local.clamped += slot->clamped ? 1 : 0;
      ++stats.samples;
      out.push_back(std::move(*slot));
    }
    local.trajectories.push_back(stats);
  }
  if (report) {
    *report = std::move(local);
  }
  return out;
}

}  // namespace lanesynth
