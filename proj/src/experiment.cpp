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

#include "lanesynth/experiment.hpp"

#include "lanesynth/error.hpp"
#include "lanesynth/parallel.hpp"

#include <cmath>
#include <limits>
#include <mutex>
#include <optional>

namespace lanesynth
{

std::vector<std::vector<FrameRecord>> make_frame_records(
  const Scene & scene, const CameraIntrinsics & intr, const std::vector<RigidTransform> & render_poses,
  const std::vector<RigidTransform> & record_poses, const std::vector<double> & timestamps,
  const std::vector<CloudConfig> & clouds, int jobs)
{
  if (render_poses.size() != record_poses.size() || render_poses.size() != timestamps.size()) {
    fail(ErrorCode::kInvalidArgument, "pose and timestamp sequences differ in length");
  }
  std::vector<std::vector<FrameRecord>> out(clouds.size(), std::vector<FrameRecord>(render_poses.size()));
  parallel_for(render_poses.size(), jobs, [&](std::size_t i) {
    const RenderedFrame frame = render(scene, render_poses[i], intr);
    const FrameId id{static_cast<std::int64_t>(i)};
    for (std::size_t c = 0; c < clouds.size(); ++c) {
      out[c][i] = FrameRecord{
        id, record_poses[i], make_local_cloud(intr, frame.depth, frame.intensity, clouds[c], id),
        timestamps[i]};
    }
  });
  return out;
}

std::vector<LabeledSample> synthesize_dataset(
  const std::vector<FrameRecord> & frames, const CameraIntrinsics & intr, const AugmentConfig & augment,
  const Labeler & labeler, int jobs, DatasetReport * report)
{
  const std::size_t n_traj = augment.offsets.size() + 1;
  std::vector<std::vector<std::optional<LabeledSample>>> slots(
    n_traj, std::vector<std::optional<LabeledSample>>(frames.size()));
  std::vector<std::vector<std::uint8_t>> synth_dropped(n_traj, std::vector<std::uint8_t>(frames.size(), 0));
  for_each_synthesized(frames, intr, augment, jobs, [&](std::size_t t, std::size_t i, auto && r) {
    if (!r) {
      synth_dropped[t][i] = 1;
      return;
    }
    slots[t][i] = labeler.label(*r, t == 0 ? 0.0 : augment.offsets[t - 1], t);
  });
  std::vector<LabeledSample> out;
  DatasetReport local;
  for (std::size_t t = 0; t < n_traj; ++t) {
    TrajectoryStats stats{t == 0 ? 0.0 : augment.offsets[t - 1], 0, 0};
    for (std::size_t i = 0; i < frames.size(); ++i) {
      if (!slots[t][i]) {
        ++stats.dropped;
        continue;
      }
      local.clamped += slots[t][i]->clamped ? 1 : 0;
      ++stats.samples;
      out.push_back(std::move(*slots[t][i]));
    }
    local.trajectories.push_back(stats);
  }
  if (report) {
    *report = std::move(local);
  }
  return out;
}

DeskPreset DeskPreset::standard()
{
  DeskPreset p;
  p.model.point_widths = {32, 64, 128};
  p.model.head_widths = {64, 32};
  p.model.output_scale = 3.0;
  p.train.learning_rate = 0.01;
  p.train.momentum = 0.9;
  p.train.batch_size = 32;
  p.train.epochs = 8;
  p.train.seed = 5;
  p.label.n_points = 256;
  p.label.clamp = p.model.output_scale;
  p.label.seed = 1;
  p.cloud.frame_point_cap = 16384;
  p.augment.offsets = AugmentConfig::uniform_offsets(10, -2.0, 2.0);
  p.noise.seed = 7;
  return p;
}

std::vector<Variant> ablation_variants(const DeskPreset & preset)
{
  std::vector<Variant> out;
  const Variant ours{"ours", preset.cloud, preset.augment};
  out.push_back(ours);

  Variant v = ours;
  v.name = "single";
  v.augment.offsets.clear();
  out.push_back(v);

  v = ours;
  v.name = "shift-only";
  v.augment.align = false;
  out.push_back(v);

  v = ours;
  v.name = "unfiltered";
  v.cloud.edge_filter = false;
  out.push_back(v);

  v = ours;
  v.name = "unlimited-distance";
  v.cloud.max_distance = std::numeric_limits<double>::infinity();
  v.augment.max_distance = std::numeric_limits<double>::infinity();
  out.push_back(v);

  v = ours;
  v.name = "no-counteraction";
  v.augment.counteract = false;
  out.push_back(v);
  return out;
}

std::vector<TrainedVariant> train_variants(
  const TrackSpec & track, const CameraIntrinsics & intr, const DeskPreset & preset,
  const std::vector<Variant> & variants, int jobs)
{
  if (variants.empty()) {
    fail(ErrorCode::kConfiguration, "no variants to train");
  }
  const Scene scene(track);
  const auto gt = sample_reference(scene.track(), 1.0);
  const auto vo = perturb(gt, preset.noise);
  std::vector<double> stamps(gt.size());
  for (std::size_t i = 0; i < stamps.size(); ++i) {
    stamps[i] = 0.1 * static_cast<double>(i);
  }

  std::vector<CloudConfig> clouds;
  std::vector<std::size_t> cloud_of;
  for (const auto & v : variants) {
    std::size_t k = 0;
    while (k < clouds.size() && !(clouds[k] == v.cloud)) {
      ++k;
    }
    if (k == clouds.size()) {
      clouds.push_back(v.cloud);
    }
    cloud_of.push_back(k);
  }
  const auto records = make_frame_records(scene, intr, gt, vo, stamps, clouds, jobs);
  const Labeler labeler(vo, preset.label);

  std::vector<TrainedVariant> out;
  for (std::size_t i = 0; i < variants.size(); ++i) {
    const auto data = synthesize_dataset(records[cloud_of[i]], intr, variants[i].augment, labeler, jobs);
    auto net = std::make_shared<PointNetLite>(preset.model, preset.model_seed);
    TrainConfig tc = preset.train;
    if (i > 0) {
      tc.max_steps = out.front().result.steps;
    }
    TrainedVariant tv;
    tv.variant = variants[i];
    tv.result = train(*net, data, tc);
    tv.samples = data.size();
    tv.net = std::move(net);
    out.push_back(std::move(tv));
  }
  return out;
}

}  // namespace lanesynth
