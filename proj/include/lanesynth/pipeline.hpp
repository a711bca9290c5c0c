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

#ifndef LANESYNTH__PIPELINE_HPP_
#define LANESYNTH__PIPELINE_HPP_

#include "lanesynth/augmentation.hpp"
#include "lanesynth/config.hpp"
#include "lanesynth/depthcloud.hpp"
#include "lanesynth/labeling.hpp"
#include "lanesynth/model.hpp"
#include "lanesynth/simulator.hpp"
#include "lanesynth/synthworld.hpp"

#include <filesystem>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace lanesynth
{

namespace fs = std::filesystem;

using LogFn = std::function<void(const std::string &)>;

inline constexpr const char * kToolVersion = "0.1.0";

// Typed views of an option store.
CameraIntrinsics intrinsics_from(const Options & opts);
CloudConfig cloud_from(const Options & opts);
AugmentConfig augment_from(const Options & opts);
LabelConfig label_from(const Options & opts);
ModelConfig model_from(const Options & opts);
TrainConfig train_from(const Options & opts);
EpisodeConfig episode_from(const Options & opts);

/// A preset name or the path of a track spec file.
TrackSpec load_track(const std::string & name_or_path);

/// Fills run.seed from the system entropy source when it is empty and
/// returns the value in effect.
std::uint64_t resolve_seed(Options & opts);

/// Stream of independent seeds derived from the run seed.
std::uint64_t derived_seed(std::uint64_t seed, int stream);

std::string sha256_hex(const std::string & bytes);
std::string sha256_file(const fs::path & path);

struct Manifest
{
  std::string command;
  std::uint64_t seed{0};
  Options config;
  std::vector<std::pair<std::string, std::string>> inputs;
  /// Output file paths relative to the artifact directory, with digests.
  std::vector<std::pair<std::string, std::string>> outputs;
};

std::string format_manifest(const Manifest & m);
Manifest parse_manifest(const std::string & text);
Manifest read_manifest(const fs::path & dir);

struct ModelSpec
{
  std::string name;
  fs::path path;
};

// Each command writes its artifacts plus manifest.ini into `out`. On
// failure an INCOMPLETE marker holding the error message is left instead
// of a manifest.
void cmd_gen_world(Options opts, const fs::path & out, const LogFn & log = {});
void cmd_gen_dataset(Options opts, const fs::path & sequence, const fs::path & out, const LogFn & log = {});
void cmd_train(Options opts, const fs::path & dataset, const fs::path & out, const LogFn & log = {});
void cmd_evaluate(
  Options opts, const std::vector<ModelSpec> & models, const fs::path & out, const LogFn & log = {});
/// Writes the cloud of one frame, synthesized at `offset` when it is
/// nonzero, as frame_NNNNNN.ply.
void cmd_export_ply(
  Options opts, const fs::path & sequence, std::int64_t frame, double offset, bool ascii,
  const fs::path & out, const LogFn & log = {});
/// Checks the recorded output digests, then re-runs the recorded command in
/// a scratch directory and compares digests. Throws kVerification on any
/// mismatch.
void cmd_verify(const fs::path & dir, bool rederive = true, const LogFn & log = {});

/// The six trained ablation configurations, as names of model
/// subdirectories.
std::vector<std::string> ablation_model_names();

}  // namespace lanesynth

#endif  // LANESYNTH__PIPELINE_HPP_
