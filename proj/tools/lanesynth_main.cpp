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

#include "lanesynth/lanesynth.h"

#include <CLI11.hpp>

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

namespace
{

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

int exit_code(ls_status s)
{
  switch (s) {
    case LS_OK:
      return 0;
    case LS_INVALID_ARGUMENT:
    case LS_CONFIGURATION:
      return kExitUsage;
    case LS_INTERNAL:
      return kExitInternal;
    default:
      return kExitData;
  }
}

struct Failure
{
  ls_status status;
};

void check(ls_status s)
{
  if (s != LS_OK) {
    throw Failure{s};
  }
}

class OptionSet
{
public:
  OptionSet() { check(ls_options_create(&h_)); }
  ~OptionSet() { ls_options_destroy(h_); }
  OptionSet(const OptionSet &) = delete;
  OptionSet & operator=(const OptionSet &) = delete;

  void set(const std::string & key, const std::string & value) { check(ls_options_set(h_, key.c_str(), value.c_str())); }
  void load(const std::string & path) { check(ls_options_load_file(h_, path.c_str())); }
  const ls_options * get() const { return h_; }

private:
  ls_options * h_{nullptr};
};

std::string join(const std::vector<double> & v)
{
  std::string out;
  for (double x : v) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof(buf), x);
    out += (out.empty() ? "" : ",") + std::string(buf, r.ptr);
  }
  return out;
}

void log_line(const char * line, void *) { std::fprintf(stderr, "%s\n", line); }

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"lanesynth: lane keeping data synthesis from shifted point clouds"};
  app.set_version_flag("--version", std::string(ls_version()));
  app.require_subcommand(1);

  std::string seed;
  std::string config;
  std::string out;
  int jobs = 0;
  bool quiet = false;
  std::vector<std::string> sets;

  auto common = [&](CLI::App * sub, bool needs_out) {
    sub->add_option("--seed", seed, "Run seed (drawn and recorded when omitted)");
    sub->add_option("--config", config, "INI file with option overrides")->check(CLI::ExistingFile);
    auto * o = sub->add_option("--out", out, "Output directory");
    if (needs_out) {
      o->required();
    }
    sub->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--set", sets, "Override one option, section.key=value")->take_all();
    sub->add_flag("--quiet,-q", quiet, "No progress output");
  };

  auto * gw = app.add_subcommand("gen-world", "Render a sequence with ground truth and odometry poses");
  common(gw, true);
  std::string track;
  gw->add_option("--track", track, "Track preset or spec file");

  auto * gd = app.add_subcommand("gen-dataset", "Build a labeled dataset from a sequence");
  common(gd, true);
  std::string sequence;
  std::string poses;
  bool no_align = false;
  bool no_edge = false;
  bool no_counteract = false;
  bool single = false;
  double max_distance = 0.0;
  std::vector<double> offsets;
  gd->add_option("sequence", sequence, "Sequence directory from gen-world")->required();
  gd->add_option("--poses", poses, "Poses used for labels and alignment")->check(CLI::IsMember({"gt", "vo"}));
  gd->add_flag("--no-align", no_align, "Shift and crop without merging previous frames");
  gd->add_flag("--no-edge-filter", no_edge, "Keep every pixel instead of edge pixels");
  gd->add_flag("--no-counteract", no_counteract, "Keep previous-frame points that land inside the image");
  gd->add_flag("--single", single, "Reference trajectory only");
  auto * md = gd->add_option("--max-distance", max_distance, "Cloud distance limit in meters (inf allowed)");
  gd->add_option("--offsets", offsets, "Explicit lateral offsets in meters")->delimiter(',');

  auto * tr = app.add_subcommand("train", "Train a model on a dataset");
  common(tr, true);
  std::string dataset;
  long long max_steps = -1;
  int epochs = 0;
  tr->add_option("dataset", dataset, "Dataset directory from gen-dataset")->required();
  tr->add_option("--max-steps", max_steps, "Stop after this many optimizer steps (0 = epochs only)");
  tr->add_option("--epochs", epochs, "Training epochs")->check(CLI::PositiveNumber);

  auto * ev = app.add_subcommand("evaluate", "Closed-loop evaluation on tracks");
  common(ev, true);
  std::vector<std::string> models;
  std::string preset;
  std::string models_dir;
  std::vector<double> perturb;
  std::vector<std::string> tracks;
  int starts = 0;
  std::string alpha;
  bool no_oracle = false;
  ev->add_option("--model", models, "Model as name=path/to/model.lsnn")->take_all();
  ev->add_option("--preset", preset, "Model set preset")->check(CLI::IsMember({"ablation"}));
  ev->add_option("--models-dir", models_dir, "Directory holding <name>/model.lsnn for a preset");
  ev->add_option("--perturb", perturb, "Steering perturbation levels")->delimiter(',');
  ev->add_option("--tracks", tracks, "Tracks (presets or spec files)")->delimiter(',');
  ev->add_option("--starts", starts, "Start positions per track")->check(CLI::PositiveNumber);
  ev->add_option("--alpha", alpha, "Steering gain, or 'auto'");
  ev->add_flag("--no-oracle", no_oracle, "Skip the ground-truth controller");

  auto * ex = app.add_subcommand("export-ply", "Write one frame's (optionally shifted) cloud as PLY");
  common(ex, true);
  std::string ex_sequence;
  long long frame = 0;
  double offset = 0.0;
  bool ascii = false;
  ex->add_option("sequence", ex_sequence, "Sequence directory")->required();
  ex->add_option("--frame", frame, "Frame index")->required();
  ex->add_option("--offset", offset, "Lateral shift in meters");
  ex->add_flag("--ascii", ascii, "ASCII instead of binary PLY");

  auto * vf = app.add_subcommand("verify", "Check digests and re-derive an artifact directory");
  std::string artifact;
  bool digests_only = false;
  vf->add_option("dir", artifact, "Artifact directory")->required();
  vf->add_flag("--digests-only", digests_only, "Skip re-running the recorded command");
  vf->add_flag("--quiet,-q", quiet, "No progress output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError & e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  if (!quiet) {
    ls_set_log_callback(log_line, nullptr);
  }

  try {
    if (vf->parsed()) {
      check(ls_verify(artifact.c_str(), digests_only ? 0 : 1));
      std::printf("ok %s\n", artifact.c_str());
      return 0;
    }

    OptionSet opts;
    if (!config.empty()) {
      opts.load(config);
    }
    for (const auto & s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) {
        std::fprintf(stderr, "error: --set expects section.key=value, got '%s'\n", s.c_str());
        return kExitUsage;
      }
      opts.set(s.substr(0, eq), s.substr(eq + 1));
    }
    if (!seed.empty()) {
      opts.set("run.seed", seed);
    }
    if (jobs > 0) {
      opts.set("run.jobs", std::to_string(jobs));
    }

    if (gw->parsed()) {
      if (!track.empty()) {
        opts.set("world.track", track);
      }
      check(ls_gen_world(opts.get(), out.c_str()));
    } else if (gd->parsed()) {
      if (!poses.empty()) {
        opts.set("label.poses", poses);
      }
      if (no_align) {
        opts.set("augment.align", "false");
      }
      if (no_edge) {
        opts.set("cloud.edge_filter", "false");
      }
      if (no_counteract) {
        opts.set("augment.counteract", "false");
      }
      if (md->count() > 0) {
        opts.set("cloud.max_distance", join({max_distance}));
      }
      if (!offsets.empty()) {
        opts.set("augment.offsets", join(offsets));
      }
      if (single) {
        opts.set("augment.offsets", "");
        opts.set("augment.offset_count", "0");
      }
      check(ls_gen_dataset(opts.get(), sequence.c_str(), out.c_str()));
    } else if (tr->parsed()) {
      if (max_steps >= 0) {
        opts.set("train.max_steps", std::to_string(max_steps));
      }
      if (epochs > 0) {
        opts.set("train.epochs", std::to_string(epochs));
      }
      check(ls_train(opts.get(), dataset.c_str(), out.c_str()));
    } else if (ev->parsed()) {
      if (!preset.empty()) {
        if (models_dir.empty()) {
          std::fprintf(stderr, "error: --preset ablation needs --models-dir\n");
          return kExitUsage;
        }
        for (const char * name :
             {"ours", "single", "shift-only", "unfiltered", "unlimited-distance", "no-counteraction"}) {
          models.push_back(std::string(name) + "=" + (std::filesystem::path(models_dir) / name / "model.lsnn").string());
        }
      }
      if (!perturb.empty()) {
        opts.set("eval.perturbations", join(perturb));
      }
      if (!tracks.empty()) {
        std::string t;
        for (const auto & s : tracks) {
          t += (t.empty() ? "" : ",") + s;
        }
        opts.set("eval.tracks", t);
      }
      if (starts > 0) {
        opts.set("eval.starts_per_track", std::to_string(starts));
      }
      if (!alpha.empty()) {
        opts.set("eval.alpha", alpha);
      }
      if (no_oracle) {
        opts.set("eval.oracle", "false");
      }
      std::vector<const char *> specs;
      for (const auto & m : models) {
        specs.push_back(m.c_str());
      }
      check(ls_evaluate(opts.get(), specs.data(), specs.size(), out.c_str()));
    } else if (ex->parsed()) {
      check(ls_export_ply(opts.get(), ex_sequence.c_str(), frame, offset, ascii ? 1 : 0, out.c_str()));
    }
  } catch (const Failure & f) {
    std::fprintf(stderr, "error (%s): %s\n", ls_status_string(f.status), ls_last_error_message());
    return exit_code(f.status);
  }
  return 0;
}
