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

#include "lanesynth/pipeline.hpp"

#include "lanesynth/error.hpp"
#include "lanesynth/io.hpp"
#include "lanesynth/parallel.hpp"
#include "lanesynth/pose_io.hpp"

#include <openssl/evp.h>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <sstream>

namespace lanesynth
{

namespace
{

// Shortest text that reads back to the same double.
std::string fmt(double v)
{
  char buf[40];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

std::string frame_name(std::int64_t id, const char * ext)
{
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%06lld%s", static_cast<long long>(id), ext);
  return buf;
}

void say(const LogFn & log, const std::string & line)
{
  if (log) {
    log(line);
  }
}

int jobs_of(const Options & opts) { return static_cast<int>(std::max<std::int64_t>(1, opts.get_int("run.jobs"))); }

fs::path canonical_input(const fs::path & p)
{
  if (!fs::exists(p)) {
    fail(ErrorCode::kIo, "input " + p.string() + " does not exist");
  }
  return fs::weakly_canonical(p);
}

boost::property_tree::ptree read_ini_file(const fs::path & path)
{
  std::istringstream in(read_file(path));
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error & e) {
    fail(ErrorCode::kParse, path.string() + " line " + std::to_string(e.line()) + ": " + e.message());
  }
  return tree;
}

CloudConfig cloud_from_map(const std::map<std::string, std::string> & values)
{
  Options o;
  for (const auto & [k, v] : values) {
    if (o.has(k)) {
      o.set(k, v);
    }
  }
  return cloud_from(o);
}

/// Runs `body` for an artifact directory: clears stale markers, computes
/// output digests and writes the manifest last.
template <typename Body>
void run_command(const fs::path & out, const std::string & command, const LogFn & log, Body && body)
{
  const auto wall = std::chrono::system_clock::now();
  const auto start = std::chrono::steady_clock::now();
  fs::create_directories(out);
  fs::remove(out / "manifest.ini");
  fs::remove(out / "INCOMPLETE");
  try {
    Manifest m = body();
    m.command = command;
    for (auto & [rel, digest] : m.outputs) {
      digest = sha256_file(out / rel);
    }
    write_file_atomic(out / "manifest.ini", format_manifest(m));
  } catch (const std::exception & e) {
    write_file_atomic(out / "INCOMPLETE", std::string(e.what()) + "\n");
    throw;
  }
  const std::time_t t = std::chrono::system_clock::to_time_t(wall);
  char stamp[64];
  std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  char line[256];
  std::snprintf(line, sizeof(line), "command = %s\nstarted_utc = %s\nseconds = %.3f\n", command.c_str(), stamp, seconds);
  write_file_atomic(out / "run.log", line);
  std::snprintf(line, sizeof(line), "%s finished in %.1f s", command.c_str(), seconds);
  say(log, line);
}

std::vector<RigidTransform> poses_of(const std::vector<StampedPose> & stamped)
{
  std::vector<RigidTransform> out;
  for (const auto & s : stamped) {
    out.push_back(s.pose);
  }
  return out;
}

struct SequenceInfo
{
  CameraIntrinsics intr;
  std::size_t frames{0};
  std::string track;
};

SequenceInfo read_sequence_info(const fs::path & dir)
{
  const fs::path meta = dir / "meta.ini";
  if (!fs::exists(meta)) {
    fail(ErrorCode::kIo, "sequence " + dir.string() + " has no meta.ini (run gen-world first)");
  }
  const auto tree = read_ini_file(meta);
  SequenceInfo info;
  try {
    info.frames = tree.get<std::size_t>("sequence.frames");
    info.track = tree.get<std::string>("sequence.track");
    info.intr.fx = tree.get<double>("camera.fx");
    info.intr.fy = tree.get<double>("camera.fy");
    info.intr.cx = tree.get<double>("camera.cx");
    info.intr.cy = tree.get<double>("camera.cy");
    info.intr.width = tree.get<int>("camera.width");
    info.intr.height = tree.get<int>("camera.height");
  } catch (const boost::property_tree::ptree_error & e) {
    fail(ErrorCode::kParse, meta.string() + ": " + e.what());
  }
  info.intr.validate();
  return info;
}

void adopt_camera(Options & opts, const CameraIntrinsics & intr)
{
  opts.set("camera.fx", fmt(intr.fx));
  opts.set("camera.fy", fmt(intr.fy));
  opts.set("camera.cx", fmt(intr.cx));
  opts.set("camera.cy", fmt(intr.cy));
  opts.set("camera.width", std::to_string(intr.width));
  opts.set("camera.height", std::to_string(intr.height));
}

std::vector<RigidTransform> read_sequence_poses(const fs::path & dir, const std::string & which, std::size_t frames)
{
  if (which != "vo" && which != "gt") {
    fail(ErrorCode::kConfiguration, "label.poses must be 'vo' or 'gt'");
  }
  const fs::path path = dir / ("poses_" + which + ".txt");
  if (!fs::exists(path)) {
    fail(ErrorCode::kIo, "missing poses file " + path.string() + " (needed for label.poses = " + which + ")");
  }
  auto poses = poses_of(read_tum(path));
  if (poses.size() != frames) {
    fail(
      ErrorCode::kParse, path.string() + " holds " + std::to_string(poses.size()) + " poses for " +
                           std::to_string(frames) + " frames");
  }
  return poses;
}

std::vector<FrameRecord> load_records(
  const fs::path & dir, const SequenceInfo & info, const std::vector<RigidTransform> & poses,
  const CloudConfig & cloud, std::size_t first, std::size_t last, int jobs)
{
  std::vector<FrameRecord> out(last - first);
  parallel_for(out.size(), jobs, [&](std::size_t k) {
    const auto i = static_cast<std::int64_t>(first + k);
    const DepthMap depth = read_depth_map(dir / "depth" / frame_name(i, ".dmap"));
    GrayImage intensity;
    if (cloud.edge_filter) {
      intensity = read_pgm(dir / "intensity" / frame_name(i, ".pgm"));
    }
    const FrameId id{i};
    out[k] = FrameRecord{id, poses[first + k], make_local_cloud(info.intr, depth, intensity, cloud, id), 0.0};
  });
  return out;
}

std::string trajectory_dir(std::size_t t, double offset)
{
  char buf[48];
  std::snprintf(buf, sizeof(buf), "t%02zu_%+.4f", t, offset);
  return buf;
}

}  // namespace

// --- option views -----------------------------------------------------------

CameraIntrinsics intrinsics_from(const Options & opts)
{
  CameraIntrinsics c;
  c.fx = opts.get_double("camera.fx");
  c.fy = opts.get_double("camera.fy");
  c.cx = opts.get_double("camera.cx");
  c.cy = opts.get_double("camera.cy");
  c.width = static_cast<int>(opts.get_int("camera.width"));
  c.height = static_cast<int>(opts.get_int("camera.height"));
  c.validate();
  return c;
}

CloudConfig cloud_from(const Options & opts)
{
  CloudConfig c;
  c.max_distance = opts.get_double("cloud.max_distance");
  c.dilation_radius = static_cast<int>(opts.get_int("cloud.dilation_radius"));
  c.scale_factor = opts.get_double("cloud.scale_factor");
  c.edge_filter = opts.get_bool("cloud.edge_filter");
  c.edge_sigma = opts.get_double("cloud.edge_sigma");
  c.edge_low = opts.get_double("cloud.edge_low");
  c.edge_high = opts.get_double("cloud.edge_high");
  c.frame_point_cap = static_cast<int>(opts.get_int("cloud.frame_point_cap"));
  c.target_points = static_cast<int>(opts.get_int("label.n_points"));
  c.validate();
  return c;
}

AugmentConfig augment_from(const Options & opts)
{
  AugmentConfig a;
  if (!opts.get("augment.offsets").empty()) {
    a.offsets = opts.get_doubles("augment.offsets");
  } else {
    const auto count = opts.get_int("augment.offset_count");
    if (count < 0) {
      fail(ErrorCode::kConfiguration, "augment.offset_count must be non-negative");
    }
    a.offsets = AugmentConfig::uniform_offsets(
      static_cast<int>(count), opts.get_double("augment.offset_min"), opts.get_double("augment.offset_max"));
  }
  a.max_lookback = static_cast<int>(opts.get_int("augment.max_lookback"));
  a.counteract = opts.get_bool("augment.counteract");
  a.align = opts.get_bool("augment.align");
  a.coverage_target = opts.get_double("augment.coverage_target");
  a.coverage_cell = static_cast<int>(opts.get_int("augment.coverage_cell"));
  a.max_distance = opts.get_double("cloud.max_distance");
  a.validate();
  return a;
}

LabelConfig label_from(const Options & opts)
{
  LabelConfig l;
  l.lookahead = opts.get_double("label.lookahead");
  l.clamp = opts.get_double("label.clamp");
  l.n_points = static_cast<int>(opts.get_int("label.n_points"));
  l.skip_insufficient_lookback = opts.get_bool("label.skip_insufficient_lookback");
  l.validate();
  return l;
}

ModelConfig model_from(const Options & opts)
{
  ModelConfig m;
  m.point_widths = opts.get_ints("model.point_widths");
  m.head_widths = opts.get_ints("model.head_widths");
  m.output_scale = opts.get_double("model.output_scale");
  m.input_scale = opts.get_double("model.input_scale");
  m.validate();
  return m;
}

TrainConfig train_from(const Options & opts)
{
  TrainConfig t;
  t.learning_rate = opts.get_double("train.learning_rate");
  t.momentum = opts.get_double("train.momentum");
  t.batch_size = static_cast<int>(opts.get_int("train.batch_size"));
  t.epochs = static_cast<int>(opts.get_int("train.epochs"));
  t.max_steps = opts.get_int("train.max_steps");
  t.grad_clip = opts.get_double("train.grad_clip");
  t.validation_fraction = opts.get_double("train.validation_fraction");
  t.validate();
  return t;
}

EpisodeConfig episode_from(const Options & opts)
{
  EpisodeConfig e;
  e.frames = static_cast<int>(opts.get_int("eval.frames"));
  e.speed = opts.get_double("eval.speed");
  e.dt = opts.get_double("eval.dt");
  e.max_steer = opts.get_double("eval.max_steer");
  e.validate();
  return e;
}

TrackSpec load_track(const std::string & name_or_path)
{
  static const std::vector<std::string> presets = {"town", "heldout-a", "heldout-b", "heldout-c",
                                                   "calibration", "corridor"};
  if (std::find(presets.begin(), presets.end(), name_or_path) != presets.end()) {
    return preset_track(name_or_path);
  }
  if (!fs::exists(name_or_path)) {
    fail(ErrorCode::kConfiguration, "'" + name_or_path + "' is neither a track preset nor a spec file");
  }
  return parse_track_spec(read_file(name_or_path));
}

std::uint64_t resolve_seed(Options & opts)
{
  if (opts.get("run.seed").empty()) {
    std::random_device rd;
    const std::uint64_t seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    opts.set("run.seed", std::to_string(seed));
  }
  return opts.get_uint("run.seed");
}

std::uint64_t derived_seed(std::uint64_t seed, int stream)
{
  return sample_seed(seed, static_cast<std::size_t>(stream), 0);
}

// --- digests and manifests ---------------------------------------------------

std::string sha256_hex(const std::string & bytes)
{
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    fail(ErrorCode::kInternal, "SHA-256 computation failed");
  }
  static const char * hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

std::string sha256_file(const fs::path & path) { return sha256_hex(read_file(path)); }

std::string format_manifest(const Manifest & m)
{
  std::ostringstream out;
  out << "[manifest]\n"
      << "command = " << m.command << "\n"
      << "tool = lanesynth\n"
      << "version = " << kToolVersion << "\n"
      << "checkpoint_version = " << kCheckpointVersion << "\n"
      << "seed = " << m.seed << "\n";
  out << "\n[inputs]\n";
  for (const auto & [k, v] : m.inputs) {
    out << k << " = " << v << "\n";
  }
  std::string current;
  for (const auto & [key, value] : m.config.values()) {
    if (key == "run.jobs") {
      continue;
    }
    const auto dot = key.find('.');
    const std::string sec = key.substr(0, dot);
    if (sec != current) {
      out << "\n[config." << sec << "]\n";
      current = sec;
    }
    out << key.substr(dot + 1) << " = " << value << "\n";
  }
  out << "\n[outputs]\n";
  for (const auto & [k, v] : m.outputs) {
    out << k << " = " << v << "\n";
  }
  return out.str();
}

Manifest parse_manifest(const std::string & text)
{
  std::istringstream in(text);
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error & e) {
    fail(ErrorCode::kParse, "manifest line " + std::to_string(e.line()) + ": " + e.message());
  }
  Manifest m;
  for (const auto & [section, body] : tree) {
    if (section == "manifest") {
      for (const auto & [k, v] : body) {
        const auto value = v.get_value<std::string>();
        if (k == "command") {
          m.command = value;
        } else if (k == "seed") {
          m.seed = std::stoull(value);
        } else if (k == "checkpoint_version" && value != std::to_string(kCheckpointVersion)) {
          fail(ErrorCode::kIncompatibleVersion, "manifest written for checkpoint version " + value);
        }
      }
    } else if (section == "inputs") {
      for (const auto & [k, v] : body) {
        m.inputs.emplace_back(k, v.get_value<std::string>());
      }
    } else if (section == "outputs") {
      for (const auto & [k, v] : body) {
        m.outputs.emplace_back(k, v.get_value<std::string>());
      }
    } else if (section.rfind("config.", 0) == 0) {
      const std::string sec = section.substr(7);
      for (const auto & [k, v] : body) {
        m.config.set(sec + "." + k, v.get_value<std::string>());
      }
    }
  }
  if (m.command.empty()) {
    fail(ErrorCode::kParse, "manifest has no command");
  }
  return m;
}

Manifest read_manifest(const fs::path & dir)
{
  const fs::path path = dir / "manifest.ini";
  if (!fs::exists(path)) {
    if (fs::exists(dir / "INCOMPLETE")) {
      fail(ErrorCode::kIo, dir.string() + " holds an incomplete run: " + read_file(dir / "INCOMPLETE"));
    }
    fail(ErrorCode::kIo, "no manifest.ini in " + dir.string());
  }
  return parse_manifest(read_file(path));
}

std::vector<std::string> ablation_model_names()
{
  return {"ours", "single", "shift-only", "unfiltered", "unlimited-distance", "no-counteraction"};
}

// --- commands -----------------------------------------------------------------

void cmd_gen_world(Options opts, const fs::path & out, const LogFn & log)
{
  run_command(out, "gen-world", log, [&] {
    Manifest m;
    m.seed = resolve_seed(opts);
    const std::string track_name = opts.get("world.track");
    const TrackSpec spec = load_track(track_name);
    if (fs::exists(track_name)) {
      m.inputs.emplace_back("track", fs::weakly_canonical(track_name).string());
      m.inputs.emplace_back("track_sha256", sha256_file(track_name));
    }
    const Scene scene(spec);
    const CameraIntrinsics intr = intrinsics_from(opts);
    const double interval = opts.get_double("world.frame_interval");
    const auto gt = sample_reference(scene.track(), opts.get_double("world.spacing"));
    PoseNoiseModel noise;
    noise.translation_sigma = opts.get_double("world.noise_translation");
    noise.rotation_sigma = opts.get_double("world.noise_rotation");
    noise.seed = derived_seed(m.seed, 1);
    const auto vo = perturb(gt, noise);
    say(log, "rendering " + std::to_string(gt.size()) + " frames of track " + track_name);

    for (const char * sub : {"depth", "intensity", "edges"}) {
      fs::create_directories(out / sub);
    }
    parallel_for(gt.size(), jobs_of(opts), [&](std::size_t i) {
      const RenderedFrame f = render(scene, gt[i], intr);
      const auto id = static_cast<std::int64_t>(i);
      write_depth_map(out / "depth" / frame_name(id, ".dmap"), f.depth);
      write_pgm(out / "intensity" / frame_name(id, ".pgm"), f.intensity);
      write_pgm(out / "edges" / frame_name(id, ".pgm"), f.edge_truth);
    });

    std::vector<StampedPose> gt_s;
    std::vector<StampedPose> vo_s;
    for (std::size_t i = 0; i < gt.size(); ++i) {
      gt_s.push_back(StampedPose{interval * static_cast<double>(i), gt[i]});
      vo_s.push_back(StampedPose{interval * static_cast<double>(i), vo[i]});
    }
    write_tum(out / "poses_gt.txt", gt_s);
    write_tum(out / "poses_vo.txt", vo_s);
    write_file_atomic(out / "track.txt", format_track_spec(spec));
    std::ostringstream meta;
    meta << "[sequence]\nframes = " << gt.size() << "\ntrack = " << track_name
         << "\nspacing = " << fmt(opts.get_double("world.spacing")) << "\nframe_interval = " << fmt(interval)
         << "\n\n[camera]\nfx = " << fmt(intr.fx) << "\nfy = " << fmt(intr.fy) << "\ncx = " << fmt(intr.cx)
         << "\ncy = " << fmt(intr.cy) << "\nwidth = " << intr.width << "\nheight = " << intr.height << "\n";
    write_file_atomic(out / "meta.ini", meta.str());

    for (const char * f : {"meta.ini", "track.txt", "poses_gt.txt", "poses_vo.txt"}) {
      m.outputs.emplace_back(f, "");
    }
    for (std::size_t i = 0; i < gt.size(); ++i) {
      const auto id = static_cast<std::int64_t>(i);
      m.outputs.emplace_back("depth/" + frame_name(id, ".dmap"), "");
      m.outputs.emplace_back("intensity/" + frame_name(id, ".pgm"), "");
      m.outputs.emplace_back("edges/" + frame_name(id, ".pgm"), "");
    }
    m.config = opts;
    return m;
  });
}

void cmd_gen_dataset(Options opts, const fs::path & sequence, const fs::path & out, const LogFn & log)
{
  run_command(out, "gen-dataset", log, [&] {
    Manifest m;
    m.seed = resolve_seed(opts);
    const fs::path seq = canonical_input(sequence);
    const Manifest seq_manifest = read_manifest(seq);
    m.inputs.emplace_back("sequence", seq.string());
    m.inputs.emplace_back("sequence_manifest_sha256", sha256_file(seq / "manifest.ini"));

    const SequenceInfo info = read_sequence_info(seq);
    adopt_camera(opts, info.intr);
    const CloudConfig cloud = cloud_from(opts);
    const AugmentConfig augment = augment_from(opts);
    LabelConfig label = label_from(opts);
    label.seed = derived_seed(m.seed, 2);
    const auto poses = read_sequence_poses(seq, opts.get("label.poses"), info.frames);
    const int jobs = jobs_of(opts);

    say(log, "building local clouds for " + std::to_string(info.frames) + " frames");
    const auto records = load_records(seq, info, poses, cloud, 0, info.frames, jobs);
    const Labeler labeler(poses, label);

    struct Row
    {
      RigidTransform pose;
      std::optional<LabeledSample> sample;
    };
    const std::size_t n_traj = augment.offsets.size() + 1;
    std::vector<std::vector<Row>> rows(n_traj, std::vector<Row>(records.size()));
    std::vector<std::string> dirs;
    for (std::size_t t = 0; t < n_traj; ++t) {
      const double offset = t == 0 ? 0.0 : augment.offsets[t - 1];
      dirs.push_back(trajectory_dir(t, offset));
      fs::create_directories(out / dirs.back());
    }
    say(log, "synthesizing " + std::to_string(n_traj) + " trajectories");
    for_each_synthesized(records, info.intr, augment, jobs, [&](std::size_t t, std::size_t i, auto && r) {
      const double offset = t == 0 ? 0.0 : augment.offsets[t - 1];
      Row & row = rows[t][i];
      row.pose = compose(records[i].pose, lateral_shift(offset));
      if (!r) {
        return;
      }
      row.sample = labeler.label(*r, offset, t);
      if (row.sample) {
        write_ply(
          out / dirs[t] / frame_name(records[i].id.value, ".ply"), row.sample->cloud,
          PlyFormat::kBinaryLittleEndian);
      }
    });

    std::string dataset = "trajectory_offset,frame_id,future_frame_id,delta_x,ply_path\n";
    std::string summary = "trajectory,offset,samples,dropped,clamped\n";
    std::size_t total_clamped = 0;
    for (std::size_t t = 0; t < n_traj; ++t) {
      const double offset = t == 0 ? 0.0 : augment.offsets[t - 1];
      std::string frames = "frame_id,offset,r00,r01,r02,t0,r10,r11,r12,t1,r20,r21,r22,t2,drop\n";
      std::size_t samples = 0;
      std::size_t clamped = 0;
      for (std::size_t i = 0; i < records.size(); ++i) {
        const Row & row = rows[t][i];
        frames += std::to_string(records[i].id.value) + "," + fmt(offset);
        for (double v : row.pose.row_major()) {
          frames += "," + fmt(v);
        }
        frames += row.sample ? ",0\n" : ",1\n";
        if (row.sample) {
          const std::string ply = dirs[t] + "/" + frame_name(records[i].id.value, ".ply");
          dataset += fmt(offset) + "," + std::to_string(records[i].id.value) + "," +
                     std::to_string(row.sample->future_frame.value) + "," + fmt(row.sample->delta_x) + "," +
                     ply + "\n";
          m.outputs.emplace_back(ply, "");
          ++samples;
          clamped += row.sample->clamped ? 1 : 0;
        }
      }
      write_file_atomic(out / dirs[t] / "frames.csv", frames);
      m.outputs.emplace_back(dirs[t] + "/frames.csv", "");
      summary += std::to_string(t) + "," + fmt(offset) + "," + std::to_string(samples) + "," +
                 std::to_string(records.size() - samples) + "," + std::to_string(clamped) + "\n";
      total_clamped += clamped;
    }
    if (total_clamped > 0) {
      say(log, "warning: " + std::to_string(total_clamped) + " labels clamped to +-" + fmt(label.clamp) + " m");
    }
    write_file_atomic(out / "dataset.csv", dataset);
    write_file_atomic(out / "summary.csv", summary);
    m.outputs.emplace_back("dataset.csv", "");
    m.outputs.emplace_back("summary.csv", "");
    // Settings that belong to the sequence, not to this run.
    for (const auto & [k, v] : seq_manifest.config.section("world")) {
      opts.set("world." + k, v);
    }
    m.config = opts;
    return m;
  });
}

namespace
{

std::vector<LabeledSample> read_dataset(const fs::path & dir)
{
  const fs::path csv = dir / "dataset.csv";
  if (!fs::exists(csv)) {
    fail(ErrorCode::kIo, "dataset " + dir.string() + " has no dataset.csv");
  }
  std::istringstream in(read_file(csv));
  std::string line;
  std::getline(in, line);
  std::vector<LabeledSample> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) {
      f.push_back(item);
    }
    if (f.size() != 5) {
      fail(ErrorCode::kParse, csv.string() + " line " + std::to_string(line_no) + ": expected 5 fields");
    }
    LabeledSample s;
    try {
      s.trajectory_offset = std::stod(f[0]);
      s.frame = FrameId{std::stoll(f[1])};
      s.future_frame = FrameId{std::stoll(f[2])};
      s.delta_x = std::stod(f[3]);
    } catch (const std::exception &) {
      fail(ErrorCode::kParse, csv.string() + " line " + std::to_string(line_no) + ": bad number");
    }
    s.cloud = read_ply(dir / f[4]);
    s.cloud.frame = s.frame;
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

void cmd_train(Options opts, const fs::path & dataset, const fs::path & out, const LogFn & log)
{
  run_command(out, "train", log, [&] {
    Manifest m;
    m.seed = resolve_seed(opts);
    const fs::path dir = canonical_input(dataset);
    const Manifest dm = read_manifest(dir);
    if (dm.command != "gen-dataset") {
      fail(ErrorCode::kConfiguration, dir.string() + " is not a dataset (manifest command " + dm.command + ")");
    }
    m.inputs.emplace_back("dataset", dir.string());
    m.inputs.emplace_back("dataset_manifest_sha256", sha256_file(dir / "manifest.ini"));

    const auto data = read_dataset(dir);
    say(log, "training on " + std::to_string(data.size()) + " samples");
    PointNetLite net(model_from(opts), derived_seed(m.seed, 3));
    TrainConfig tc = train_from(opts);
    tc.seed = derived_seed(m.seed, 4);
    const TrainResult result = train(net, data, tc, [&](const EpochStats & e) {
      char buf[160];
      std::snprintf(
        buf, sizeof(buf), "epoch %d  steps %lld  train %.5f  validation %.5f", e.epoch,
        static_cast<long long>(e.steps), e.train_mse, e.validation_mse);
      say(log, buf);
    });

    Checkpoint ckpt;
    ckpt.net = net;
    // Input pipeline the network was trained with; evaluation rebuilds it.
    for (const char * sec : {"cloud", "camera"}) {
      for (const auto & [k, v] : dm.config.section(sec)) {
        ckpt.metadata[std::string(sec) + "." + k] = v;
      }
    }
    ckpt.metadata["label.n_points"] = dm.config.get("label.n_points");
    ckpt.metadata["label.lookahead"] = dm.config.get("label.lookahead");
    ckpt.metadata["train.steps"] = std::to_string(result.steps);
    save_checkpoint(out / "model.lsnn", ckpt);
    write_file_atomic(out / "loss.csv", format_loss_history(result.history));
    m.outputs.emplace_back("model.lsnn", "");
    m.outputs.emplace_back("loss.csv", "");
    m.config = opts;
    return m;
  });
}

void cmd_evaluate(Options opts, const std::vector<ModelSpec> & models, const fs::path & out, const LogFn & log)
{
  run_command(out, "evaluate", log, [&] {
    Manifest m;
    m.seed = resolve_seed(opts);
    const auto track_names = opts.get_strings("eval.tracks");
    if (track_names.empty()) {
      fail(ErrorCode::kConfiguration, "evaluation track set is empty");
    }
    const bool oracle = opts.get_bool("eval.oracle");
    if (models.empty() && !oracle) {
      fail(ErrorCode::kConfiguration, "nothing to evaluate: no models and the oracle is disabled");
    }
    const CameraIntrinsics intr = intrinsics_from(opts);
    const EpisodeConfig episode = episode_from(opts);
    const double lookahead = opts.get_double("eval.lookahead");

    double alpha = 0.0;
    std::string calibration = "alpha,ratio_on_lane,mean_abs_offset,selected\n";
    if (opts.get("eval.alpha") == "auto") {
      const Scene cal(load_track(opts.get("eval.calibration_track")));
      const auto grid = log_space(
        opts.get_double("eval.alpha_min"), opts.get_double("eval.alpha_max"),
        static_cast<int>(opts.get_int("eval.alpha_count")));
      const auto c = calibrate_alpha(
        cal, intr, grid, lookahead, static_cast<int>(opts.get_int("eval.calibration_starts")), episode);
      alpha = c.alpha;
      for (std::size_t i = 0; i < c.grid.size(); ++i) {
        calibration += fmt(c.grid[i]) + "," + fmt(c.ratios[i]) + "," + fmt(c.mean_abs_offsets[i]) + "," +
                       (c.grid[i] == alpha ? "1" : "0") + "\n";
      }
    } else {
      alpha = opts.get_double("eval.alpha");
      calibration += fmt(alpha) + ",,,1\n";
    }
    say(log, "steering gain alpha = " + fmt(alpha));

    std::vector<std::unique_ptr<Controller>> controllers;
    for (const auto & spec : models) {
      const fs::path path = canonical_input(spec.path);
      m.inputs.emplace_back("model." + spec.name, path.string());
      m.inputs.emplace_back("model." + spec.name + ".sha256", sha256_file(path));
      Checkpoint ckpt = load_checkpoint(path);
      const CloudConfig cloud = cloud_from_map(ckpt.metadata);
      const int n_points = std::stoi(ckpt.metadata.count("label.n_points") ? ckpt.metadata["label.n_points"] : "256");
      controllers.push_back(std::make_unique<ModelController>(
        std::make_shared<const PointNetLite>(std::move(ckpt.net)), cloud, n_points, alpha, spec.name));
    }
    if (oracle) {
      controllers.push_back(std::make_unique<OracleController>(SteeringParams{alpha, lookahead}));
    }

    std::vector<std::unique_ptr<Scene>> scenes;
    SweepSpec sweep_spec;
    const int starts = static_cast<int>(opts.get_int("eval.starts_per_track"));
    for (const auto & name : track_names) {
      const std::string label = fs::exists(name) ? fs::path(name).stem().string() : name;
      scenes.push_back(std::make_unique<Scene>(load_track(name)));
      sweep_spec.tracks.emplace_back(label, scenes.back().get());
      for (const auto & s : spread_starts(label, scenes.back()->track(), starts, episode.frames * episode.speed * episode.dt)) {
        sweep_spec.starts.push_back(s);
      }
    }
    for (const auto & c : controllers) {
      sweep_spec.controllers.push_back(c.get());
    }
    sweep_spec.perturbations = opts.get_doubles("eval.perturbations");
    sweep_spec.seeds = {derived_seed(m.seed, 5)};
    sweep_spec.episode = episode;
    sweep_spec.jobs = jobs_of(opts);
    say(
      log, "running " + std::to_string(sweep_spec.controllers.size() * sweep_spec.starts.size() *
                                       sweep_spec.perturbations.size()) + " episodes");
    const auto rows = sweep(sweep_spec, intr);
    const auto summary = summarize(rows);

    write_file_atomic(out / "report.csv", format_report_csv(rows));
    write_file_atomic(out / "summary.csv", format_summary_csv(summary));
    write_file_atomic(out / "calibration.csv", calibration);

    std::string table = "controller,track,perturbation,mean_ratio_on_lane\n";
    for (const auto * c : sweep_spec.controllers) {
      for (const auto & [track, scene] : sweep_spec.tracks) {
        for (double level : sweep_spec.perturbations) {
          double sum = 0.0;
          int n = 0;
          for (const auto & r : rows) {
            if (r.controller == c->name() && r.track == track && r.perturbation == level) {
              sum += r.ratio_on_lane;
              ++n;
            }
          }
          table += c->name() + "," + track + "," + fmt(level) + "," + fmt(n ? sum / n : 0.0) + "\n";
        }
      }
    }
    write_file_atomic(out / "table.csv", table);

    std::string curves = "controller";
    for (double level : sweep_spec.perturbations) {
      curves += ",p=" + fmt(level);
    }
    curves += "\n";
    for (const auto * c : sweep_spec.controllers) {
      curves += c->name();
      for (double level : sweep_spec.perturbations) {
        curves += "," + fmt(mean_ratio(rows, c->name(), level));
      }
      curves += "\n";
    }
    write_file_atomic(out / "perturbation.csv", curves);
    for (const char * f : {"report.csv", "summary.csv", "table.csv", "perturbation.csv", "calibration.csv"}) {
      m.outputs.emplace_back(f, "");
    }

    if (opts.get_bool("eval.svg")) {
      fs::create_directories(out / "bev");
      std::map<std::string, const Scene *> by_name(sweep_spec.tracks.begin(), sweep_spec.tracks.end());
      for (const auto & r : rows) {
        char name[256];
        std::snprintf(
          name, sizeof(name), "bev/%s__%s__s%d__p%.3f.svg", r.controller.c_str(), r.track.c_str(), r.start_idx,
          r.perturbation);
        write_file_atomic(out / name, render_bev_svg(by_name.at(r.track)->track(), r.episode));
        m.outputs.emplace_back(name, "");
      }
    }
    opts.set("eval.alpha", opts.get("eval.alpha"));
    m.config = opts;
    return m;
  });
}

void cmd_export_ply(
  Options opts, const fs::path & sequence, std::int64_t frame, double offset, bool ascii, const fs::path & out,
  const LogFn & log)
{
  run_command(out, "export-ply", log, [&] {
    Manifest m;
    m.seed = resolve_seed(opts);
    const fs::path seq = canonical_input(sequence);
    read_manifest(seq);
    m.inputs.emplace_back("sequence", seq.string());
    m.inputs.emplace_back("sequence_manifest_sha256", sha256_file(seq / "manifest.ini"));
    m.inputs.emplace_back("frame", std::to_string(frame));
    m.inputs.emplace_back("offset", fmt(offset));
    m.inputs.emplace_back("ascii", ascii ? "1" : "0");

    const SequenceInfo info = read_sequence_info(seq);
    adopt_camera(opts, info.intr);
    if (frame < 0 || static_cast<std::size_t>(frame) >= info.frames) {
      fail(ErrorCode::kInvalidArgument, "frame " + std::to_string(frame) + " is outside the sequence");
    }
    const CloudConfig cloud = cloud_from(opts);
    AugmentConfig augment = augment_from(opts);
    const auto poses = read_sequence_poses(seq, opts.get("label.poses"), info.frames);
    const auto idx = static_cast<std::size_t>(frame);
    const std::size_t first = offset != 0.0 ? idx - std::min<std::size_t>(idx, augment.max_lookback) : idx;
    const auto records = load_records(seq, info, poses, cloud, first, idx + 1, jobs_of(opts));
    PointCloud result = records.back().cloud;
    if (offset != 0.0) {
      result = synthesize_frame(records, records.size() - 1, offset, info.intr, augment).record.cloud;
    }
    const std::string name = "frame_" + frame_name(frame, ".ply");
    write_ply(out / name, result, ascii ? PlyFormat::kAscii : PlyFormat::kBinaryLittleEndian);
    say(log, "wrote " + std::to_string(result.size()) + " points");
    m.outputs.emplace_back(name, "");
    m.config = opts;
    return m;
  });
}

void cmd_verify(const fs::path & dir, bool rederive, const LogFn & log)
{
  const Manifest m = read_manifest(dir);
  std::vector<std::string> problems;
  for (const auto & [rel, digest] : m.outputs) {
    if (!fs::exists(dir / rel)) {
      problems.push_back("missing " + rel);
    } else if (sha256_file(dir / rel) != digest) {
      problems.push_back("digest mismatch " + rel);
    }
  }
  say(log, "checked " + std::to_string(m.outputs.size()) + " recorded outputs");
  if (problems.empty() && rederive) {
    std::map<std::string, std::string> in(m.inputs.begin(), m.inputs.end());
    auto input = [&](const std::string & k) {
      if (!in.count(k)) {
        fail(ErrorCode::kVerification, "manifest lacks input '" + k + "'");
      }
      return in.at(k);
    };
    std::mt19937_64 rng(std::random_device{}());
    const fs::path scratch = fs::temp_directory_path() / ("lanesynth-verify-" + std::to_string(rng() % 1000000007ULL));
    Options opts = m.config;
    struct Cleanup
    {
      fs::path p;
      ~Cleanup()
      {
        std::error_code ec;
        fs::remove_all(p, ec);
      }
    } cleanup{scratch};
    say(log, "re-deriving " + m.command + " into " + scratch.string());
    if (m.command == "gen-world") {
      cmd_gen_world(opts, scratch);
    } else if (m.command == "gen-dataset") {
      cmd_gen_dataset(opts, input("sequence"), scratch);
    } else if (m.command == "train") {
      cmd_train(opts, input("dataset"), scratch);
    } else if (m.command == "evaluate") {
      std::vector<ModelSpec> models;
      for (const auto & [k, v] : m.inputs) {
        if (k.rfind("model.", 0) == 0 && k.find(".sha256") == std::string::npos) {
          models.push_back(ModelSpec{k.substr(6), v});
        }
      }
      cmd_evaluate(opts, models, scratch);
    } else if (m.command == "export-ply") {
      cmd_export_ply(
        opts, input("sequence"), std::stoll(input("frame")), std::stod(input("offset")), input("ascii") == "1",
        scratch);
    } else {
      fail(ErrorCode::kVerification, "unknown command '" + m.command + "' in manifest");
    }
    const Manifest again = read_manifest(scratch);
    std::map<std::string, std::string> fresh(again.outputs.begin(), again.outputs.end());
    for (const auto & [rel, digest] : m.outputs) {
      if (!fresh.count(rel)) {
        problems.push_back("re-derived run did not produce " + rel);
      } else if (fresh.at(rel) != digest) {
        problems.push_back("re-derived digest differs for " + rel);
      }
    }
    if (fresh.size() != m.outputs.size()) {
      problems.push_back("re-derived run produced a different number of outputs");
    }
  }
  if (!problems.empty()) {
    std::string msg = std::to_string(problems.size()) + " verification problem(s):";
    for (std::size_t i = 0; i < problems.size() && i < 10; ++i) {
      msg += "\n  " + problems[i];
    }
    fail(ErrorCode::kVerification, msg);
  }
  say(log, "verified " + dir.string());
}

}  // namespace lanesynth
