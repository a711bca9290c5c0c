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

// Acceptance checks. One PASS/FAIL line per criterion; exit status 1 when
// any criterion fails. Pass criterion numbers as arguments to run a subset.

#include "lanesynth/augmentation.hpp"
#include "lanesynth/depthcloud.hpp"
#include "lanesynth/error.hpp"
#include "lanesynth/experiment.hpp"
#include "lanesynth/io.hpp"
#include "lanesynth/labeling.hpp"
#include "lanesynth/model.hpp"
#include "lanesynth/pipeline.hpp"
#include "lanesynth/simulator.hpp"
#include "lanesynth/synthworld.hpp"
#include "../oracles.hpp"
#include "../test_util.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

using namespace lanesynth;
namespace lt = lanesynth::testing;

namespace
{

struct Outcome
{
  bool pass{false};
  std::string detail;
};

std::string fmt(const char * f, auto... args)
{
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------
// Rendered sequence shared by the augmentation and labeling checks.

const char * kWindingTrack =
  "lane_width = 3.5\n"
  "segment straight 30\n"
  "segment arc 40 50\n"
  "segment straight 30\n"
  "segment arc 60 -40\n"
  "segment straight 25\n";

struct Sequence
{
  TrackSpec spec;
  std::unique_ptr<Scene> scene;
  CameraIntrinsics intr;
  std::vector<RigidTransform> gt;
  std::vector<FrameRecord> exact;  // records carry ground-truth poses
  std::vector<FrameRecord> odometry;  // same clouds, drifting poses
};

const Sequence & sequence()
{
  static const Sequence seq = [] {
    Sequence s;
    s.spec = parse_track_spec(std::string(kWindingTrack));
    s.scene = std::make_unique<Scene>(s.spec);
    s.gt = sample_reference(s.scene->track(), 1.0);
    PoseNoiseModel noise;
    noise.seed = 7;
    const auto vo = perturb(s.gt, noise);
    std::vector<double> stamps(s.gt.size());
    for (std::size_t i = 0; i < stamps.size(); ++i) {
      stamps[i] = 0.1 * static_cast<double>(i);
    }
    CloudConfig cloud;
    cloud.frame_point_cap = 16384;
    s.exact = make_frame_records(*s.scene, s.intr, s.gt, s.gt, stamps, {cloud}, 1).front();
    s.odometry = s.exact;
    for (std::size_t i = 0; i < s.odometry.size(); ++i) {
      s.odometry[i].pose = vo[i];
    }
    return s;
  }();
  return seq;
}

// ---------------------------------------------------------------------------

Outcome fov_oracle()
{
  std::mt19937_64 rng(101);
  const auto intr = CameraIntrinsics::from_horizontal_fov(640, 192, 1.4);
  std::uniform_real_distribution<double> lateral(-40.0, 40.0);
  std::uniform_real_distribution<double> depth(-5.0, 40.0);
  std::vector<Eigen::Vector3d> pts(10000);
  for (auto & p : pts) {
    p = Eigen::Vector3d(lateral(rng), 0.4 * lateral(rng), depth(rng));
  }
  pts[0] = Eigen::Vector3d(0.0, 0.0, 0.0);
  // Points aimed at the image borders, where rounding decides.
  std::uniform_int_distribution<int> side(0, 3);
  for (std::size_t i = 1; i <= 1000; ++i) {
    const double z = std::abs(depth(rng)) + 0.5;
    const double u = side(rng) == 0 ? 0.0 : static_cast<double>(intr.width);
    const double v = side(rng) == 0 ? 0.0 : static_cast<double>(intr.height);
    std::uniform_real_distribution<double> along_u(0.0, intr.width);
    std::uniform_real_distribution<double> along_v(0.0, intr.height);
    const bool vertical = i % 2 == 0;
    const double pu = vertical ? u : along_u(rng);
    const double pv = vertical ? along_v(rng) : v;
    pts[i] = Eigen::Vector3d((pu - intr.cx) / intr.fx * z, (pv - intr.cy) / intr.fy * z, z);
  }
  const auto t0 = std::chrono::steady_clock::now();
  std::size_t mismatches = 0;
  std::size_t inside = 0;
  for (const auto & p : pts) {
    const bool lib = in_view(intr, p);
    const bool ref = lt::scalar_in_fov(p.x(), p.y(), p.z(), intr.fx, intr.fy, intr.cx, intr.cy, intr.width, intr.height);
    mismatches += lib != ref ? 1 : 0;
    inside += ref ? 1 : 0;
  }
  const double secs = seconds_since(t0);
  return {mismatches == 0 && secs < 1.0 && inside > 0 && inside < pts.size(),
          fmt("%zu mismatches over %zu points (%zu inside), %.3f s", mismatches, pts.size(), inside, secs)};
}

Outcome se3_round_trips()
{
  std::mt19937_64 rng(202);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const auto ta = lt::random_transform(rng, 50.0);
    const auto tb = lt::random_transform(rng, 50.0);
    std::uniform_real_distribution<double> ux(-3.0, 3.0);
    const auto tx = lateral_shift(ux(rng));
    // Relative pose, inverse, and the shifted-camera identity.
    worst = std::max(worst, max_abs_difference(relative_transform(tb, ta), compose(inverse(tb), ta)));
    worst = std::max(worst, max_abs_difference(compose(tb, relative_transform(tb, ta)), ta));
    worst = std::max(worst, max_abs_difference(compose(inverse(ta), ta), RigidTransform()));
    worst = std::max(worst, max_abs_difference(inverse(inverse(ta)), ta));
    worst = std::max(worst, max_abs_difference(compose(inverse(compose(tb, tx)), tb), inverse(tx)));
    const Eigen::Vector3d p = Eigen::Vector3d::Random() * 20.0;
    worst = std::max(worst, (inverse(tx) * p - (tx.rotation().transpose() * (p - tx.translation()))).cwiseAbs().maxCoeff());
    worst = std::max(worst, (relative_transform(tb, ta) * p - tb.rotation().transpose() * (ta * p - tb.translation())).cwiseAbs().maxCoeff());
  }
  return {worst < 1e-9, fmt("worst deviation %.3e over 1000 transforms", worst)};
}

Outcome zero_shift_identity()
{
  const auto & seq = sequence();
  AugmentConfig cfg;
  cfg.align = false;
  std::size_t frames = 0;
  std::size_t differing = 0;
  std::size_t points = 0;
  std::size_t empty = 0;
  for (std::size_t i = 0; i < seq.odometry.size(); ++i) {
    std::vector<Eigen::Vector3d> expected;
    const auto & intr = seq.intr;
    for (const auto & p : seq.odometry[i].cloud.points) {
      if (lt::scalar_in_fov(p.x(), p.y(), p.z(), intr.fx, intr.fy, intr.cx, intr.cy, intr.width, intr.height) &&
          p.norm() <= cfg.max_distance) {
        expected.push_back(p);
      }
    }
    if (expected.empty()) {
      // Nothing in view (past the end of the track): the frame must be rejected.
      ++empty;
      try {
        synthesize_frame(seq.odometry, i, 0.0, seq.intr, cfg);
        ++differing;
      } catch (const Error & e) {
        differing += e.code() == ErrorCode::kDegenerateFrame ? 0 : 1;
      }
      continue;
    }
    const auto out = synthesize_frame(seq.odometry, i, 0.0, seq.intr, cfg);
    ++frames;
    points += expected.size();
    differing += out.record.cloud.points == expected ? 0 : 1;
  }
  return {differing == 0 && points > 0,
          fmt("%zu of %zu frames differ (%zu points compared, %zu empty frames rejected)", differing, frames + empty, points, empty)};
}

Outcome counteraction_guarantee()
{
  const auto & seq = sequence();
  const auto & intr = seq.intr;
  AugmentConfig cfg;
  std::size_t from_prev = 0;
  std::size_t inside = 0;
  std::size_t frames = 0;
  for (std::size_t i = 4; i < seq.odometry.size(); i += 4) {
    for (double x : AugmentConfig::uniform_offsets(6, -2.0, 2.0)) {
      if (seq.odometry[i].cloud.empty()) {
        continue;
      }
      const auto out = synthesize_frame(seq.odometry, i, x, intr, cfg);
      ++frames;
      const auto shift = lateral_shift(x);
      for (std::size_t k = 0; k < out.record.cloud.size(); ++k) {
        if (out.provenance[k] == seq.odometry[i].id.value) {
          continue;
        }
        ++from_prev;
        const Eigen::Vector3d b = shift * out.record.cloud.points[k];
        if (lt::scalar_in_fov(b.x(), b.y(), b.z(), intr.fx, intr.fy, intr.cx, intr.cy, intr.width, intr.height)) {
          ++inside;
        }
      }
    }
  }
  return {inside == 0 && from_prev > 0,
          fmt("%zu of %zu preceding-frame points inside the base view over %zu frames", inside, from_prev, frames)};
}

Outcome gradient_check()
{
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(303);
  const std::vector<std::pair<std::vector<int>, std::vector<int>>> shapes = {
    {{8}, {4}}, {{8, 16}, {8}}, {{16, 16}, {}}, {{}, {6}}, {{12, 8, 16}, {8, 4}},
    {{32, 64}, {16}}, {{6}, {6, 6}}, {{10, 20}, {10}}, {{4, 4, 4}, {4}}, {{24}, {12, 6}},
    {{16, 32}, {16, 8}}, {{8, 8}, {8}}};
  double worst = 0.0;
  std::size_t checked = 0;
  std::size_t skipped = 0;
  std::size_t redraws = 0;
  std::size_t kinked = 0;
  std::uniform_real_distribution<double> label(-2.5, 2.5);
  std::uniform_int_distribution<int> count(5, 40);
  for (std::size_t n = 0; n < shapes.size(); ++n) {
    ModelConfig cfg;
    cfg.point_widths = shapes[n].first;
    cfg.head_widths = shapes[n].second;
    PointNetLite net(cfg, 1000 + n);
    // Redraw inputs that put a ReLU or pooling switch inside the stencil.
    lt::GradientReport r;
    for (int attempt = 0; attempt < 100; ++attempt) {
      const auto pts = lt::random_points(rng, count(rng));
      r = lt::gradient_check(net, pts, label(rng));
      if (r.kinks == 0) {
        break;
      }
      ++redraws;
    }
    kinked += r.kinks;
    worst = std::max(worst, r.worst_relative);
    checked += r.checked;
    skipped += r.skipped;
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-4 && kinked == 0 && secs < 30.0,
          fmt("%zu nets, max relative error %.2e over %zu parameters (%zu with |grad| < 1e-8 both ways), "
              "%zu inputs redrawn for kinks, %.1f s",
              shapes.size(), worst, checked, skipped, redraws, secs)};
}

Outcome permutation_invariance()
{
  ModelConfig cfg;
  cfg.point_widths = {32, 64, 128};
  cfg.head_widths = {64, 32};
  const PointNetLite net(cfg, 404);
  std::mt19937_64 rng(405);
  auto cloud = lt::random_cloud(rng, 256);
  const double y = net.forward(cloud);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    std::shuffle(cloud.points.begin(), cloud.points.end(), rng);
    worst = std::max(worst, std::abs(net.forward(cloud) - y));
  }
  return {worst <= 1e-12, fmt("max deviation %.3e over 100 permutations", worst)};
}

Outcome label_oracle()
{
  const auto & seq = sequence();
  const Track & track = seq.scene->track();
  LabelConfig lc;
  lc.n_points = 32;
  lc.clamp = 1e9;
  const Labeler labeler(seq.gt, lc);
  AugmentConfig ac;
  ac.offsets = AugmentConfig::uniform_offsets(5, -2.0, 2.0);
  const auto samples = synthesize_dataset(seq.exact, seq.intr, ac, labeler, 1);

  // Straight stretches as [s0, s1] intervals from the segment list.
  std::vector<std::pair<double, double>> straights;
  double s = 0.0;
  for (const auto & seg : seq.spec.segments) {
    if (seg.kind == Segment::Kind::kStraight) {
      straights.emplace_back(s, s + seg.length);
    }
    s += seg.length;
  }
  auto same_straight = [&](double a, double b) {
    return std::any_of(straights.begin(), straights.end(), [&](const auto & iv) {
      return a >= iv.first && b <= iv.second;
    });
  };

  double worst = 0.0;
  double worst_straight = 0.0;
  std::size_t on_straight = 0;
  std::size_t wrong_future = 0;
  for (const auto & smp : samples) {
    const auto i = static_cast<std::size_t>(smp.frame.value);
    const auto j = static_cast<std::size_t>(smp.future_frame.value);
    const auto ci = track.at(static_cast<double>(i));
    const Eigen::Vector2d fwd(std::cos(ci.heading), std::sin(ci.heading));
    const Eigen::Vector2d right(std::sin(ci.heading), -std::cos(ci.heading));
    // j must be the first frame at least one lookahead ahead; positions at
    // exactly the lookahead are ties up to rounding.
    auto ahead = [&](std::size_t k) { return (track.at(static_cast<double>(k)).position - ci.position).dot(fwd); };
    const bool first = ahead(j) >= lc.lookahead - 1e-9 && (j == i + 1 || ahead(j - 1) < lc.lookahead + 1e-9);
    wrong_future += first ? 0 : 1;
    const Eigen::Vector2d cam = ci.position + smp.trajectory_offset * right;
    const double oracle = (track.at(static_cast<double>(j)).position - cam).dot(right);
    worst = std::max(worst, std::abs(smp.delta_x - oracle));
    if (same_straight(static_cast<double>(i), static_cast<double>(j))) {
      ++on_straight;
      worst_straight = std::max(worst_straight, std::abs(smp.delta_x + smp.trajectory_offset));
    }
  }
  return {!samples.empty() && worst < 1e-6 && worst_straight < 1e-6 && on_straight > 0 && wrong_future == 0,
          fmt("%zu samples, max error %.2e m; %zu on straights, max |label + o| %.2e m; %zu future-frame mismatches",
              samples.size(), worst, on_straight, worst_straight, wrong_future)};
}

// ---------------------------------------------------------------------------
// Closed-loop checks share one set of trained models.

struct Study
{
  DeskPreset preset;
  CameraIntrinsics intr;
  std::vector<TrainedVariant> trained;
  std::vector<std::unique_ptr<Controller>> controllers;
  std::vector<std::unique_ptr<Scene>> scenes;
  SweepSpec suite;
  double alpha{0.0};
  double train_seconds{0.0};
  double calibrate_seconds{0.0};
};

Study & study()
{
  static Study st = [] {
    Study s;
    s.preset = DeskPreset::standard();
    auto t0 = std::chrono::steady_clock::now();
    s.trained = train_variants(preset_track("town"), s.intr, s.preset, ablation_variants(s.preset), 1);
    s.train_seconds = seconds_since(t0);

    t0 = std::chrono::steady_clock::now();
    const Scene cal(preset_track("calibration"));
    const auto c = calibrate_alpha(
      cal, s.intr, log_space(s.preset.alpha_lo, s.preset.alpha_hi, s.preset.alpha_grid), s.preset.label.lookahead,
      s.preset.calibration_starts, EpisodeConfig{});
    s.alpha = c.alpha;
    s.calibrate_seconds = seconds_since(t0);

    for (const auto & t : s.trained) {
      s.controllers.push_back(std::make_unique<ModelController>(
        t.net, t.variant.cloud, s.preset.label.n_points, s.alpha, t.variant.name));
    }
    const double length = s.suite.episode.frames * s.suite.episode.speed * s.suite.episode.dt;
    for (const char * name : {"heldout-a", "heldout-b", "heldout-c"}) {
      s.scenes.push_back(std::make_unique<Scene>(preset_track(name)));
      s.suite.tracks.emplace_back(name, s.scenes.back().get());
      for (const auto & start : spread_starts(name, s.scenes.back()->track(), 5, length)) {
        s.suite.starts.push_back(start);
      }
    }
    return s;
  }();
  return st;
}

const Controller & controller(const Study & s, const std::string & name)
{
  for (const auto & c : s.controllers) {
    if (c->name() == name) {
      return *c;
    }
  }
  throw std::runtime_error("no controller " + name);
}

Outcome ablation_trend()
{
  const auto t0 = std::chrono::steady_clock::now();
  Study & s = study();
  SweepSpec spec = s.suite;
  for (const auto & c : s.controllers) {
    spec.controllers.push_back(c.get());
  }
  const auto rows = sweep(spec, s.intr);
  const double eval_seconds = seconds_since(t0);
  const double total = s.train_seconds + s.calibrate_seconds + eval_seconds;

  std::map<std::string, double> ratio;
  for (const auto & c : s.controllers) {
    ratio[c->name()] = mean_ratio(rows, c->name(), 0.0);
  }
  const double ours = ratio["ours"];
  bool pass = spec.starts.size() >= 5 && spec.episode.frames == 135;
  pass = pass && ours >= 0.90 && ours - ratio["single"] >= 0.15;
  std::string detail = fmt("%zu starts x 135 frames, alpha %.4f; ours %.3f", spec.starts.size(), s.alpha, ours);
  for (const char * name : {"single", "shift-only", "unfiltered", "unlimited-distance", "no-counteraction"}) {
    const bool below = ratio[name] < ours;
    pass = pass && below;
    detail += fmt(", %s %.3f%s", name, ratio[name], below ? "" : " (not below ours)");
  }
  pass = pass && total < 15.0 * 60.0;
  detail += fmt("; train %.0f s + calibrate %.0f s + evaluate %.0f s", s.train_seconds, s.calibrate_seconds, eval_seconds);
  return {pass, detail};
}

Outcome perturbation_trend()
{
  Study & s = study();
  SweepSpec spec = s.suite;
  spec.controllers = {&controller(s, "ours"), &controller(s, "single")};
  spec.perturbations = {0.0, 0.05, 0.10};
  bool pass = true;
  std::string detail;
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    spec.seeds = {seed};
    const auto rows = sweep(spec, s.intr);
    std::map<std::string, std::vector<double>> r;
    for (const char * name : {"ours", "single"}) {
      for (double p : spec.perturbations) {
        r[name].push_back(mean_ratio(rows, name, p));
      }
    }
    const double ours_drop = r["ours"][0] - r["ours"][2];
    bool ok = ours_drop < 0.10;
    for (std::size_t k = 1; k < spec.perturbations.size(); ++k) {
      ok = ok && (r["single"][0] - r["single"][k]) > (r["ours"][0] - r["ours"][k]);
    }
    pass = pass && ok;
    detail += fmt("%sseed %llu ours %.3f/%.3f/%.3f single %.3f/%.3f/%.3f%s", detail.empty() ? "" : "; ",
                  static_cast<unsigned long long>(seed), r["ours"][0], r["ours"][1], r["ours"][2],
                  r["single"][0], r["single"][1], r["single"][2], ok ? "" : " (violated)");
  }
  return {pass, detail};
}

Outcome pipeline_determinism()
{
  lt::TempDir dir("acceptance");
  const fs::path track = dir / "short.txt";
  write_file_atomic(track,
                    "lane_width = 3.5\n"
                    "segment straight 30\n"
                    "segment arc 40 30\n"
                    "segment straight 30\n");
  auto options = [&](int jobs) {
    Options o;
    o.set("run.seed", "1234");
    o.set("run.jobs", std::to_string(jobs));
    o.set("world.track", track.string());
    o.set("augment.offset_count", "3");
    o.set("label.n_points", "64");
    o.set("model.point_widths", "8,16");
    o.set("model.head_widths", "8");
    o.set("train.epochs", "2");
    o.set("eval.tracks", track.string());
    o.set("eval.starts_per_track", "2");
    o.set("eval.frames", "30");
    o.set("eval.perturbations", "0,0.1");
    o.set("eval.alpha_count", "4");
    o.set("eval.calibration_starts", "1");
    return o;
  };
  const std::vector<std::pair<std::string, std::string>> files = {
    {"world", "manifest.ini"}, {"world", "poses_vo.txt"}, {"data", "manifest.ini"}, {"data", "dataset.csv"},
    {"model", "manifest.ini"}, {"model", "loss.csv"}, {"eval", "manifest.ini"}, {"eval", "report.csv"},
    {"eval", "summary.csv"}, {"eval", "perturbation.csv"}, {"eval", "calibration.csv"}};
  auto run = [&](int jobs) {
    const Options o = options(jobs);
    fs::remove_all(dir / "run");
    const fs::path root = dir / "run";
    cmd_gen_world(o, root / "world");
    cmd_gen_dataset(o, root / "world", root / "data");
    cmd_train(o, root / "data", root / "model");
    cmd_evaluate(o, {ModelSpec{"ours", root / "model" / "model.lsnn"}}, root / "eval");
    std::vector<std::string> out;
    for (const auto & [sub, name] : files) {
      out.push_back(read_file(root / sub / name));
    }
    return out;
  };
  const auto a = run(1);
  const auto b = run(1);
  const auto c = run(3);
  std::string differing;
  for (std::size_t i = 0; i < files.size(); ++i) {
    if (a[i] != b[i] || a[i] != c[i]) {
      differing += " " + files[i].first + "/" + files[i].second;
    }
  }
  return {differing.empty(), differing.empty()
                               ? fmt("%zu files byte-identical over three runs (1, 1 and 3 worker threads)", files.size())
                               : "differing:" + differing};
}

Outcome steering_properties()
{
  std::size_t violations = 0;
  std::size_t checks = 0;
  for (double alpha : {0.05, 0.1622, 1.0, 7.0}) {
    const SteeringParams p{alpha, 5.0};
    violations += steering_from_offset(0.0, p) == 0.0 ? 0 : 1;
    violations += steering_from_offset(-0.0, p) == 0.0 ? 0 : 1;
    double prev = -M_PI / 2.0;
    for (double x = -50.0; x <= 50.0; x += 0.003) {
      const double d = steering_from_offset(x, p);
      ++checks;
      violations += steering_from_offset(-x, p) == -d ? 0 : 1;
      violations += std::abs(d) < M_PI / 2.0 ? 0 : 1;
      violations += d > prev ? 0 : 1;
      prev = d;
    }
    for (double x : {1e3, 1e6, 1e12, 1e300}) {
      violations += std::abs(steering_from_offset(x, p)) <= M_PI / 2.0 ? 0 : 1;
      violations += steering_from_offset(-x, p) == -steering_from_offset(x, p) ? 0 : 1;
    }
  }
  return {violations == 0, fmt("%zu violations over %zu samples (odd, increasing, |d| < pi/2, d(0) = 0)", violations, checks)};
}

}  // namespace

int main(int argc, char ** argv)
{
  std::setvbuf(stdout, nullptr, _IONBF, 0);
  const std::vector<std::pair<std::string, std::function<Outcome()>>> checks = {
    {"fov-oracle", fov_oracle},
    {"se3-round-trips", se3_round_trips},
    {"zero-shift-identity", zero_shift_identity},
    {"counteraction-guarantee", counteraction_guarantee},
    {"gradient-check", gradient_check},
    {"permutation-invariance", permutation_invariance},
    {"label-oracle", label_oracle},
    {"ablation-trend", ablation_trend},
    {"perturbation-trend", perturbation_trend},
    {"pipeline-determinism", pipeline_determinism},
    {"steering-properties", steering_properties},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    only.insert(std::atoi(argv[i]));
  }
  int failed = 0;
  for (std::size_t i = 0; i < checks.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) {
      continue;
    }
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      o = checks[i].second();
    } catch (const std::exception & e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %2d %-24s %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", id, checks[i].first.c_str(), o.detail.c_str(),
                seconds_since(t0));
    failed += o.pass ? 0 : 1;
  }
  std::printf("%d criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
