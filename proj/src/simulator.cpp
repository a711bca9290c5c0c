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

#include "lanesynth/simulator.hpp"

#include "lanesynth/error.hpp"
#include "lanesynth/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>

namespace lanesynth
{

namespace
{

Eigen::Vector2d forward_of(double heading) { return {std::cos(heading), std::sin(heading)}; }
Eigen::Vector2d right_of(double heading) { return {std::sin(heading), -std::cos(heading)}; }

}  // namespace

std::array<Eigen::Vector2d, 4> VehicleState::corners() const
{
  const Eigen::Vector2d f = forward_of(heading);
  const Eigen::Vector2d r = right_of(heading);
  const Eigen::Vector2d center = position + f * (wheelbase / 2.0);
  const Eigen::Vector2d hl = f * (length / 2.0);
  const Eigen::Vector2d hw = r * (width / 2.0);
  return {center + hl + hw, center + hl - hw, center - hl - hw, center - hl + hw};
}

RigidTransform VehicleState::camera(double height) const
{
  return camera_pose(position + forward_of(heading) * camera_forward, heading, height);
}

VehicleState step(const VehicleState & state, double steer, double dt)
{
  VehicleState next = state;
  next.position.x() += state.speed * std::cos(state.heading) * dt;
  next.position.y() += state.speed * std::sin(state.heading) * dt;
  next.heading += state.speed / state.wheelbase * std::tan(steer) * dt;
  return next;
}

bool on_lane(const Track & track, const VehicleState & state)
{
  const double half = track.spec().lane_width / 2.0;
  for (const auto & c : state.corners()) {
    const auto coord = track.locate(c);
    if (!coord || coord->offset < -half || coord->offset > half) {
      return false;
    }
  }
  return true;
}

bool collides(const Scene & scene, const VehicleState & state)
{
  for (const auto & c : state.corners()) {
    if (scene.inside_solid(c)) {
      return true;
    }
  }
  return false;
}

double perturb_steering(double steer, double level, double max_steer, std::mt19937_64 & rng)
{
  if (!(level >= 0.0)) {
    fail(ErrorCode::kInvalidArgument, "perturbation level must be non-negative");
  }
  if (level == 0.0) {
    return steer;
  }
  const double half = level * max_steer;
  std::uniform_real_distribution<double> u(-half, half);
  return steer + u(rng);
}

double steer_toward(double delta_x, double alpha)
{
  return -steering_from_offset(delta_x, SteeringParams{alpha, 1.0});
}

OracleController::OracleController(SteeringParams params, std::string name)
: params_(params), name_(std::move(name))
{
  params_.validate();
}

double OracleController::steer(const Observation & obs) const
{
  const Track & track = obs.scene.track();
  const Eigen::Vector3d cam = obs.camera.translation();
  const auto coord = track.locate(cam.head<2>());
  if (!coord) {
    return 0.0;
  }
  const auto target = track.at(coord->s + params_.lookahead);
  const Eigen::Vector3d local =
    inverse(obs.camera) * Eigen::Vector3d(target.position.x(), target.position.y(), cam.z());
  return steer_toward(local.x(), params_.alpha);
}

ConstantController::ConstantController(double steer, std::string name)
: steer_(steer), name_(std::move(name))
{
}

ModelController::ModelController(
  std::shared_ptr<const PointNetLite> net, CloudConfig cloud, int n_points, double alpha,
  std::string name)
: net_(std::move(net)), cloud_(cloud), n_points_(n_points), alpha_(alpha), name_(std::move(name))
{
  if (!net_ || n_points_ <= 0 || !(alpha_ > 0.0)) {
    fail(ErrorCode::kInvalidArgument, "model controller needs a network, points and alpha");
  }
  cloud_.validate();
}

double ModelController::predict_offset(const Observation & obs) const
{
  if (!obs.frame) {
    fail(ErrorCode::kInternal, "model controller requires a rendered frame");
  }
  const PointCloud local =
    make_local_cloud(obs.intr, obs.frame->depth, obs.frame->intensity, cloud_, FrameId{0});
  if (local.empty()) {
    return 0.0;
  }
  return net_->forward(sample_fixed(local, n_points_, obs.seed));
}

double ModelController::steer(const Observation & obs) const
{
  return steer_toward(predict_offset(obs), alpha_);
}

void EpisodeConfig::validate() const
{
  if (frames <= 0 || !(speed >= 0.0) || !(dt >= 0.0) || !(max_steer > 0.0 && max_steer < M_PI / 2)) {
    fail(ErrorCode::kConfiguration, "invalid episode configuration");
  }
  if (!(perturbation >= 0.0)) {
    fail(ErrorCode::kConfiguration, "perturbation level must be non-negative");
  }
}

EpisodeResult run_episode(
  const Scene & scene, const CameraIntrinsics & intr, const Controller & controller,
  const EpisodeConfig & cfg)
{
  cfg.validate();
  const Track & track = scene.track();
  const double height = track.spec().camera_height;
  const auto start = track.at(cfg.start_s);
  VehicleState state;
  state.speed = cfg.speed;
  state.heading = start.heading;
  state.position = start.position + right_of(start.heading) * cfg.start_offset;

  std::mt19937_64 noise(sample_seed(cfg.seed, 1, 0));
  EpisodeResult out;
  bool halted = false;
  for (int f = 0; f < cfg.frames; ++f) {
    const RigidTransform cam = state.camera(height);
    out.path.push_back(state);
    const auto coord = track.locate(cam.translation().head<2>());
    out.offsets.push_back(coord ? coord->offset : std::numeric_limits<double>::quiet_NaN());
    if (halted) {
      out.on_lane.push_back(0);
      continue;
    }
    out.on_lane.push_back(on_lane(track, state) ? 1 : 0);

    std::optional<RenderedFrame> frame;
    if (controller.needs_frame()) {
      frame = render(scene, cam, intr);
    }
    const Observation obs{scene, intr, state, cam, frame ? &*frame : nullptr,
                          sample_seed(cfg.seed, 2, f)};
    double steer = controller.steer(obs);
    if (!std::isfinite(steer)) {
      fail(ErrorCode::kInternal, "controller " + controller.name() + " returned a non-finite command");
    }
    steer = perturb_steering(steer, cfg.perturbation, cfg.max_steer, noise);
    steer = std::clamp(steer, -cfg.max_steer, cfg.max_steer);
    state = step(state, steer, cfg.dt);
    if (collides(scene, state)) {
      halted = true;
      out.terminated_early = true;
      out.termination = "collision";
    }
  }
  std::size_t on = 0;
  for (auto b : out.on_lane) {
    on += b;
  }
  out.ratio_on_lane = static_cast<double>(on) / static_cast<double>(out.on_lane.size());
  return out;
}

std::vector<StartPosition> spread_starts(
  const std::string & track_name, const Track & track, int count, double episode_length)
{
  if (count <= 0) {
    fail(ErrorCode::kInvalidArgument, "start count must be positive");
  }
  constexpr double kMargin = 10.0;
  const double usable = track.length() - episode_length - 2.0 * kMargin;
  if (usable < 0.0) {
    fail(ErrorCode::kConfiguration, "track " + track_name + " is too short for an episode");
  }
  std::vector<StartPosition> out;
  for (int k = 0; k < count; ++k) {
    const double s = kMargin + (count == 1 ? 0.0 : usable * k / (count - 1));
    out.push_back(StartPosition{track_name, k, s});
  }
  return out;
}

std::vector<SweepRow> sweep(const SweepSpec & spec, const CameraIntrinsics & intr)
{
  if (spec.tracks.empty() || spec.starts.empty() || spec.controllers.empty() ||
      spec.perturbations.empty() || spec.seeds.empty())
  {
    fail(ErrorCode::kConfiguration, "sweep needs tracks, starts, controllers, levels and seeds");
  }
  std::map<std::string, const Scene *> scenes(spec.tracks.begin(), spec.tracks.end());
  struct Task
  {
    const Controller * controller;
    std::size_t start;
    std::size_t level;
    std::size_t seed;
  };
  std::vector<Task> tasks;
  for (const Controller * c : spec.controllers) {
    for (std::size_t l = 0; l < spec.perturbations.size(); ++l) {
      for (std::size_t sd = 0; sd < spec.seeds.size(); ++sd) {
        for (std::size_t st = 0; st < spec.starts.size(); ++st) {
          tasks.push_back(Task{c, st, l, sd});
        }
      }
    }
  }
  for (const auto & st : spec.starts) {
    if (!scenes.count(st.track)) {
      fail(ErrorCode::kConfiguration, "start refers to unknown track " + st.track);
    }
  }
  std::vector<SweepRow> rows(tasks.size());
  parallel_for(tasks.size(), spec.jobs, [&](std::size_t i) {
    const Task & t = tasks[i];
    const StartPosition & st = spec.starts[t.start];
    EpisodeConfig ec = spec.episode;
    ec.start_s = st.s;
    ec.perturbation = spec.perturbations[t.level];
    // Shared across controllers so every configuration faces the same noise.
    ec.seed = sample_seed(spec.seeds[t.seed], t.start, static_cast<std::int64_t>(t.level));
    SweepRow & row = rows[i];
    row.episode = run_episode(*scenes.at(st.track), intr, *t.controller, ec);
    row.controller = t.controller->name();
    row.track = st.track;
    row.start_idx = st.start_idx;
    row.perturbation = ec.perturbation;
    row.ratio_on_lane = row.episode.ratio_on_lane;
    row.frames = ec.frames;
    row.terminated_early = row.episode.terminated_early;
    row.seed = spec.seeds[t.seed];
  });
  return rows;
}

std::vector<SummaryRow> summarize(const std::vector<SweepRow> & rows)
{
  std::vector<SummaryRow> out;
  for (const auto & r : rows) {
    auto it = std::find_if(out.begin(), out.end(), [&](const SummaryRow & s) {
      return s.controller == r.controller && s.perturbation == r.perturbation;
    });
    if (it == out.end()) {
      out.push_back(SummaryRow{r.controller, r.perturbation, 0.0, 0});
      it = out.end() - 1;
    }
    it->mean_ratio += r.ratio_on_lane;
    ++it->episodes;
  }
  for (auto & s : out) {
    s.mean_ratio /= static_cast<double>(s.episodes);
  }
  return out;
}

double mean_ratio(
  const std::vector<SweepRow> & rows, const std::string & controller, double perturbation)
{
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto & r : rows) {
    if (r.controller == controller && r.perturbation == perturbation) {
      sum += r.ratio_on_lane;
      ++n;
    }
  }
  if (n == 0) {
    fail(ErrorCode::kInvalidArgument, "no episodes for controller " + controller);
  }
  return sum / static_cast<double>(n);
}

std::string format_report_csv(const std::vector<SweepRow> & rows)
{
  std::string out = "controller,track,start_idx,perturbation,ratio_on_lane,frames,terminated_early\n";
  char line[256];
  for (const auto & r : rows) {
    std::snprintf(
      line, sizeof(line), "%s,%s,%d,%.17g,%.17g,%d,%d\n", r.controller.c_str(), r.track.c_str(),
      r.start_idx, r.perturbation, r.ratio_on_lane, r.frames, r.terminated_early ? 1 : 0);
    out += line;
  }
  return out;
}

std::string format_summary_csv(const std::vector<SummaryRow> & rows)
{
  std::string out = "controller,perturbation,mean_ratio_on_lane,episodes\n";
  char line[256];
  for (const auto & r : rows) {
    std::snprintf(
      line, sizeof(line), "%s,%.17g,%.17g,%zu\n", r.controller.c_str(), r.perturbation,
      r.mean_ratio, r.episodes);
    out += line;
  }
  return out;
}

std::string render_bev_svg(const Track & track, const EpisodeResult & episode)
{
  const TrackSpec & ts = track.spec();
  const double w = ts.lane_width;
  auto line_at = [&](double offset) {
    std::vector<Eigen::Vector2d> pts;
    for (double s = 0.0;; s += 1.0) {
      const auto c = track.at(std::min(s, track.length()));
      pts.push_back(c.position + right_of(c.heading) * offset);
      if (s >= track.length()) {
        break;
      }
    }
    return pts;
  };
  const auto right_edge = line_at(w / 2.0 + ts.shoulder);
  const auto left_edge = line_at(-1.5 * w - ts.shoulder);
  Eigen::Vector2d lo = right_edge.front();
  Eigen::Vector2d hi = lo;
  for (const auto * pts : {&right_edge, &left_edge}) {
    for (const auto & p : *pts) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
  }
  for (const auto & s : episode.path) {
    lo = lo.cwiseMin(s.position);
    hi = hi.cwiseMax(s.position);
  }
  lo.array() -= 5.0;
  hi.array() += 5.0;
  const double scale = 4.0;
  auto px = [&](const Eigen::Vector2d & p) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f,%.2f", (p.x() - lo.x()) * scale, (hi.y() - p.y()) * scale);
    return std::string(buf);
  };
  auto polyline = [&](const std::vector<Eigen::Vector2d> & pts, const char * style) {
    std::string s = "<polyline fill=\"none\" " + std::string(style) + " points=\"";
    for (const auto & p : pts) {
      s += px(p) + " ";
    }
    return s + "\"/>\n";
  };
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << (hi.x() - lo.x()) * scale
      << "\" height=\"" << (hi.y() - lo.y()) * scale << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"#6a8f4e\"/>\n";
  std::vector<Eigen::Vector2d> road = right_edge;
  road.insert(road.end(), left_edge.rbegin(), left_edge.rend());
  svg << polyline(road, "style=\"fill:#555\" stroke=\"#333\" stroke-width=\"1\"");
  svg << polyline(line_at(w / 2.0), "stroke=\"#fff\" stroke-width=\"0.8\"");
  svg << polyline(line_at(-1.5 * w), "stroke=\"#fff\" stroke-width=\"0.8\"");
  svg << polyline(line_at(-w / 2.0), "stroke=\"#ff0\" stroke-width=\"0.6\" stroke-dasharray=\"6,6\"");
  std::vector<Eigen::Vector2d> path;
  for (const auto & s : episode.path) {
    path.push_back(s.position);
  }
  svg << polyline(path, "stroke=\"#e0302a\" stroke-width=\"1.5\"");
  if (!path.empty()) {
    const std::string p = px(path.front());
    svg << "<circle cx=\"" << p.substr(0, p.find(',')) << "\" cy=\"" << p.substr(p.find(',') + 1)
        << "\" r=\"4\" fill=\"#1f5fd1\"/>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

std::vector<double> log_space(double lo, double hi, int count)
{
  if (!(lo > 0.0) || !(hi >= lo) || count <= 0) {
    fail(ErrorCode::kInvalidArgument, "log_space needs 0 < lo <= hi and a positive count");
  }
  std::vector<double> out;
  for (int i = 0; i < count; ++i) {
    const double t = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
    out.push_back(std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo))));
  }
  return out;
}

AlphaCalibration calibrate_alpha(
  const Scene & scene, const CameraIntrinsics & intr, const std::vector<double> & grid,
  double lookahead, int starts, const EpisodeConfig & episode)
{
  if (grid.empty()) {
    fail(ErrorCode::kConfiguration, "alpha grid is empty");
  }
  const auto positions = spread_starts(
    "calibration", scene.track(), starts, episode.frames * episode.speed * episode.dt);
  AlphaCalibration out;
  out.grid = grid;
  std::size_t best = 0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const OracleController oracle(SteeringParams{grid[g], lookahead});
    double ratio = 0.0;
    double offset = 0.0;
    std::size_t n_off = 0;
    for (const auto & st : positions) {
      EpisodeConfig ec = episode;
      ec.start_s = st.s;
      const EpisodeResult r = run_episode(scene, intr, oracle, ec);
      ratio += r.ratio_on_lane;
      for (double o : r.offsets) {
        if (std::isfinite(o)) {
          offset += std::abs(o);
          ++n_off;
        }
      }
    }
    out.ratios.push_back(ratio / static_cast<double>(positions.size()));
    out.mean_abs_offsets.push_back(
      n_off ? offset / static_cast<double>(n_off) : std::numeric_limits<double>::infinity());
    if (out.ratios[g] > out.ratios[best] ||
        (out.ratios[g] == out.ratios[best] && out.mean_abs_offsets[g] < out.mean_abs_offsets[best]))
    {
      best = g;
    }
  }
  out.alpha = grid[best];
  return out;
}

}  // namespace lanesynth
