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

#include "lanesynth/synthworld.hpp"

#include "lanesynth/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <sstream>

namespace lanesynth
{

namespace
{

constexpr double kEps = 1e-9;

Eigen::Vector2d left_normal(double heading) { return {-std::sin(heading), std::cos(heading)}; }
Eigen::Vector2d right_normal(double heading) { return {std::sin(heading), -std::cos(heading)}; }
Eigen::Vector2d direction(double heading) { return {std::cos(heading), std::sin(heading)}; }

double wrap_pi(double a)
{
  a = std::fmod(a + M_PI, 2.0 * M_PI);
  if (a < 0.0) {
    a += 2.0 * M_PI;
  }
  return a - M_PI;
}

}  // namespace

Segment Segment::arc(double radius, double angle_rad)
{
  return Segment{Kind::kArc, radius * std::abs(angle_rad), radius, angle_rad};
}

double Segment::curvature() const
{
  if (kind == Kind::kStraight) {
    return 0.0;
  }
  return angle >= 0.0 ? 1.0 / radius : -1.0 / radius;
}

double TrackSpec::length() const
{
  double total = 0.0;
  for (const auto & s : segments) {
    total += s.length;
  }
  return total;
}

void TrackSpec::validate() const
{
  if (segments.empty() || !(length() > 0.0)) {
    fail(ErrorCode::kConfiguration, "track has zero length");
  }
  if (!(lane_width > 0.0)) {
    fail(ErrorCode::kConfiguration, "lane width must be positive");
  }
  if (!(camera_height > 0.0)) {
    fail(ErrorCode::kConfiguration, "camera height must be positive");
  }
  for (const auto & s : segments) {
    if (!(s.length > 0.0) || !std::isfinite(s.length)) {
      fail(ErrorCode::kConfiguration, "segment lengths must be positive");
    }
    if (s.kind == Segment::Kind::kArc && !(s.radius > lane_width)) {
      fail(ErrorCode::kConfiguration, "arc radius must exceed the lane width");
    }
  }
  if (!(barrier_piece > 0.0) || pole_spacing < 0.0 || marking_width < 0.0 || dash_length < 0.0 ||
      dash_gap < 0.0 || shoulder < 0.0) {
    fail(ErrorCode::kConfiguration, "invalid track feature settings");
  }
}

// --- spec text format -------------------------------------------------------

namespace
{

bool parse_bool(const std::string & v, int line)
{
  if (v == "1" || v == "true" || v == "on" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "off" || v == "no") return false;
  fail(ErrorCode::kParse, "track spec line " + std::to_string(line) + ": expected a boolean");
}

double parse_number(const std::string & v, int line)
{
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception &) {
    used = 0;
  }
  if (used != v.size() || !std::isfinite(out)) {
    fail(ErrorCode::kParse, "track spec line " + std::to_string(line) + ": bad number '" + v + "'");
  }
  return out;
}

std::string trim(const std::string & s)
{
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

TrackSpec parse_track_spec(std::istream & in)
{
  TrackSpec spec;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string text = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (text.empty()) {
      continue;
    }
    const auto eq = text.find('=');
    if (eq != std::string::npos) {
      const std::string key = trim(text.substr(0, eq));
      const std::string value = trim(text.substr(eq + 1));
      auto num = [&] { return parse_number(value, line); };
      if (key == "lane_width") spec.lane_width = num();
      else if (key == "camera_height") spec.camera_height = num();
      else if (key == "start_x") spec.start_position.x() = num();
      else if (key == "start_y") spec.start_position.y() = num();
      else if (key == "start_heading_deg") spec.start_heading = num() * M_PI / 180.0;
      else if (key == "lane_markings") spec.lane_markings = parse_bool(value, line);
      else if (key == "marking_width") spec.marking_width = num();
      else if (key == "dash_length") spec.dash_length = num();
      else if (key == "dash_gap") spec.dash_gap = num();
      else if (key == "shoulder") spec.shoulder = num();
      else if (key == "barriers") spec.barriers = parse_bool(value, line);
      else if (key == "barrier_clearance") spec.barrier_clearance = num();
      else if (key == "barrier_height") spec.barrier_height = num();
      else if (key == "barrier_thickness") spec.barrier_thickness = num();
      else if (key == "barrier_piece") spec.barrier_piece = num();
      else if (key == "pole_spacing") spec.pole_spacing = num();
      else if (key == "pole_clearance") spec.pole_clearance = num();
      else if (key == "pole_radius") spec.pole_radius = num();
      else if (key == "pole_height") spec.pole_height = num();
      else {
        fail(ErrorCode::kParse, "track spec line " + std::to_string(line) + ": unknown key '" + key + "'");
      }
      continue;
    }
    std::istringstream ls(text);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) {
      tok.push_back(t);
    }
    auto arg = [&](std::size_t i) { return parse_number(tok[i], line); };
    auto expect = [&](std::size_t n) {
      if (tok.size() != n) {
        fail(
          ErrorCode::kParse, "track spec line " + std::to_string(line) + ": expected " +
                               std::to_string(n - 1) + " values after '" + tok[0] + "'");
      }
    };
    if (tok[0] == "segment" && tok.size() >= 2 && tok[1] == "straight") {
      expect(3);
      spec.segments.push_back(Segment::straight(arg(2)));
    } else if (tok[0] == "segment" && tok.size() >= 2 && tok[1] == "arc") {
      expect(4);
      spec.segments.push_back(Segment::arc(arg(2), arg(3) * M_PI / 180.0));
    } else if (tok[0] == "box") {
      expect(7);
      spec.boxes.push_back(
        BoxFeature{{arg(1), arg(2)}, arg(3), arg(4), arg(5), arg(6) * M_PI / 180.0});
    } else if (tok[0] == "pole") {
      expect(5);
      spec.poles.push_back(PoleFeature{{arg(1), arg(2)}, arg(3), arg(4)});
    } else {
      fail(ErrorCode::kParse, "track spec line " + std::to_string(line) + ": unknown entry '" + tok[0] + "'");
    }
  }
  try {
    spec.validate();
  } catch (const Error & e) {
    fail(ErrorCode::kParse, std::string("track spec: ") + e.what());
  }
  return spec;
}

TrackSpec parse_track_spec(const std::string & text)
{
  std::istringstream in(text);
  return parse_track_spec(in);
}

std::string format_track_spec(const TrackSpec & spec)
{
  std::ostringstream out;
  char buf[256];
  auto kv = [&](const char * key, double v) {
    std::snprintf(buf, sizeof(buf), "%s = %.17g\n", key, v);
    out << buf;
  };
  out << "# lanesynth track\n";
  kv("lane_width", spec.lane_width);
  kv("camera_height", spec.camera_height);
  kv("start_x", spec.start_position.x());
  kv("start_y", spec.start_position.y());
  kv("start_heading_deg", spec.start_heading * 180.0 / M_PI);
  out << "lane_markings = " << (spec.lane_markings ? "true" : "false") << "\n";
  kv("marking_width", spec.marking_width);
  kv("dash_length", spec.dash_length);
  kv("dash_gap", spec.dash_gap);
  kv("shoulder", spec.shoulder);
  out << "barriers = " << (spec.barriers ? "true" : "false") << "\n";
  kv("barrier_clearance", spec.barrier_clearance);
  kv("barrier_height", spec.barrier_height);
  kv("barrier_thickness", spec.barrier_thickness);
  kv("barrier_piece", spec.barrier_piece);
  kv("pole_spacing", spec.pole_spacing);
  kv("pole_clearance", spec.pole_clearance);
  kv("pole_radius", spec.pole_radius);
  kv("pole_height", spec.pole_height);
  for (const auto & s : spec.segments) {
    if (s.kind == Segment::Kind::kStraight) {
      std::snprintf(buf, sizeof(buf), "segment straight %.17g\n", s.length);
    } else {
      std::snprintf(buf, sizeof(buf), "segment arc %.17g %.17g\n", s.radius, s.angle * 180.0 / M_PI);
    }
    out << buf;
  }
  for (const auto & b : spec.boxes) {
    std::snprintf(
      buf, sizeof(buf), "box %.17g %.17g %.17g %.17g %.17g %.17g\n", b.center.x(), b.center.y(),
      b.length, b.width, b.height, b.yaw * 180.0 / M_PI);
    out << buf;
  }
  for (const auto & p : spec.poles) {
    std::snprintf(
      buf, sizeof(buf), "pole %.17g %.17g %.17g %.17g\n", p.center.x(), p.center.y(), p.radius,
      p.height);
    out << buf;
  }
  return out.str();
}

TrackSpec preset_track(std::string_view name)
{
  TrackSpec spec;
  auto deg = [](double d) { return d * M_PI / 180.0; };
  using S = Segment;
  if (name == "town") {
    spec.segments = {
      S::straight(40), S::arc(40, deg(90)),   S::straight(30), S::arc(30, deg(-90)),
      S::straight(35), S::arc(45, deg(-60)),  S::straight(25), S::arc(35, deg(75)),
      S::straight(30), S::arc(60, deg(40)),   S::straight(20), S::arc(50, deg(-45)),  S::straight(35),
    };
  } else if (name == "heldout-a") {
    spec.segments = {
      S::straight(30), S::arc(38, deg(-80)), S::straight(25), S::arc(42, deg(85)),
      S::straight(20), S::arc(55, deg(-50)), S::straight(60),
    };
  } else if (name == "heldout-b") {
    spec.segments = {
      S::straight(20), S::arc(48, deg(70)), S::arc(36, deg(-70)), S::straight(30),
      S::arc(33, deg(80)), S::straight(25), S::arc(65, deg(-35)), S::straight(50),
    };
  } else if (name == "heldout-c") {
    spec.segments = {
      S::straight(25), S::arc(32, deg(-70)), S::straight(15), S::arc(52, deg(60)),
      S::straight(35), S::arc(40, deg(-75)), S::straight(60),
    };
  } else if (name == "calibration") {
    spec.segments = {
      S::straight(30), S::arc(35, deg(90)), S::straight(30), S::arc(45, deg(-100)),
      S::straight(30), S::arc(60, deg(45)), S::straight(60),
    };
  } else if (name == "corridor") {
    spec.segments = {S::straight(200)};
  } else {
    fail(ErrorCode::kConfiguration, "unknown track preset '" + std::string(name) + "'");
  }
  spec.validate();
  return spec;
}

// --- track geometry ---------------------------------------------------------

Track::Track(TrackSpec spec) : spec_(std::move(spec))
{
  spec_.validate();
  Eigen::Vector2d p = spec_.start_position;
  double h = spec_.start_heading;
  double s0 = 0.0;
  for (const auto & seg : spec_.segments) {
    Piece piece{p, h, seg.curvature(), seg.length, s0, Eigen::Vector2d::Zero()};
    if (piece.kappa != 0.0) {
      piece.center = p + left_normal(h) / piece.kappa;
      const double end_h = h + piece.kappa * seg.length;
      p = piece.center - left_normal(end_h) / piece.kappa;
      h = end_h;
    } else {
      p = p + seg.length * direction(h);
    }
    pieces_.push_back(piece);
    s0 += seg.length;
  }
  length_ = s0;
}

CenterlinePoint Track::at(double s) const
{
  s = std::clamp(s, 0.0, length_);
  auto it = std::upper_bound(
    pieces_.begin(), pieces_.end(), s, [](double v, const Piece & pc) { return v < pc.s0; });
  const Piece & pc = *(it == pieces_.begin() ? it : std::prev(it));
  const double t = s - pc.s0;
  if (pc.kappa == 0.0) {
    return {pc.start + t * direction(pc.heading), pc.heading, s};
  }
  const double h = pc.heading + pc.kappa * t;
  return {pc.center - left_normal(h) / pc.kappa, h, s};
}

std::optional<TrackCoordinate> Track::locate_in(const Eigen::Vector2d & p, std::size_t i) const
{
  const Piece & pc = pieces_[i];
  if (pc.kappa == 0.0) {
    const Eigen::Vector2d d = p - pc.start;
    const double t = d.dot(direction(pc.heading));
    if (t < -kEps || t > pc.length + kEps) {
      return std::nullopt;
    }
    return TrackCoordinate{pc.s0 + std::clamp(t, 0.0, pc.length), -d.dot(left_normal(pc.heading)), i};
  }
  const Eigen::Vector2d d = p - pc.center;
  if (d.squaredNorm() == 0.0) {
    return std::nullopt;
  }
  const double theta = pc.kappa > 0.0 ? std::atan2(d.x(), -d.y()) : std::atan2(-d.x(), d.y());
  const double mid = pc.heading + pc.kappa * pc.length / 2.0;
  const double t = pc.length / 2.0 + wrap_pi(theta - mid) / pc.kappa;
  if (t < -kEps || t > pc.length + kEps) {
    return std::nullopt;
  }
  return TrackCoordinate{
    pc.s0 + std::clamp(t, 0.0, pc.length), -d.dot(left_normal(theta)) - 1.0 / pc.kappa, i};
}

std::optional<TrackCoordinate> Track::locate(const Eigen::Vector2d & p) const
{
  std::optional<TrackCoordinate> best;
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    auto c = locate_in(p, i);
    if (c && (!best || std::abs(c->offset) < std::abs(best->offset))) {
      best = c;
    }
  }
  return best;
}

std::optional<TrackCoordinate> Track::locate(
  const Eigen::Vector2d & p, const std::vector<std::size_t> & candidates) const
{
  std::optional<TrackCoordinate> best;
  for (std::size_t i : candidates) {
    auto c = locate_in(p, i);
    if (c && (!best || std::abs(c->offset) < std::abs(best->offset))) {
      best = c;
    }
  }
  return best;
}

std::vector<std::size_t> Track::segments_near(const Eigen::Vector2d & p, double radius) const
{
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    const Piece & pc = pieces_[i];
    const int steps = std::max(1, static_cast<int>(std::ceil(pc.length / 2.0)));
    for (int k = 0; k <= steps; ++k) {
      const auto c = at(pc.s0 + pc.length * k / steps);
      if ((c.position - p).norm() <= radius + 1.5) {
        out.push_back(i);
        break;
      }
    }
  }
  return out;
}

double Track::right_barrier_offset() const
{
  return spec_.lane_width / 2.0 + spec_.shoulder + spec_.barrier_clearance +
         spec_.barrier_thickness / 2.0;
}

double Track::left_barrier_offset() const
{
  return -1.5 * spec_.lane_width - spec_.shoulder - spec_.barrier_clearance -
         spec_.barrier_thickness / 2.0;
}

RigidTransform camera_pose(const Eigen::Vector2d & xy, double heading, double height)
{
  const double c = std::cos(heading);
  const double s = std::sin(heading);
  Eigen::Matrix3d r;
  r.col(0) << s, -c, 0.0;
  r.col(1) << 0.0, 0.0, -1.0;
  r.col(2) << c, s, 0.0;
  return RigidTransform(r, Eigen::Vector3d(xy.x(), xy.y(), height));
}

double heading_of(const RigidTransform & camera_to_world)
{
  const Eigen::Vector3d forward = camera_to_world.rotation().col(2);
  return std::atan2(forward.y(), forward.x());
}

// --- scene ------------------------------------------------------------------

float material_intensity(Material m)
{
  switch (m) {
    case Material::kSky: return 0.90f;
    case Material::kAsphalt: return 0.30f;
    case Material::kMarking: return 0.95f;
    case Material::kGrass: return 0.55f;
    case Material::kBarrier: return 0.10f;
    case Material::kPole: return 0.40f;
    case Material::kObstacle: return 0.70f;
  }
  return 0.0f;
}

Scene::Scene(const TrackSpec & spec, RenderOptions options) : track_(spec), options_(options)
{
  const TrackSpec & ts = track_.spec();
  if (ts.barriers) {
    for (double offset : {track_.right_barrier_offset(), track_.left_barrier_offset()}) {
      double s0 = 0.0;
      for (const auto & seg : ts.segments) {
        const double len = seg.length;
        const int n = std::max(1, static_cast<int>(std::ceil(len / ts.barrier_piece)));
        for (int i = 0; i < n; ++i) {
          const auto a = track_.at(s0 + len * i / n);
          const auto b = track_.at(s0 + len * (i + 1) / n);
          const Eigen::Vector2d pa = a.position + offset * right_normal(a.heading);
          const Eigen::Vector2d pb = b.position + offset * right_normal(b.heading);
          const Eigen::Vector2d chord = pb - pa;
          const double yaw = std::atan2(chord.y(), chord.x());
          boxes_.push_back(Box{
            (pa + pb) / 2.0, chord.norm() / 2.0 + 0.01, ts.barrier_thickness / 2.0,
            ts.barrier_height, std::cos(yaw), std::sin(yaw), Material::kBarrier});
        }
        s0 += len;
      }
    }
  }
  if (ts.pole_spacing > 0.0) {
    const double offset = track_.right_barrier_offset() + ts.barrier_thickness / 2.0 + ts.pole_clearance;
    for (double s = ts.pole_spacing / 2.0; s <= track_.length(); s += ts.pole_spacing) {
      const auto c = track_.at(s);
      cylinders_.push_back(Cylinder{
        c.position + offset * right_normal(c.heading), ts.pole_radius, ts.pole_height,
        Material::kPole});
    }
  }
  for (const auto & b : ts.boxes) {
    boxes_.push_back(Box{
      b.center, b.length / 2.0, b.width / 2.0, b.height, std::cos(b.yaw), std::sin(b.yaw),
      Material::kObstacle});
  }
  for (const auto & p : ts.poles) {
    cylinders_.push_back(Cylinder{p.center, p.radius, p.height, Material::kPole});
  }
}

Material Scene::ground_material(
  const Eigen::Vector2d & p, const std::vector<std::size_t> & candidates) const
{
  const auto coord = track_.locate(p, candidates);
  if (!coord) {
    return Material::kGrass;
  }
  const TrackSpec & ts = track_.spec();
  const double w = ts.lane_width;
  const double off = coord->offset;
  if (ts.lane_markings) {
    const double half = ts.marking_width / 2.0;
    if (std::abs(off - w / 2.0) <= half || std::abs(off + 1.5 * w) <= half) {
      return Material::kMarking;
    }
    if (std::abs(off + w / 2.0) <= half &&
        std::fmod(coord->s, ts.dash_length + ts.dash_gap) < ts.dash_length) {
      return Material::kMarking;
    }
  }
  if (off >= -1.5 * w - ts.shoulder && off <= w / 2.0 + ts.shoulder) {
    return Material::kAsphalt;
  }
  return Material::kGrass;
}

namespace
{

Eigen::Vector3d box_local(const Scene::Box & b, const Eigen::Vector3d & p)
{
  const double qx = p.x() - b.center.x();
  const double qy = p.y() - b.center.y();
  return {b.cos_yaw * qx + b.sin_yaw * qy, -b.sin_yaw * qx + b.cos_yaw * qy, p.z()};
}

double box_distance(const Scene::Box & b, const Eigen::Vector3d & p)
{
  const Eigen::Vector3d l = box_local(b, p);
  const Eigen::Vector3d q(
    std::abs(l.x()) - b.half_length, std::abs(l.y()) - b.half_width,
    std::abs(l.z() - b.height / 2.0) - b.height / 2.0);
  const double outside = q.cwiseMax(0.0).norm();
  return outside > 0.0 ? outside : -q.maxCoeff();
}

double cylinder_distance(const Scene::Cylinder & c, const Eigen::Vector3d & p)
{
  const double dr = (p.head<2>() - c.center).norm() - c.radius;
  const double dz = std::abs(p.z() - c.height / 2.0) - c.height / 2.0;
  const double outside = std::hypot(std::max(dr, 0.0), std::max(dz, 0.0));
  return outside > 0.0 ? outside : -std::max(dr, dz);
}

// Entry distance along the ray, or +inf.
double ray_box(const Scene::Box & b, const Eigen::Vector3d & o, const Eigen::Vector3d & d)
{
  const Eigen::Vector3d lo = box_local(b, o);
  const Eigen::Vector3d ld(
    b.cos_yaw * d.x() + b.sin_yaw * d.y(), -b.sin_yaw * d.x() + b.cos_yaw * d.y(), d.z());
  const double lo_b[3] = {-b.half_length, -b.half_width, 0.0};
  const double hi_b[3] = {b.half_length, b.half_width, b.height};
  double t_near = -std::numeric_limits<double>::infinity();
  double t_far = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    if (ld[a] == 0.0) {
      if (lo[a] < lo_b[a] || lo[a] > hi_b[a]) {
        return std::numeric_limits<double>::infinity();
      }
      continue;
    }
    double t0 = (lo_b[a] - lo[a]) / ld[a];
    double t1 = (hi_b[a] - lo[a]) / ld[a];
    if (t0 > t1) {
      std::swap(t0, t1);
    }
    t_near = std::max(t_near, t0);
    t_far = std::min(t_far, t1);
  }
  if (t_near > t_far || t_near <= 0.0) {
    return std::numeric_limits<double>::infinity();
  }
  return t_near;
}

double ray_cylinder(const Scene::Cylinder & c, const Eigen::Vector3d & o, const Eigen::Vector3d & d)
{
  double best = std::numeric_limits<double>::infinity();
  const double qx = o.x() - c.center.x();
  const double qy = o.y() - c.center.y();
  const double a = d.x() * d.x() + d.y() * d.y();
  if (a > 0.0) {
    const double b = 2.0 * (qx * d.x() + qy * d.y());
    const double cc = qx * qx + qy * qy - c.radius * c.radius;
    const double disc = b * b - 4.0 * a * cc;
    if (disc >= 0.0) {
      const double t = (-b - std::sqrt(disc)) / (2.0 * a);
      const double z = o.z() + t * d.z();
      if (t > 0.0 && z >= 0.0 && z <= c.height) {
        best = t;
      }
    }
  }
  if (d.z() < 0.0 && o.z() > c.height) {
    const double t = (c.height - o.z()) / d.z();
    const double x = qx + t * d.x();
    const double y = qy + t * d.y();
    if (t > 0.0 && x * x + y * y <= c.radius * c.radius) {
      best = std::min(best, t);
    }
  }
  return best;
}

}  // namespace

double Scene::surface_distance(const Eigen::Vector3d & p) const
{
  double best = std::abs(p.z());
  for (const auto & b : boxes_) {
    best = std::min(best, std::abs(box_distance(b, p)));
  }
  for (const auto & c : cylinders_) {
    best = std::min(best, std::abs(cylinder_distance(c, p)));
  }
  return best;
}

bool Scene::inside_solid(const Eigen::Vector2d & p) const
{
  for (const auto & b : boxes_) {
    const Eigen::Vector3d l = box_local(b, Eigen::Vector3d(p.x(), p.y(), 0.0));
    if (std::abs(l.x()) <= b.half_length && std::abs(l.y()) <= b.half_width) {
      return true;
    }
  }
  for (const auto & c : cylinders_) {
    if ((p - c.center).norm() <= c.radius) {
      return true;
    }
  }
  return false;
}

RenderedFrame render(const Scene & scene, const RigidTransform & pose, const CameraIntrinsics & intr)
{
  intr.validate();
  const Eigen::Vector3d o = pose.translation();
  if (!(o.z() > 0.0)) {
    fail(ErrorCode::kInvalidPose, "camera must be above the ground plane");
  }
  const Eigen::Matrix3d & rot = pose.rotation();
  const Eigen::Matrix3d rot_t = rot.transpose();
  const int w = intr.width;
  const int h = intr.height;
  const double far = scene.options().far_clip;

  // Bin primitives into screen tiles by the projected bounds of their
  // corners; a primitive straddling the camera plane covers every tile.
  constexpr int kTile = 16;
  const int tiles_x = (w + kTile - 1) / kTile;
  const int tiles_y = (h + kTile - 1) / kTile;
  std::vector<std::vector<int>> tiles(static_cast<std::size_t>(tiles_x * tiles_y));
  auto bin = [&](int id, const Eigen::Vector2d & center, double half_a, double half_b, double cosy,
                 double siny, double height) {
    if ((center - o.head<2>()).norm() > far + half_a + half_b) {
      return;
    }
    double u0 = std::numeric_limits<double>::infinity();
    double u1 = -u0;
    double v0 = u0;
    double v1 = -u0;
    int behind = 0;
    for (int k = 0; k < 8; ++k) {
      const double la = (k & 1) ? half_a : -half_a;
      const double lb = (k & 2) ? half_b : -half_b;
      const Eigen::Vector3d corner(
        center.x() + cosy * la - siny * lb, center.y() + siny * la + cosy * lb,
        (k & 4) ? height : 0.0);
      const Eigen::Vector3d c = rot_t * (corner - o);
      if (c.z() <= 1e-6) {
        ++behind;
        continue;
      }
      const double u = intr.fx * c.x() / c.z() + intr.cx;
      const double v = intr.fy * c.y() / c.z() + intr.cy;
      u0 = std::min(u0, u);
      u1 = std::max(u1, u);
      v0 = std::min(v0, v);
      v1 = std::max(v1, v);
    }
    if (behind == 8) {
      return;
    }
    int tx0 = 0, tx1 = tiles_x - 1, ty0 = 0, ty1 = tiles_y - 1;
    if (behind == 0) {
      if (u1 < -1.0 || v1 < -1.0 || u0 > w + 1.0 || v0 > h + 1.0) {
        return;
      }
      tx0 = std::clamp(static_cast<int>(std::floor((u0 - 1.0) / kTile)), 0, tiles_x - 1);
      tx1 = std::clamp(static_cast<int>(std::floor((u1 + 1.0) / kTile)), 0, tiles_x - 1);
      ty0 = std::clamp(static_cast<int>(std::floor((v0 - 1.0) / kTile)), 0, tiles_y - 1);
      ty1 = std::clamp(static_cast<int>(std::floor((v1 + 1.0) / kTile)), 0, tiles_y - 1);
    }
    for (int ty = ty0; ty <= ty1; ++ty) {
      for (int tx = tx0; tx <= tx1; ++tx) {
        tiles[static_cast<std::size_t>(ty * tiles_x + tx)].push_back(id);
      }
    }
  };
  const auto & boxes = scene.boxes();
  const auto & cyls = scene.cylinders();
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const auto & b = boxes[i];
    bin(static_cast<int>(i), b.center, b.half_length, b.half_width, b.cos_yaw, b.sin_yaw, b.height);
  }
  for (std::size_t i = 0; i < cyls.size(); ++i) {
    const auto & c = cyls[i];
    bin(-1 - static_cast<int>(i), c.center, c.radius, c.radius, 1.0, 0.0, c.height);
  }
  const std::vector<std::size_t> segments = scene.track().segments_near(o.head<2>(), far + 5.0);

  RenderedFrame frame;
  frame.pose = pose;
  const std::size_t n = static_cast<std::size_t>(w) * h;
  frame.depth = DepthMap{w, h, std::vector<double>(n, 0.0)};
  frame.intensity = GrayImage{w, h, std::vector<float>(n, 0.0f)};
  frame.material.assign(n, Material::kSky);
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      const Eigen::Vector3d d = rot * Eigen::Vector3d((u - intr.cx) / intr.fx, (v - intr.cy) / intr.fy, 1.0);
      double best = std::numeric_limits<double>::infinity();
      Material mat = Material::kSky;
      bool ground = false;
      if (d.z() < 0.0) {
        best = -o.z() / d.z();
        ground = true;
      }
      for (int id : tiles[static_cast<std::size_t>((v / kTile) * tiles_x + u / kTile)]) {
        if (id >= 0) {
          const double t = ray_box(boxes[static_cast<std::size_t>(id)], o, d);
          if (t < best) {
            best = t;
            mat = boxes[static_cast<std::size_t>(id)].material;
            ground = false;
          }
        } else {
          const auto & c = cyls[static_cast<std::size_t>(-1 - id)];
          const double t = ray_cylinder(c, o, d);
          if (t < best) {
            best = t;
            mat = c.material;
            ground = false;
          }
        }
      }
      const std::size_t i = static_cast<std::size_t>(v) * w + u;
      if (best <= far) {
        if (ground) {
          const Eigen::Vector3d hit = o + best * d;
          mat = scene.ground_material(hit.head<2>(), segments);
        }
        frame.depth.values[i] = best;
      } else {
        mat = Material::kSky;
      }
      frame.material[i] = mat;
      frame.intensity.values[i] = material_intensity(mat);
    }
  }
  frame.edge_truth = EdgeMask::filled(w, h, false);
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      const std::size_t i = static_cast<std::size_t>(v) * w + u;
      const bool right = u + 1 < w && frame.material[i] != frame.material[i + 1];
      const bool down = v + 1 < h && frame.material[i] != frame.material[i + static_cast<std::size_t>(w)];
      frame.edge_truth.bits[i] = (right || down) ? 1 : 0;
    }
  }
  return frame;
}

std::vector<RigidTransform> sample_reference(const Track & track, double spacing)
{
  if (!(spacing > 0.0)) {
    fail(ErrorCode::kInvalidArgument, "pose spacing must be positive");
  }
  std::vector<RigidTransform> poses;
  for (std::size_t k = 0;; ++k) {
    const double s = static_cast<double>(k) * spacing;
    if (s > track.length() + kEps) {
      break;
    }
    const auto c = track.at(s);
    poses.push_back(camera_pose(c.position, c.heading, track.spec().camera_height));
  }
  return poses;
}

std::vector<RigidTransform> perturb(
  const std::vector<RigidTransform> & poses, const PoseNoiseModel & noise)
{
  if (noise.translation_sigma < 0.0 || noise.rotation_sigma < 0.0) {
    fail(ErrorCode::kInvalidArgument, "noise sigmas must be non-negative");
  }
  if (poses.empty() || (noise.translation_sigma == 0.0 && noise.rotation_sigma == 0.0)) {
    return poses;
  }
  std::mt19937_64 rng(noise.seed);
  std::normal_distribution<double> unit(0.0, 1.0);
  const double st = noise.translation_sigma / std::sqrt(3.0);
  const double sr = noise.rotation_sigma / std::sqrt(3.0);
  std::vector<RigidTransform> out;
  out.reserve(poses.size());
  out.push_back(poses.front());
  for (std::size_t k = 1; k < poses.size(); ++k) {
    const Eigen::Vector3d eps(st * unit(rng), st * unit(rng), st * unit(rng));
    const Eigen::Vector3d omega(sr * unit(rng), sr * unit(rng), sr * unit(rng));
    Eigen::Matrix3d rn = Eigen::Matrix3d::Identity();
    if (omega.norm() > 0.0) {
      rn = Eigen::AngleAxisd(omega.norm(), omega.normalized()).toRotationMatrix();
    }
    const RigidTransform step = compose(
      relative_transform(poses[k - 1], poses[k]), RigidTransform::orthonormalized(rn, eps));
    const RigidTransform next = compose(out.back(), step);
    out.push_back(RigidTransform::orthonormalized(next.rotation(), next.translation()));
  }
  return out;
}

double ground_truth_offset(const Track & track, const RigidTransform & pose)
{
  const auto coord = track.locate(pose.translation().head<2>());
  if (!coord) {
    fail(ErrorCode::kOutOfTrack, "pose lies beyond the track extent");
  }
  return coord->offset;
}

}  // namespace lanesynth
