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

#include "lanesynth/error.hpp"
#include "lanesynth/io.hpp"
#include "lanesynth/pipeline.hpp"

#include <cstring>
#include <mutex>
#include <new>

struct ls_options
{
  lanesynth::Options impl;
};

struct ls_cloud
{
  lanesynth::PointCloud impl;
};

struct ls_model
{
  lanesynth::PointNetLite impl;
};

struct ls_track
{
  lanesynth::Track impl;
};

namespace
{

thread_local std::string g_last_error;

std::mutex g_log_mutex;
ls_log_fn g_log_fn = nullptr;
void * g_log_user = nullptr;

ls_status to_status(lanesynth::ErrorCode code)
{
  return static_cast<ls_status>(static_cast<int>(code) + 1);
}

template <typename F>
ls_status guarded(F && f)
{
  g_last_error.clear();
  try {
    f();
    return LS_OK;
  } catch (const lanesynth::Error & e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::filesystem::filesystem_error & e) {
    g_last_error = e.what();
    return LS_IO;
  } catch (const std::bad_alloc &) {
    g_last_error = "out of memory";
    return LS_INTERNAL;
  } catch (const std::exception & e) {
    g_last_error = e.what();
    return LS_INTERNAL;
  } catch (...) {
    g_last_error = "unknown exception";
    return LS_INTERNAL;
  }
}

void require(const void * p, const char * what)
{
  if (p == nullptr) {
    lanesynth::fail(lanesynth::ErrorCode::kInvalidArgument, std::string(what) + " is NULL");
  }
}

lanesynth::LogFn logger()
{
  return [](const std::string & line) {
    std::lock_guard<std::mutex> lock(g_log_mutex);
    if (g_log_fn != nullptr) {
      g_log_fn(line.c_str(), g_log_user);
    }
  };
}

lanesynth::RigidTransform to_cpp(const ls_pose * p)
{
  require(p, "pose");
  std::array<double, 12> v;
  std::copy(p->m, p->m + 12, v.begin());
  return lanesynth::RigidTransform::from_row_major(v);
}

ls_pose to_c(const lanesynth::RigidTransform & t)
{
  ls_pose p;
  const auto v = t.row_major();
  std::copy(v.begin(), v.end(), p.m);
  return p;
}

}  // namespace

extern "C" {

const char * ls_version(void) { return lanesynth::kToolVersion; }

const char * ls_status_string(ls_status status)
{
  if (status == LS_OK) {
    return "ok";
  }
  if (status < LS_OK || status > LS_INTERNAL) {
    return "unknown status";
  }
  return lanesynth::to_string(static_cast<lanesynth::ErrorCode>(static_cast<int>(status) - 1));
}

const char * ls_last_error_message(void) { return g_last_error.c_str(); }

void ls_set_log_callback(ls_log_fn fn, void * user)
{
  std::lock_guard<std::mutex> lock(g_log_mutex);
  g_log_fn = fn;
  g_log_user = user;
}

ls_status ls_options_create(ls_options ** out)
{
  return guarded([&] {
    require(out, "out");
    *out = new ls_options{};
  });
}

void ls_options_destroy(ls_options * opts) { delete opts; }

ls_status ls_options_load_file(ls_options * opts, const char * path)
{
  return guarded([&] {
    require(opts, "options");
    require(path, "path");
    opts->impl.load_file(path);
  });
}

ls_status ls_options_set(ls_options * opts, const char * key, const char * value)
{
  return guarded([&] {
    require(opts, "options");
    require(key, "key");
    require(value, "value");
    opts->impl.set(key, value);
  });
}

ls_status ls_options_get(const ls_options * opts, const char * key, char * buf, size_t cap, size_t * needed)
{
  return guarded([&] {
    require(opts, "options");
    require(key, "key");
    if (!opts->impl.has(key)) {
      lanesynth::fail(lanesynth::ErrorCode::kConfiguration, std::string("unknown option '") + key + "'");
    }
    const std::string v = opts->impl.get(key);
    if (needed != nullptr) {
      *needed = v.size() + 1;
    }
    if (buf != nullptr && cap > 0) {
      const size_t n = std::min(cap - 1, v.size());
      std::memcpy(buf, v.data(), n);
      buf[n] = '\0';
    }
  });
}

ls_pose ls_pose_identity(void) { return to_c(lanesynth::RigidTransform::identity()); }

ls_status ls_pose_compose(const ls_pose * a, const ls_pose * b, ls_pose * out)
{
  return guarded([&] {
    require(out, "out");
    *out = to_c(lanesynth::compose(to_cpp(a), to_cpp(b)));
  });
}

ls_status ls_pose_inverse(const ls_pose * t, ls_pose * out)
{
  return guarded([&] {
    require(out, "out");
    *out = to_c(lanesynth::inverse(to_cpp(t)));
  });
}

ls_status ls_pose_relative(const ls_pose * t_b, const ls_pose * t_a, ls_pose * out)
{
  return guarded([&] {
    require(out, "out");
    *out = to_c(lanesynth::relative_transform(to_cpp(t_b), to_cpp(t_a)));
  });
}

ls_pose ls_pose_lateral_shift(double x) { return to_c(lanesynth::lateral_shift(x)); }

ls_status ls_lateral_offset(const ls_pose * current, const ls_pose * future, double * out)
{
  return guarded([&] {
    require(out, "out");
    *out = lanesynth::lateral_offset(to_cpp(current), to_cpp(future));
  });
}

double ls_steering_from_offset(double delta_x, double alpha)
{
  return lanesynth::steering_from_offset(delta_x, lanesynth::SteeringParams{alpha, 5.0});
}

ls_status ls_cloud_create(const double * xyz, size_t count, ls_cloud ** out)
{
  return guarded([&] {
    require(out, "out");
    if (count > 0) {
      require(xyz, "xyz");
    }
    auto c = std::make_unique<ls_cloud>();
    c->impl.points.reserve(count);
    for (size_t i = 0; i < count; ++i) {
      c->impl.points.emplace_back(xyz[3 * i], xyz[3 * i + 1], xyz[3 * i + 2]);
    }
    if (!lanesynth::all_finite(c->impl)) {
      lanesynth::fail(lanesynth::ErrorCode::kInvalidInput, "cloud has non-finite coordinates");
    }
    *out = c.release();
  });
}

ls_status ls_cloud_read_ply(const char * path, ls_cloud ** out)
{
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    auto c = std::make_unique<ls_cloud>();
    c->impl = lanesynth::read_ply(path);
    *out = c.release();
  });
}

ls_status ls_cloud_write_ply(const ls_cloud * cloud, const char * path, int ascii)
{
  return guarded([&] {
    require(cloud, "cloud");
    require(path, "path");
    lanesynth::write_ply(
      path, cloud->impl, ascii ? lanesynth::PlyFormat::kAscii : lanesynth::PlyFormat::kBinaryLittleEndian);
  });
}

size_t ls_cloud_size(const ls_cloud * cloud) { return cloud ? cloud->impl.size() : 0; }

size_t ls_cloud_points(const ls_cloud * cloud, double * xyz, size_t cap)
{
  if (cloud == nullptr || xyz == nullptr) {
    return 0;
  }
  const size_t n = std::min(cap, cloud->impl.size());
  for (size_t i = 0; i < n; ++i) {
    const auto & p = cloud->impl.points[i];
    xyz[3 * i] = p.x();
    xyz[3 * i + 1] = p.y();
    xyz[3 * i + 2] = p.z();
  }
  return n;
}

void ls_cloud_destroy(ls_cloud * cloud) { delete cloud; }

ls_status ls_model_load(const char * path, ls_model ** out)
{
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new ls_model{lanesynth::load_checkpoint(path).net};
  });
}

ls_status ls_model_predict(const ls_model * model, const ls_cloud * cloud, double * out)
{
  return guarded([&] {
    require(model, "model");
    require(cloud, "cloud");
    require(out, "out");
    *out = model->impl.forward(cloud->impl);
  });
}

size_t ls_model_parameter_count(const ls_model * model) { return model ? model->impl.parameter_count() : 0; }

void ls_model_destroy(ls_model * model) { delete model; }

ls_status ls_track_load(const char * name_or_path, ls_track ** out)
{
  return guarded([&] {
    require(name_or_path, "track");
    require(out, "out");
    *out = new ls_track{lanesynth::Track(lanesynth::load_track(name_or_path))};
  });
}

double ls_track_length(const ls_track * track) { return track ? track->impl.length() : 0.0; }

double ls_track_lane_width(const ls_track * track) { return track ? track->impl.spec().lane_width : 0.0; }

void ls_track_destroy(ls_track * track) { delete track; }

ls_status ls_gen_world(const ls_options * opts, const char * out_dir)
{
  return guarded([&] {
    require(opts, "options");
    require(out_dir, "out_dir");
    lanesynth::cmd_gen_world(opts->impl, out_dir, logger());
  });
}

ls_status ls_gen_dataset(const ls_options * opts, const char * sequence_dir, const char * out_dir)
{
  return guarded([&] {
    require(opts, "options");
    require(sequence_dir, "sequence_dir");
    require(out_dir, "out_dir");
    lanesynth::cmd_gen_dataset(opts->impl, sequence_dir, out_dir, logger());
  });
}

ls_status ls_train(const ls_options * opts, const char * dataset_dir, const char * out_dir)
{
  return guarded([&] {
    require(opts, "options");
    require(dataset_dir, "dataset_dir");
    require(out_dir, "out_dir");
    lanesynth::cmd_train(opts->impl, dataset_dir, out_dir, logger());
  });
}

ls_status ls_evaluate(const ls_options * opts, const char * const * models, size_t count, const char * out_dir)
{
  return guarded([&] {
    require(opts, "options");
    require(out_dir, "out_dir");
    if (count > 0) {
      require(models, "models");
    }
    std::vector<lanesynth::ModelSpec> specs;
    for (size_t i = 0; i < count; ++i) {
      require(models[i], "model spec");
      const std::string s = models[i];
      const auto eq = s.find('=');
      if (eq == std::string::npos || eq == 0 || eq + 1 == s.size()) {
        lanesynth::fail(lanesynth::ErrorCode::kInvalidArgument, "model spec '" + s + "' is not name=path");
      }
      specs.push_back(lanesynth::ModelSpec{s.substr(0, eq), s.substr(eq + 1)});
    }
    lanesynth::cmd_evaluate(opts->impl, specs, out_dir, logger());
  });
}

ls_status ls_export_ply(
  const ls_options * opts, const char * sequence_dir, int64_t frame, double offset, int ascii, const char * out_dir)
{
  return guarded([&] {
    require(opts, "options");
    require(sequence_dir, "sequence_dir");
    require(out_dir, "out_dir");
    lanesynth::cmd_export_ply(opts->impl, sequence_dir, frame, offset, ascii != 0, out_dir, logger());
  });
}

ls_status ls_verify(const char * artifact_dir, int rederive)
{
  return guarded([&] {
    require(artifact_dir, "artifact_dir");
    lanesynth::cmd_verify(artifact_dir, rederive != 0, logger());
  });
}

}  // extern "C"
