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

/* C interface of lanesynth. Every function returning ls_status leaves a
 * message for ls_last_error_message() on failure. Handles are opaque and
 * must be released with the matching *_destroy function. */

#ifndef LANESYNTH__LANESYNTH_H_
#define LANESYNTH__LANESYNTH_H_

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(__GNUC__)
#define LS_API __attribute__((visibility("default")))
#else
#define LS_API
#endif

typedef enum ls_status
{
  LS_OK = 0,
  LS_INVALID_ARGUMENT,
  LS_CONFIGURATION,
  LS_PARSE,
  LS_IO,
  LS_DEGENERATE_PROJECTION,
  LS_DEGENERATE_FRAME,
  LS_END_OF_TRAJECTORY,
  LS_INVALID_POSE,
  LS_OUT_OF_TRACK,
  LS_INVALID_INPUT,
  LS_INCOMPATIBLE_VERSION,
  LS_VERIFICATION,
  LS_INTERNAL
} ls_status;

LS_API const char * ls_version(void);
LS_API const char * ls_status_string(ls_status status);
/* Message of the last failure on the calling thread, "" if none. */
LS_API const char * ls_last_error_message(void);

typedef void (*ls_log_fn)(const char * line, void * user);
/* Progress lines of the command functions. NULL silences them. */
LS_API void ls_set_log_callback(ls_log_fn fn, void * user);

/* --- options ---------------------------------------------------------- */

typedef struct ls_options ls_options;

LS_API ls_status ls_options_create(ls_options ** out);
LS_API void ls_options_destroy(ls_options * opts);
/* Merges an INI file; keys are "section.name". */
LS_API ls_status ls_options_load_file(ls_options * opts, const char * path);
LS_API ls_status ls_options_set(ls_options * opts, const char * key, const char * value);
/* Copies the value (NUL terminated, truncated to cap) into buf; *needed
 * receives the full length including the terminator. */
LS_API ls_status ls_options_get(
  const ls_options * opts, const char * key, char * buf, size_t cap, size_t * needed);

/* --- geometry --------------------------------------------------------- */

/* Rigid transform as the top 3x4 block, row-major. */
typedef struct ls_pose
{
  double m[12];
} ls_pose;

LS_API ls_pose ls_pose_identity(void);
LS_API ls_status ls_pose_compose(const ls_pose * a, const ls_pose * b, ls_pose * out);
LS_API ls_status ls_pose_inverse(const ls_pose * t, ls_pose * out);
/* Transform taking coordinates of frame a into frame b. */
LS_API ls_status ls_pose_relative(const ls_pose * t_b, const ls_pose * t_a, ls_pose * out);
LS_API ls_pose ls_pose_lateral_shift(double x);
LS_API ls_status ls_lateral_offset(const ls_pose * current, const ls_pose * future, double * out);
LS_API double ls_steering_from_offset(double delta_x, double alpha);

/* --- point clouds ----------------------------------------------------- */

typedef struct ls_cloud ls_cloud;

LS_API ls_status ls_cloud_create(const double * xyz, size_t count, ls_cloud ** out);
LS_API ls_status ls_cloud_read_ply(const char * path, ls_cloud ** out);
LS_API ls_status ls_cloud_write_ply(const ls_cloud * cloud, const char * path, int ascii);
LS_API size_t ls_cloud_size(const ls_cloud * cloud);
/* Copies up to cap points as interleaved xyz; returns the number copied. */
LS_API size_t ls_cloud_points(const ls_cloud * cloud, double * xyz, size_t cap);
LS_API void ls_cloud_destroy(ls_cloud * cloud);

/* --- models ----------------------------------------------------------- */

typedef struct ls_model ls_model;

LS_API ls_status ls_model_load(const char * path, ls_model ** out);
/* Predicted lateral offset in meters. */
LS_API ls_status ls_model_predict(const ls_model * model, const ls_cloud * cloud, double * out);
LS_API size_t ls_model_parameter_count(const ls_model * model);
LS_API void ls_model_destroy(ls_model * model);

/* --- tracks ----------------------------------------------------------- */

typedef struct ls_track ls_track;

/* A preset name or a track spec file. */
LS_API ls_status ls_track_load(const char * name_or_path, ls_track ** out);
LS_API double ls_track_length(const ls_track * track);
LS_API double ls_track_lane_width(const ls_track * track);
LS_API void ls_track_destroy(ls_track * track);

/* --- commands --------------------------------------------------------- */

LS_API ls_status ls_gen_world(const ls_options * opts, const char * out_dir);
LS_API ls_status ls_gen_dataset(const ls_options * opts, const char * sequence_dir, const char * out_dir);
LS_API ls_status ls_train(const ls_options * opts, const char * dataset_dir, const char * out_dir);
/* models: count entries of the form "name=path/to/model.lsnn". */
LS_API ls_status ls_evaluate(
  const ls_options * opts, const char * const * models, size_t count, const char * out_dir);
LS_API ls_status ls_export_ply(
  const ls_options * opts, const char * sequence_dir, int64_t frame, double offset, int ascii,
  const char * out_dir);
LS_API ls_status ls_verify(const char * artifact_dir, int rederive);

#ifdef __cplusplus
}
#endif

#endif /* LANESYNTH__LANESYNTH_H_ */
