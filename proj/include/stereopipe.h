/*
Copyright 2026 The stereopipe Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

#ifndef STEREOPIPE_H
#define STEREOPIPE_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SP_API __declspec(dllexport)
#else
#define SP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sp_status {
	SP_OK = 0,
	SP_ERR_INVALID_ARGUMENT = 1,
	SP_ERR_RANGE = 2,
	SP_ERR_DIMENSION = 3,
	SP_ERR_FORMAT = 4,
	SP_ERR_IO = 5,
	SP_ERR_NUMERIC = 6,
	SP_ERR_DEGENERATE = 7,
	SP_ERR_INTERNAL = 8,
} sp_status;

/* Message of the last failing call on this thread ("" if none). */
SP_API const char *sp_last_error(void);
SP_API const char *sp_status_name(sp_status status);
SP_API const char *sp_version(void);

/* Pipeline configuration. Keys and values follow the key=value config file. */
typedef struct sp_config sp_config;

SP_API sp_status sp_config_create(sp_config **out);
SP_API void sp_config_destroy(sp_config *cfg);
SP_API sp_status sp_config_set(sp_config *cfg, const char *key, const char *value);
SP_API sp_status sp_config_load(sp_config *cfg, const char *path);
SP_API sp_status sp_config_save(const sp_config *cfg, const char *path);
/* The whole configuration as text; valid until the next call on cfg. */
SP_API sp_status sp_config_text(sp_config *cfg, const char **out);

/* A finished pipeline run. */
typedef struct sp_result sp_result;

/* Images are interleaved float intensities in [0, 255], channels 1 or 3. */
SP_API sp_status sp_pipeline_run(const sp_config *cfg, const float *left, const float *right,
		int height, int width, int channels, sp_result **out);
/* Reads both images, runs, then writes every output into out_dir. Nothing is
 * written when any input is invalid. out may be NULL. */
SP_API sp_status sp_pipeline_run_files(const sp_config *cfg, const char *left_path,
		const char *right_path, const char *out_dir, sp_result **out);
SP_API sp_status sp_result_write(const sp_result *res, const sp_config *cfg, const char *out_dir);
SP_API sp_status sp_result_size(const sp_result *res, int *height, int *width);
/* height*width floats each; invalid pixels are NaN. */
SP_API sp_status sp_result_final(const sp_result *res, float *out);
SP_API sp_status sp_result_semi(const sp_result *res, float *out);
SP_API void sp_result_destroy(sp_result *res);

/* Synthetic scenes. layout: "fronto_layers", "slanted" or "negative_range". */
typedef struct sp_scene sp_scene;

SP_API sp_status sp_scene_generate(uint64_t seed, const char *layout, int height, int width,
		int d_min, int d_max, double noise_sigma, const double *layers, size_t n_layers,
		sp_scene **out);
SP_API sp_status sp_scene_save(const sp_scene *scene, const char *dir);
SP_API sp_status sp_scene_load(const char *dir, sp_scene **out);
SP_API sp_status sp_scene_size(const sp_scene *scene, int *height, int *width);
/* height*width floats; invalid pixels are NaN. */
SP_API sp_status sp_scene_gt_left(const sp_scene *scene, float *out);
SP_API void sp_scene_destroy(sp_scene *scene);

/* String tables returned by evaluation, sweeps and training. */
typedef struct sp_table sp_table;

SP_API size_t sp_table_rows(const sp_table *t);
SP_API size_t sp_table_cols(const sp_table *t);
SP_API const char *sp_table_header(const sp_table *t, size_t col);
SP_API const char *sp_table_cell(const sp_table *t, size_t row, size_t col);
/* Rendered text, valid until the table is destroyed. */
SP_API const char *sp_table_csv(sp_table *t);
SP_API const char *sp_table_text(sp_table *t);
SP_API sp_status sp_table_write_csv(const sp_table *t, const char *path);
SP_API void sp_table_destroy(sp_table *t);

/* format: "pfm" or "kitti". */
SP_API sp_status sp_eval_dirs(const char *pred_dir, const char *gt_dir, const char *format,
		sp_table **out);

typedef enum sp_lr_mode { SP_LR_OFF = 0, SP_LR_ON = 1, SP_LR_BOTH = 2 } sp_lr_mode;

SP_API sp_status sp_sweep_tau(const sp_config *cfg, const char *const *scene_dirs,
		size_t n_scenes, const double *taus, size_t n_taus, sp_lr_mode lr_mode, sp_table **out);

/* Fits a FeatureTransform on the scenes and writes it to transform_path.
 * history (may be NULL) receives the per-step loss table. */
SP_API sp_status sp_train_feature_transform(const sp_config *cfg,
		const char *const *scene_dirs, size_t n_scenes, double lr, int steps, int batch,
		uint64_t seed, const char *transform_path, sp_table **history);

#ifdef __cplusplus
}
#endif

#endif
