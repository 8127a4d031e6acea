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

#include "stereopipe.h"

#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <memory>
#include <new>
#include <string>

#include "stereopipe/features.hpp"
#include "stereopipe/pipeline.hpp"
#include "stereopipe/synth.hpp"

using namespace stereopipe;

struct sp_config {
	pipeline::PipelineConfig cfg;
	std::string text;
};

struct sp_result {
	pipeline::PipelineResult res;
};

struct sp_scene {
	evalio::SyntheticScene scene;
};

struct sp_table {
	pipeline::Table table;
	std::string csv;
	std::string text;
};

namespace {

thread_local std::string g_last_error;

sp_status to_status(ErrorCode code)
{
	switch (code) {
	case ErrorCode::InvalidArgument: return SP_ERR_INVALID_ARGUMENT;
	case ErrorCode::Range: return SP_ERR_RANGE;
	case ErrorCode::DimensionMismatch: return SP_ERR_DIMENSION;
	case ErrorCode::BadMagic:
	case ErrorCode::DimOverflow:
	case ErrorCode::Truncated:
	case ErrorCode::BadHeader: return SP_ERR_FORMAT;
	case ErrorCode::Io: return SP_ERR_IO;
	case ErrorCode::Numeric: return SP_ERR_NUMERIC;
	case ErrorCode::Degenerate: return SP_ERR_DEGENERATE;
	}
	return SP_ERR_INTERNAL;
}

template <typename F>
sp_status guarded(F &&fn)
{
	try {
		fn();
		g_last_error.clear();
		return SP_OK;
	} catch (const Error &e) {
		g_last_error = e.what();
		return to_status(e.code());
	} catch (const std::bad_alloc &) {
		g_last_error = "out of memory";
		return SP_ERR_INTERNAL;
	} catch (const std::exception &e) {
		g_last_error = e.what();
		return SP_ERR_INTERNAL;
	} catch (...) {
		g_last_error = "unknown error";
		return SP_ERR_INTERNAL;
	}
}

void require(const void *p, const char *what)
{
	if (!p) {
		fail(ErrorCode::InvalidArgument, std::string(what) + " must not be NULL");
	}
}

Image make_image(const float *data, int h, int w, int channels)
{
	require(data, "image data");
	if (h <= 0 || w <= 0 || (channels != 1 && channels != 3)) {
		fail(ErrorCode::InvalidArgument, "image needs positive size and 1 or 3 channels");
	}
	Image img(h, w, channels);
	std::copy(data, data + static_cast<std::size_t>(h) * w * channels, img.data().begin());
	return img;
}

void copy_field(const DisparityField &f, float *out)
{
	require(out, "output buffer");
	for (int i = 0; i < f.height(); ++i) {
		for (int j = 0; j < f.width(); ++j) {
			out[static_cast<std::size_t>(i) * f.width() + j] = f.valid(i, j)
					? static_cast<float>(f(i, j))
					: std::numeric_limits<float>::quiet_NaN();
		}
	}
}

std::vector<evalio::SyntheticScene> load_scenes(const char *const *dirs, std::size_t n)
{
	if (n == 0) {
		fail(ErrorCode::InvalidArgument, "at least one scene directory is required");
	}
	require(dirs, "scene directory list");
	std::vector<evalio::SyntheticScene> scenes;
	for (std::size_t k = 0; k < n; ++k) {
		require(dirs[k], "scene directory");
		scenes.push_back(evalio::load_scene(dirs[k]));
	}
	return scenes;
}

sp_table *wrap_table(pipeline::Table t)
{
	auto *out = new sp_table;
	out->table = std::move(t);
	return out;
}

}

extern "C" {

const char *sp_last_error(void)
{
	return g_last_error.c_str();
}

const char *sp_status_name(sp_status status)
{
	switch (status) {
	case SP_OK: return "ok";
	case SP_ERR_INVALID_ARGUMENT: return "invalid_argument";
	case SP_ERR_RANGE: return "range";
	case SP_ERR_DIMENSION: return "dimension_mismatch";
	case SP_ERR_FORMAT: return "format";
	case SP_ERR_IO: return "io";
	case SP_ERR_NUMERIC: return "numeric";
	case SP_ERR_DEGENERATE: return "degenerate";
	case SP_ERR_INTERNAL: return "internal";
	}
	return "unknown";
}

const char *sp_version(void)
{
	return "0.1.0";
}

sp_status sp_config_create(sp_config **out)
{
	return guarded([&] {
		require(out, "out");
		*out = new sp_config;
	});
}

void sp_config_destroy(sp_config *cfg)
{
	delete cfg;
}

sp_status sp_config_set(sp_config *cfg, const char *key, const char *value)
{
	return guarded([&] {
		require(cfg, "config");
		require(key, "key");
		require(value, "value");
		const std::string k(key);
		const std::string v(value);
		if (k.find_first_of("=\n#") != std::string::npos || v.find('\n') != std::string::npos) {
			fail(ErrorCode::InvalidArgument, "config keys and values must be single tokens");
		}
		cfg->cfg = pipeline::config_from_text(k + "=" + v, cfg->cfg);
	});
}

sp_status sp_config_load(sp_config *cfg, const char *path)
{
	return guarded([&] {
		require(cfg, "config");
		require(path, "path");
		cfg->cfg = pipeline::load_config(path, cfg->cfg);
	});
}

sp_status sp_config_save(const sp_config *cfg, const char *path)
{
	return guarded([&] {
		require(cfg, "config");
		require(path, "path");
		pipeline::save_config(cfg->cfg, path);
	});
}

sp_status sp_config_text(sp_config *cfg, const char **out)
{
	return guarded([&] {
		require(cfg, "config");
		require(out, "out");
		cfg->text = pipeline::config_to_text(cfg->cfg);
		*out = cfg->text.c_str();
	});
}

sp_status sp_pipeline_run(const sp_config *cfg, const float *left, const float *right,
		int height, int width, int channels, sp_result **out)
{
	return guarded([&] {
		require(cfg, "config");
		require(out, "out");
		const Image l = make_image(left, height, width, channels);
		const Image r = make_image(right, height, width, channels);
		auto res = std::make_unique<sp_result>();
		res->res = pipeline::run_pipeline(l, r, cfg->cfg);
		*out = res.release();
	});
}

sp_status sp_pipeline_run_files(const sp_config *cfg, const char *left_path,
		const char *right_path, const char *out_dir, sp_result **out)
{
	return guarded([&] {
		require(cfg, "config");
		require(left_path, "left path");
		require(right_path, "right path");
		require(out_dir, "output directory");
		auto res = std::make_unique<sp_result>();
		res->res = pipeline::run_files(left_path, right_path, cfg->cfg, out_dir);
		if (out) {
			*out = res.release();
		}
	});
}

sp_status sp_result_write(const sp_result *res, const sp_config *cfg, const char *out_dir)
{
	return guarded([&] {
		require(res, "result");
		require(cfg, "config");
		require(out_dir, "output directory");
		pipeline::write_outputs(res->res, cfg->cfg, out_dir);
	});
}

sp_status sp_result_size(const sp_result *res, int *height, int *width)
{
	return guarded([&] {
		require(res, "result");
		require(height, "height");
		require(width, "width");
		*height = res->res.final.height();
		*width = res->res.final.width();
	});
}

sp_status sp_result_final(const sp_result *res, float *out)
{
	return guarded([&] {
		require(res, "result");
		copy_field(res->res.final, out);
	});
}

sp_status sp_result_semi(const sp_result *res, float *out)
{
	return guarded([&] {
		require(res, "result");
		copy_field(res->res.semi, out);
	});
}

void sp_result_destroy(sp_result *res)
{
	delete res;
}

sp_status sp_scene_generate(uint64_t seed, const char *layout, int height, int width,
		int d_min, int d_max, double noise_sigma, const double *layers, size_t n_layers,
		sp_scene **out)
{
	return guarded([&] {
		require(layout, "layout");
		require(out, "out");
		if (n_layers > 0) {
			require(layers, "layers");
		}
		evalio::SceneSpec spec;
		spec.layout = evalio::parse_layout(layout);
		spec.height = height;
		spec.width = width;
		spec.d_min = d_min;
		spec.d_max = d_max;
		spec.noise_sigma = noise_sigma;
		spec.layers.assign(layers, layers + n_layers);
		auto sc = std::make_unique<sp_scene>();
		sc->scene = evalio::generate_scene(seed, spec);
		*out = sc.release();
	});
}

sp_status sp_scene_save(const sp_scene *scene, const char *dir)
{
	return guarded([&] {
		require(scene, "scene");
		require(dir, "directory");
		evalio::save_scene(scene->scene, dir);
	});
}

sp_status sp_scene_load(const char *dir, sp_scene **out)
{
	return guarded([&] {
		require(dir, "directory");
		require(out, "out");
		auto sc = std::make_unique<sp_scene>();
		sc->scene = evalio::load_scene(dir);
		*out = sc.release();
	});
}

sp_status sp_scene_size(const sp_scene *scene, int *height, int *width)
{
	return guarded([&] {
		require(scene, "scene");
		require(height, "height");
		require(width, "width");
		*height = scene->scene.gt_left.height();
		*width = scene->scene.gt_left.width();
	});
}

sp_status sp_scene_gt_left(const sp_scene *scene, float *out)
{
	return guarded([&] {
		require(scene, "scene");
		copy_field(scene->scene.gt_left, out);
	});
}

void sp_scene_destroy(sp_scene *scene)
{
	delete scene;
}

size_t sp_table_rows(const sp_table *t)
{
	return t ? t->table.rows.size() : 0;
}

size_t sp_table_cols(const sp_table *t)
{
	return t ? t->table.header.size() : 0;
}

const char *sp_table_header(const sp_table *t, size_t col)
{
	if (!t || col >= t->table.header.size()) {
		return nullptr;
	}
	return t->table.header[col].c_str();
}

const char *sp_table_cell(const sp_table *t, size_t row, size_t col)
{
	if (!t || row >= t->table.rows.size() || col >= t->table.rows[row].size()) {
		return nullptr;
	}
	return t->table.rows[row][col].c_str();
}

const char *sp_table_csv(sp_table *t)
{
	if (!t) {
		return nullptr;
	}
	t->csv = t->table.to_csv();
	return t->csv.c_str();
}

const char *sp_table_text(sp_table *t)
{
	if (!t) {
		return nullptr;
	}
	t->text = t->table.to_text();
	return t->text.c_str();
}

sp_status sp_table_write_csv(const sp_table *t, const char *path)
{
	return guarded([&] {
		require(t, "table");
		require(path, "path");
		std::ofstream os(path);
		os << t->table.to_csv();
		if (!os) {
			fail(ErrorCode::Io, std::string("cannot write ") + path);
		}
	});
}

void sp_table_destroy(sp_table *t)
{
	delete t;
}

sp_status sp_eval_dirs(const char *pred_dir, const char *gt_dir, const char *format,
		sp_table **out)
{
	return guarded([&] {
		require(pred_dir, "prediction directory");
		require(gt_dir, "ground-truth directory");
		require(format, "format");
		require(out, "out");
		*out = wrap_table(pipeline::eval_dirs(pred_dir, gt_dir, pipeline::parse_eval_format(format)));
	});
}

sp_status sp_sweep_tau(const sp_config *cfg, const char *const *scene_dirs, size_t n_scenes,
		const double *taus, size_t n_taus, sp_lr_mode lr_mode, sp_table **out)
{
	return guarded([&] {
		require(cfg, "config");
		require(out, "out");
		if (n_taus == 0) {
			fail(ErrorCode::InvalidArgument, "at least one tau is required");
		}
		require(taus, "taus");
		pipeline::SweepOptions opts;
		opts.taus.assign(taus, taus + n_taus);
		switch (lr_mode) {
		case SP_LR_OFF: opts.lr_modes = {false}; break;
		case SP_LR_ON: opts.lr_modes = {true}; break;
		case SP_LR_BOTH: opts.lr_modes = {true, false}; break;
		default: fail(ErrorCode::InvalidArgument, "unknown lr mode");
		}
		const auto scenes = load_scenes(scene_dirs, n_scenes);
		*out = wrap_table(pipeline::sweep_table(pipeline::sweep_tau(scenes, opts, cfg->cfg)));
	});
}

sp_status sp_train_feature_transform(const sp_config *cfg, const char *const *scene_dirs,
		size_t n_scenes, double lr, int steps, int batch, uint64_t seed,
		const char *transform_path, sp_table **history)
{
	return guarded([&] {
		require(cfg, "config");
		require(transform_path, "transform path");
		if (!(lr > 0.0) || steps < 0 || batch < 0) {
			fail(ErrorCode::InvalidArgument, "training needs lr > 0, steps >= 0, batch >= 0");
		}
		const auto scenes = load_scenes(scene_dirs, n_scenes);
		losses::AdamConfig adam;
		adam.lr = lr;
		adam.steps = steps;
		adam.batch = batch;
		adam.seed = seed;
		const pipeline::TrainFromScenes run = pipeline::train_from_scenes(scenes, adam, cfg->cfg);
		features::save_transform(run.result.transform, transform_path);
		if (history) {
			*history = wrap_table(pipeline::loss_history_table(run));
		}
	});
}

}
