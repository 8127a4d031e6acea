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

#ifndef STEREOPIPE_PIPELINE_HPP
#define STEREOPIPE_PIPELINE_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "stereopipe/completion.hpp"
#include "stereopipe/core.hpp"
#include "stereopipe/features.hpp"
#include "stereopipe/losses.hpp"
#include "stereopipe/matcher.hpp"
#include "stereopipe/synth.hpp"

namespace stereopipe::pipeline {

enum class FeatureSource { Census, Files };

struct PipelineConfig {
	int d_min = 0;
	int d_max = 64;
	double tau = 0.3;
	bool lr_check = true;
	bool subpixel = true;
	/// Inverse temperature of the softmax over correlation scores.
	double beta = 16.0;
	FeatureSource features = FeatureSource::Census;
	std::string left_feat;
	std::string right_feat;
	/// Optional learned FeatureTransform applied on top of census features.
	std::string transform;
	int feature_factor = 2; // census features at 1/feature_factor resolution
	int census_height = 7;
	int census_width = 9;
	completion::CompletionConfig completion;
	int threads = 0; // 0: STEREOPIPE_THREADS, else hardware concurrency
	std::uint64_t seed = 0;
};

/// Throws InvalidArgument/Range on any field that cannot run.
void validate(const PipelineConfig &cfg);

/// Flat key=value text, one entry per line; '#' starts a comment.
std::string config_to_text(const PipelineConfig &cfg);
PipelineConfig config_from_text(const std::string &text, PipelineConfig base = {});
PipelineConfig load_config(const std::string &path, PipelineConfig base = {});
void save_config(const PipelineConfig &cfg, const std::string &path);

int resolve_threads(int threads);

struct StageTiming {
	std::string stage;
	double seconds = 0.0;
};

struct PipelineResult {
	DisparityField final;            // full resolution, dense
	DisparityField semi;             // full resolution, after filtering and upsampling
	DisparityField semi_feature;     // at feature scale, feature units
	DisparityField init_full;        // full resolution
	matcher::MapEstimate left;       // at feature scale
	Grid2D<double> reliability_full; // full resolution
	std::vector<StageTiming> timings;
	std::size_t streaming_bytes = 0;
	std::size_t materialized_bytes = 0;
	int threads = 1;
	int factor = 1;
	std::vector<std::string> notes;
};

/// Features, matcher, filter, upsample, completion. Errors carry the failing
/// stage name as a message prefix; the error code is preserved.
PipelineResult run_pipeline(const Image &left, const Image &right, const PipelineConfig &cfg);

/// disp.pfm, disp.png (when KITTI-representable), disp_color.png with
/// disp_color.txt, reliability.png, semi.pfm, timing.json, config.txt.
void write_outputs(const PipelineResult &result, const PipelineConfig &cfg,
		const std::string &dir);

/// Reads both images, checks every input, then runs and writes outputs. Nothing
/// is written when an input is missing or the run fails.
PipelineResult run_files(const std::string &left_path, const std::string &right_path,
		const PipelineConfig &cfg, const std::string &out_dir);

/// Turbo-style colormap, t in [0, 1] (clamped), blue at 0 and red at 1.
std::array<std::uint8_t, 3> turbo(double t);
Image colorize(const DisparityField &field, double d_min, double d_max);

struct Table {
	std::vector<std::string> header;
	std::vector<std::vector<std::string>> rows;

	std::string to_csv() const;
	std::string to_text() const;
};

struct SweepRow {
	double tau = 0.0;
	bool lr_check = false;
	double density = 0.0;   // semi-dense, percent of valid-gt pixels (suite mean)
	double semi_bad1 = 0.0; // percent of kept pixels with error > 1
	double d1_all = 0.0;
	double bad2 = 0.0;
	double epe = 0.0;
	bool degenerate = false; // completion impossible for at least one scene
};

struct SweepOptions {
	std::vector<double> taus;
	std::vector<bool> lr_modes{true, false};
	bool run_completion = true;
};

/// One row per (lr_check, tau), lr_check-major, taus in the given order.
/// Metrics are means over scenes; completion failures only mark the row.
std::vector<SweepRow> sweep_tau(const std::vector<evalio::SyntheticScene> &scenes,
		const SweepOptions &opts, const PipelineConfig &cfg);
Table sweep_table(const std::vector<SweepRow> &rows);

enum class EvalFormat { Pfm, Kitti };
EvalFormat parse_eval_format(const std::string &name);

/// For every ground-truth map in gt_dir a same-named prediction must exist in
/// pred_dir. A sibling `<stem>.noc.png` mask adds non-occluded columns.
Table eval_dirs(const std::string &pred_dir, const std::string &gt_dir, EvalFormat format);

struct TrainFromScenes {
	losses::TrainingResult result;
	std::vector<double> smoothed;
};

/// Builds frozen census descriptors and feature-scale ground truth for each
/// scene, then fits a FeatureTransform starting from identity.
losses::TrainingSample make_training_sample(const evalio::SyntheticScene &scene,
		const PipelineConfig &cfg);
TrainFromScenes train_from_scenes(const std::vector<evalio::SyntheticScene> &scenes,
		const losses::AdamConfig &adam, const PipelineConfig &cfg, int smooth_window = 20);
Table loss_history_table(const TrainFromScenes &run);

}

#endif
