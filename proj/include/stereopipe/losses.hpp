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

#ifndef STEREOPIPE_LOSSES_HPP
#define STEREOPIPE_LOSSES_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "stereopipe/core.hpp"
#include "stereopipe/features.hpp"
#include "stereopipe/filter.hpp"
#include "stereopipe/matcher.hpp"

namespace stereopipe::losses {

/// Floor applied to probabilities and to (1 - r) inside every logarithm.
inline constexpr double kLogFloor = 1e-12;

struct LossBreakdown {
	double dvr = 0.0;
	double ur = 0.0;
	double trr = 0.0;
	double total = 0.0;
	std::size_t n_v = 0;
	std::size_t n_u = 0;
	std::size_t n_t = 0;
};

/// Triangle weights over t-1, t, t+1 around the ground truth, normalized.
struct TentWeights {
	int t = 0;
	std::array<double, 3> w{};
};

TentWeights tent_weights(double d_gt);

struct ScalarLoss {
	double value = 0.0;
	std::size_t count = 0;
};

/// Double-visible-region cross entropy against tent weights. When `grad_scores`
/// is given, d(loss)/d(score) is added into it (softmax applied to beta * score).
ScalarLoss loss_dvr(const matcher::ProbabilityVolume &pv, const DisparityField &gt,
		const filter::RegionPartition &regions, double beta,
		matcher::Volume *grad_scores = nullptr);

/// Mean of -log(1 - r) over the unreliable region; gradient w.r.t. r.
ScalarLoss loss_ur(const Grid2D<double> &reliability, const filter::RegionPartition &regions,
		Grid2D<double> *grad_reliability = nullptr);

/// Mean |init - gt| over the to-refine region; gradient w.r.t. init.
ScalarLoss loss_trr(const DisparityField &init, const DisparityField &gt,
		const filter::RegionPartition &regions, Grid2D<double> *grad_init = nullptr);

struct SmoothL1 {
	double value = 0.0;
	std::size_t count = 0;
	/// Set when pred and gt share no valid pixel; value is then 0.
	bool empty = false;
};

/// Mean of 0.5 e^2 (|e| < 1) or |e| - 0.5 over pixels valid in both maps.
SmoothL1 smooth_l1(const DisparityField &pred, const DisparityField &gt,
		Grid2D<double> *grad_pred = nullptr);

/// Discrete structure of a forward pass. Holding it fixed makes the loss a
/// smooth function of the scores, which is what finite differences probe.
struct Structure {
	filter::RegionPartition regions;
	Grid2D<int> argmax;
};

/// All three stage-one losses on one probability volume, with the gradient
/// of the total w.r.t. the scores routed through r and the sub-pixel offset.
LossBreakdown evaluate_volume(const matcher::ProbabilityVolume &pv, const DisparityField &gt,
		double beta, bool subpixel, const Structure *fixed = nullptr,
		matcher::Volume *grad_scores = nullptr, Structure *structure_out = nullptr);

struct TrainingSample {
	features::FeatureMap left;  // frozen front-end descriptors
	features::FeatureMap right;
	DisparityField gt;          // at feature scale, feature-scale units
};

struct ObjectiveOptions {
	double beta = 1.0;
	bool subpixel = true;
	int threads = 1;
};

struct TransformGradient {
	std::vector<double> matrix;
	std::vector<double> bias;
};

/// Total loss of one sample as a function of the transform parameters.
LossBreakdown transform_objective(const TrainingSample &sample, const DisparityRange &range,
		const features::FeatureTransform &t, const ObjectiveOptions &opts,
		TransformGradient *grad = nullptr, const Structure *fixed = nullptr,
		Structure *structure_out = nullptr);

struct AdamConfig {
	double lr = 0.01;
	int steps = 200;
	int batch = 0; // 0: every sample each step
	std::uint64_t seed = 0;
	double beta1 = 0.9;
	double beta2 = 0.999;
	double eps = 1e-8;
};

struct TrainingResult {
	features::FeatureTransform transform;
	/// history[s] is the batch-mean loss evaluated before update s; the last
	/// entry is the loss after the final update.
	std::vector<LossBreakdown> history;
};

TrainingResult train_feature_transform(const std::vector<TrainingSample> &samples,
		const DisparityRange &range, const features::FeatureTransform &init,
		const AdamConfig &config, const ObjectiveOptions &opts);

/// Trailing moving average of the total loss with the given window.
std::vector<double> smoothed_totals(const std::vector<LossBreakdown> &history, int window);

}

#endif
