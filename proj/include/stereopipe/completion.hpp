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

#ifndef STEREOPIPE_COMPLETION_HPP
#define STEREOPIPE_COMPLETION_HPP

#include <vector>

#include "stereopipe/core.hpp"

namespace stereopipe::completion {

struct CompletionConfig {
	int levels = 5;
	int iterations_per_level = 64;
	/// Edge-stopping bandwidth in 8-bit color units.
	double color_sigma = 12.0;
	int spatial_radius = 1;
	double reliability_floor = 0.05;
	/// The finest level keeps iterating past iterations_per_level until the
	/// largest update drops below this (pixels) or max_final_iterations is hit.
	double tolerance = 1e-4;
	int max_final_iterations = 4000;
	/// Upsampled semi-dense pixels whose source neighborhood spans more than
	/// this many source pixels of disparity are treated as unknown.
	double upsample_max_spread = 1.0;
	int threads = 1;
};

void validate(const CompletionConfig &cfg);

struct CompletionResult {
	/// Dense full-resolution disparity.
	DisparityField final;
	/// Dense state after each pyramid level, coarsest first; level l (counted
	/// from the finest) is at 1/2^l resolution and in 1/2^l disparity units.
	std::vector<DisparityField> levels;
};

/// Fills the invalid pixels of `semi` by coarse-to-fine diffusion whose
/// weights combine color similarity in `left` and the reliability of the
/// neighbor. `semi`, `init` and `reliability` may be at 1/f of the image
/// resolution (f a power of two); they are upsampled first. Known pixels are
/// preserved and every filled region is bounded by the known values around it.
CompletionResult complete(const DisparityField &semi, const DisparityField &init,
		const Grid2D<double> &reliability, const Image &left, const CompletionConfig &cfg);

/// The last `count` per-level maps (coarsest of those first). Requires the
/// completion to have run with at least `count` levels.
std::vector<DisparityField> multiscale_outputs(const CompletionResult &result, int count = 5);

}

#endif
