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

#ifndef STEREOPIPE_SYNTH_HPP
#define STEREOPIPE_SYNTH_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "stereopipe/core.hpp"

namespace stereopipe::evalio {

enum class Layout {
	FrontoLayers,  // background plane plus fronto-parallel rectangles
	Slanted,       // slanted background (disparity falls to the right) plus one rectangle
	NegativeRange, // layers on both sides of zero disparity
};

Layout parse_layout(const std::string &name);
const char *layout_name(Layout layout);

struct SceneSpec {
	Layout layout = Layout::FrontoLayers;
	int height = 128;
	int width = 256;
	int d_min = 0;
	int d_max = 32;
	/// Background first, then one entry per rectangle. Empty: drawn from the
	/// seed (NegativeRange defaults to -20, -5, +15 when the range allows).
	std::vector<double> layers;
	/// Std-dev of additive Gaussian noise on both views, 8-bit units.
	double noise_sigma = 0.0;
};

/// A rectified pair rendered from textured layers. Rectangles never overlap
/// in the left view and are always nearer than the background.
struct SyntheticScene {
	SceneSpec spec;
	std::uint64_t seed = 0;
	Image left;
	Image right;
	DisparityField gt_left;
	DisparityField gt_right;
	/// 1 where the pixel has no counterpart in the other view.
	Grid2D<std::uint8_t> occ_left;
	Grid2D<std::uint8_t> occ_right;
};

SyntheticScene generate_scene(std::uint64_t seed, const SceneSpec &spec);

/// Directory layout: left.png, right.png, gt/disp.pfm, gt/disp.noc.png,
/// gt_right.pfm, occ_left.png, occ_right.png, manifest.txt.
void save_scene(const SyntheticScene &scene, const std::string &dir);
SyntheticScene load_scene(const std::string &dir);

}

#endif
