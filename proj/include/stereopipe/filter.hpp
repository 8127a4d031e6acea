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

#ifndef STEREOPIPE_FILTER_HPP
#define STEREOPIPE_FILTER_HPP

#include "stereopipe/core.hpp"
#include "stereopipe/matcher.hpp"

namespace stereopipe::filter {

/// Pixel sets used by the training losses.
///  occluded       - valid ground truth without a counterpart in the other view
///                   (hidden by a nearer surface, or warped outside the image)
///  double_visible - valid ground truth and not occluded
///  unreliable     - occluded, or |init - gt| >= 1
///  to_refine      - double visible and |init - gt| <= 1
struct RegionPartition {
	Grid2D<std::uint8_t> occluded;
	Grid2D<std::uint8_t> double_visible;
	Grid2D<std::uint8_t> unreliable;
	Grid2D<std::uint8_t> to_refine;
};

inline constexpr double kDefaultMaxDiff = 1.0;

DisparityField lr_consistency_filter(const DisparityField &left_est,
		const DisparityField &right_est, double max_diff = kDefaultMaxDiff);

/// Keeps pixels whose reliability is strictly greater than tau.
DisparityField reliability_filter(const matcher::MapEstimate &est, double tau);

/// Scanline z-buffer occlusion of a left-view ground-truth map: pixel j is
/// occluded when another pixel with strictly larger disparity lands on the
/// same rounded right-view column, or when its own target is outside the image.
Grid2D<std::uint8_t> occlusion_mask(const DisparityField &gt);

RegionPartition derive_regions(const DisparityField &gt, const DisparityField &init);

}

#endif
