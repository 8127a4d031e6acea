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

#include "stereopipe/filter.hpp"

#include <unordered_map>

namespace stereopipe::filter {

DisparityField lr_consistency_filter(const DisparityField &left_est,
		const DisparityField &right_est, double max_diff)
{
	if (!left_est.same_shape(right_est)) {
		fail(ErrorCode::DimensionMismatch, "left/right estimates differ in size");
	}
	DisparityField out(left_est.height(), left_est.width());
	for (int i = 0; i < left_est.height(); ++i) {
		for (int j = 0; j < left_est.width(); ++j) {
			if (!left_est.valid(i, j)) {
				continue;
			}
			const double d = left_est(i, j);
			const long jr = round_half_away(j - d);
			if (jr < 0 || jr >= right_est.width()) {
				continue;
			}
			const int c = static_cast<int>(jr);
			if (right_est.valid(i, c) && std::abs(d - right_est(i, c)) <= max_diff) {
				out.set(i, j, d);
			}
		}
	}
	return out;
}

DisparityField reliability_filter(const matcher::MapEstimate &est, double tau)
{
	if (!(tau >= 0.0 && tau <= 1.0)) {
		fail(ErrorCode::InvalidArgument, "reliability threshold must lie in [0, 1]");
	}
	const DisparityField &init = est.init;
	DisparityField out(init.height(), init.width());
	for (int i = 0; i < init.height(); ++i) {
		for (int j = 0; j < init.width(); ++j) {
			if (init.valid(i, j) && est.reliability(i, j) > tau) {
				out.set(i, j, init(i, j));
			}
		}
	}
	return out;
}

Grid2D<std::uint8_t> occlusion_mask(const DisparityField &gt)
{
	const int h = gt.height();
	const int w = gt.width();
	Grid2D<std::uint8_t> occ(h, w, 0);
	std::unordered_map<long, double> zbuf;
	for (int i = 0; i < h; ++i) {
		zbuf.clear();
		for (int j = 0; j < w; ++j) {
			if (!gt.valid(i, j)) {
				continue;
			}
			const long target = round_half_away(j - gt(i, j));
			auto [it, inserted] = zbuf.try_emplace(target, gt(i, j));
			if (!inserted && gt(i, j) > it->second) {
				it->second = gt(i, j);
			}
		}
		for (int j = 0; j < w; ++j) {
			if (!gt.valid(i, j)) {
				continue;
			}
			const long target = round_half_away(j - gt(i, j));
			if (target < 0 || target >= w || gt(i, j) < zbuf.at(target)) {
				occ(i, j) = 1;
			}
		}
	}
	return occ;
}

RegionPartition derive_regions(const DisparityField &gt, const DisparityField &init)
{
	if (!gt.same_shape(init)) {
		fail(ErrorCode::DimensionMismatch, "ground truth and initial disparity differ in size");
	}
	const int h = gt.height();
	const int w = gt.width();
	RegionPartition rp{occlusion_mask(gt), Grid2D<std::uint8_t>(h, w, 0),
			Grid2D<std::uint8_t>(h, w, 0), Grid2D<std::uint8_t>(h, w, 0)};
	for (int i = 0; i < h; ++i) {
		for (int j = 0; j < w; ++j) {
			if (!gt.valid(i, j)) {
				continue;
			}
			const bool occluded = rp.occluded(i, j) != 0;
			rp.double_visible(i, j) = occluded ? 0 : 1;
			if (occluded) {
				rp.unreliable(i, j) = 1;
				continue;
			}
			if (!init.valid(i, j)) {
				continue;
			}
			const double err = std::abs(init(i, j) - gt(i, j));
			rp.unreliable(i, j) = err >= 1.0 ? 1 : 0;
			rp.to_refine(i, j) = err <= 1.0 ? 1 : 0;
		}
	}
	return rp;
}

}
