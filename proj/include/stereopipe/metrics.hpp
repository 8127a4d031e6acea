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

#ifndef STEREOPIPE_METRICS_HPP
#define STEREOPIPE_METRICS_HPP

#include <cstdint>
#include <optional>

#include "stereopipe/core.hpp"

namespace stereopipe::evalio {

/// Error statistics over the pixels where ground truth is valid (and the
/// optional mask is set). A prediction that is invalid at such a pixel counts
/// as an error: it fails D1 and bad-N, and contributes |gt| to EPE.
struct MetricReport {
	double d1_all = 0.0;  // percent
	double bad2 = 0.0;    // percent
	double epe = 0.0;     // pixels
	double density = 0.0; // percent of evaluated pixels with a valid prediction
	std::size_t n_eval = 0;

	bool empty() const noexcept { return n_eval == 0; }
};

/// KITTI rule: error above 3 px and above 5% of |gt|.
double metric_d1(const DisparityField &pred, const DisparityField &gt,
		const Grid2D<std::uint8_t> *mask = nullptr);
/// Percent of pixels whose error is strictly greater than `thresh`.
double metric_bad(const DisparityField &pred, const DisparityField &gt, double thresh = 2.0,
		const Grid2D<std::uint8_t> *mask = nullptr);
double metric_epe(const DisparityField &pred, const DisparityField &gt,
		const Grid2D<std::uint8_t> *mask = nullptr);

MetricReport evaluate(const DisparityField &pred, const DisparityField &gt,
		const Grid2D<std::uint8_t> *mask = nullptr);

/// Statistics restricted to pixels where `pred` is valid: retained fraction of
/// the evaluated pixels and the share of retained pixels with error > thresh.
struct SemiDenseReport {
	double density = 0.0;       // percent of evaluated pixels kept
	double bad = 0.0;           // percent of kept pixels with error > thresh
	double accurate = 0.0;      // percent of evaluated pixels kept with error <= thresh
	std::size_t n_eval = 0;
	std::size_t n_kept = 0;
};

SemiDenseReport evaluate_semi_dense(const DisparityField &semi, const DisparityField &gt,
		double thresh = 1.0, const Grid2D<std::uint8_t> *mask = nullptr);

}

#endif
