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

#include "stereopipe/metrics.hpp"

namespace stereopipe::evalio {

namespace {

template <typename F>
void for_each_evaluated(const DisparityField &pred, const DisparityField &gt,
		const Grid2D<std::uint8_t> *mask, F &&fn)
{
	if (!pred.same_shape(gt)) {
		fail(ErrorCode::DimensionMismatch, "prediction and ground truth differ in size");
	}
	if (mask && (mask->height() != gt.height() || mask->width() != gt.width())) {
		fail(ErrorCode::DimensionMismatch, "evaluation mask differs in size");
	}
	for (int i = 0; i < gt.height(); ++i) {
		for (int j = 0; j < gt.width(); ++j) {
			if (!gt.valid(i, j) || (mask && !(*mask)(i, j))) {
				continue;
			}
			fn(i, j);
		}
	}
}

}

MetricReport evaluate(const DisparityField &pred, const DisparityField &gt,
		const Grid2D<std::uint8_t> *mask)
{
	MetricReport rep;
	std::size_t d1 = 0;
	std::size_t bad2 = 0;
	std::size_t dense = 0;
	double abs_sum = 0.0;
	for_each_evaluated(pred, gt, mask, [&](int i, int j) {
		++rep.n_eval;
		const double g = gt(i, j);
		if (!pred.valid(i, j)) {
			++d1;
			++bad2;
			abs_sum += std::abs(g);
			return;
		}
		++dense;
		const double e = std::abs(pred(i, j) - g);
		abs_sum += e;
		d1 += (e > 3.0 && e > 0.05 * std::abs(g)) ? 1 : 0;
		bad2 += e > 2.0 ? 1 : 0;
	});
	if (rep.n_eval == 0) {
		return rep;
	}
	const double n = static_cast<double>(rep.n_eval);
	rep.d1_all = 100.0 * static_cast<double>(d1) / n;
	rep.bad2 = 100.0 * static_cast<double>(bad2) / n;
	rep.epe = abs_sum / n;
	rep.density = 100.0 * static_cast<double>(dense) / n;
	return rep;
}

double metric_d1(const DisparityField &pred, const DisparityField &gt,
		const Grid2D<std::uint8_t> *mask)
{
	const MetricReport rep = evaluate(pred, gt, mask);
	if (rep.empty()) {
		fail(ErrorCode::Degenerate, "no pixel with valid ground truth to evaluate");
	}
	return rep.d1_all;
}

double metric_bad(const DisparityField &pred, const DisparityField &gt, double thresh,
		const Grid2D<std::uint8_t> *mask)
{
	std::size_t n = 0;
	std::size_t bad = 0;
	for_each_evaluated(pred, gt, mask, [&](int i, int j) {
		++n;
		bad += (!pred.valid(i, j) || std::abs(pred(i, j) - gt(i, j)) > thresh) ? 1 : 0;
	});
	if (n == 0) {
		fail(ErrorCode::Degenerate, "no pixel with valid ground truth to evaluate");
	}
	return 100.0 * static_cast<double>(bad) / static_cast<double>(n);
}

double metric_epe(const DisparityField &pred, const DisparityField &gt,
		const Grid2D<std::uint8_t> *mask)
{
	const MetricReport rep = evaluate(pred, gt, mask);
	if (rep.empty()) {
		fail(ErrorCode::Degenerate, "no pixel with valid ground truth to evaluate");
	}
	return rep.epe;
}

SemiDenseReport evaluate_semi_dense(const DisparityField &semi, const DisparityField &gt,
		double thresh, const Grid2D<std::uint8_t> *mask)
{
	SemiDenseReport rep;
	std::size_t bad = 0;
	for_each_evaluated(semi, gt, mask, [&](int i, int j) {
		++rep.n_eval;
		if (!semi.valid(i, j)) {
			return;
		}
		++rep.n_kept;
		bad += std::abs(semi(i, j) - gt(i, j)) > thresh ? 1 : 0;
	});
	if (rep.n_eval > 0) {
		rep.density = 100.0 * static_cast<double>(rep.n_kept) / static_cast<double>(rep.n_eval);
		rep.accurate = 100.0 * static_cast<double>(rep.n_kept - bad) / static_cast<double>(rep.n_eval);
	}
	if (rep.n_kept > 0) {
		rep.bad = 100.0 * static_cast<double>(bad) / static_cast<double>(rep.n_kept);
	}
	return rep;
}

}
