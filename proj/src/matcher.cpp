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

#include "stereopipe/matcher.hpp"

#include <algorithm>

namespace stereopipe::matcher {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_inputs(const features::FeatureMap &left, const features::FeatureMap &right,
		const DisparityRange &range)
{
	if (!left.same_layout(right)) {
		fail(ErrorCode::DimensionMismatch, "left/right feature maps differ in size, channels or scale");
	}
	if (!(left.alpha() == range.alpha())) {
		fail(ErrorCode::DimensionMismatch, "feature scale does not match the disparity range scale");
	}
	// Every pixel lacks an in-image candidate iff the whole range misses [-(w-1), w-1].
	if (range.hi() < -(left.width() - 1) || range.lo() > left.width() - 1) {
		fail(ErrorCode::Range, "no disparity candidate lands inside the image at any pixel");
	}
}

}

Volume::Volume(int height, int width, DisparityRange range, double fill)
	: m_height(height), m_width(width), m_range(range)
{
	m_data.assign(static_cast<std::size_t>(height) * width * range.count(), fill);
}

bool CostVolume::pixel_valid(int i, int j) const noexcept
{
	for (double s : pixel(i, j)) {
		if (s != kNegInf) {
			return true;
		}
	}
	return false;
}

ProbabilityVolume::ProbabilityVolume(int height, int width, DisparityRange range)
	: Volume(height, width, range, 0.0), m_pixel_valid(height, width, 0)
{
}

void correlate_pixel(const features::FeatureMap &left, const features::FeatureMap &right,
		const DisparityRange &range, int i, int j, std::span<double> out)
{
	const std::span<const double> fl = left.pixel(i, j);
	const int n = left.channels();
	for (int k = 0; k < range.count(); ++k) {
		const int jr = j - range.candidate(k);
		if (jr < 0 || jr >= right.width()) {
			out[k] = kNegInf;
			continue;
		}
		const std::span<const double> fr = right.pixel(i, jr);
		double acc = 0.0;
		for (int c = 0; c < n; ++c) {
			acc += fl[c] * fr[c];
		}
		out[k] = acc;
	}
}

bool softmax_pixel(std::span<const double> scores, double beta, std::span<double> probs)
{
	double best = kNegInf;
	for (double s : scores) {
		best = std::max(best, s);
	}
	if (best == kNegInf) {
		std::fill(probs.begin(), probs.end(), 0.0);
		return false;
	}
	double sum = 0.0;
	for (std::size_t k = 0; k < scores.size(); ++k) {
		const double e = scores[k] == kNegInf ? 0.0 : std::exp(beta * (scores[k] - best));
		probs[k] = e;
		sum += e;
	}
	const double inv = 1.0 / sum;
	for (double &p : probs) {
		p *= inv;
	}
	return true;
}

PixelEstimate map_pixel(std::span<const double> probs, const DisparityRange &range,
		bool subpixel)
{
	PixelEstimate est;
	const int m = static_cast<int>(probs.size());
	int best = -1;
	double best_p = 0.0;
	for (int k = 0; k < m; ++k) {
		if (probs[k] > best_p) {
			best_p = probs[k];
			best = k;
		}
	}
	if (best < 0) {
		return est;
	}
	const double below = best > 0 ? probs[best - 1] : 0.0;
	const double above = best + 1 < m ? probs[best + 1] : 0.0;
	est.valid = true;
	est.argmax = range.candidate(best);
	est.reliability = std::min(1.0, below + best_p + above);
	est.offset = (above - below) / (below + best_p + above);
	est.init = subpixel ? est.argmax + est.offset : static_cast<double>(est.argmax);
	return est;
}

CostVolume build_cost_volume(const features::FeatureMap &left,
		const features::FeatureMap &right, const DisparityRange &range, int threads)
{
	check_inputs(left, right, range);
	CostVolume cv(left.height(), left.width(), range, kNegInf);
	parallel_rows(left.height(), threads, [&](int i) {
		for (int j = 0; j < left.width(); ++j) {
			correlate_pixel(left, right, range, i, j, cv.pixel(i, j));
		}
	});
	return cv;
}

ProbabilityVolume softmax_over_disparity(const CostVolume &cv, double beta, int threads)
{
	ProbabilityVolume pv(cv.height(), cv.width(), cv.range());
	parallel_rows(cv.height(), threads, [&](int i) {
		for (int j = 0; j < cv.width(); ++j) {
			pv.set_pixel_valid(i, j, softmax_pixel(cv.pixel(i, j), beta, pv.pixel(i, j)));
		}
	});
	return pv;
}

namespace {

MapEstimate make_estimate(int h, int w)
{
	return MapEstimate{DisparityField(h, w), Grid2D<int>(h, w, 0), Grid2D<double>(h, w, 0.0)};
}

void store(MapEstimate &est, int i, int j, const PixelEstimate &px)
{
	if (!px.valid) {
		return;
	}
	est.init.set(i, j, px.init);
	est.argmax(i, j) = px.argmax;
	est.reliability(i, j) = px.reliability;
}

}

MapEstimate map_disparity(const ProbabilityVolume &pv, bool subpixel)
{
	MapEstimate est = make_estimate(pv.height(), pv.width());
	for (int i = 0; i < pv.height(); ++i) {
		for (int j = 0; j < pv.width(); ++j) {
			if (pv.pixel_valid(i, j)) {
				store(est, i, j, map_pixel(pv.pixel(i, j), pv.range(), subpixel));
			}
		}
	}
	return est;
}

MapEstimate estimate_disparity(const features::FeatureMap &left,
		const features::FeatureMap &right, const DisparityRange &range,
		const MatchOptions &opts)
{
	check_inputs(left, right, range);
	const int h = left.height();
	const int w = left.width();
	const int m = range.count();
	MapEstimate est = make_estimate(h, w);
	parallel_rows(h, opts.threads, [&](int i) {
		std::vector<double> scores(m);
		std::vector<double> probs(m);
		for (int j = 0; j < w; ++j) {
			correlate_pixel(left, right, range, i, j, scores);
			if (softmax_pixel(scores, opts.beta, probs)) {
				store(est, i, j, map_pixel(probs, range, opts.subpixel));
			}
		}
	});
	return est;
}

MapEstimate estimate_right_view(const features::FeatureMap &left,
		const features::FeatureMap &right, const DisparityRange &range,
		const MatchOptions &opts)
{
	MapEstimate swapped = estimate_disparity(right, left, range.negated(), opts);
	MapEstimate out = make_estimate(left.height(), left.width());
	out.init = negate(swapped.init);
	out.reliability = std::move(swapped.reliability);
	for (int i = 0; i < left.height(); ++i) {
		for (int j = 0; j < left.width(); ++j) {
			out.argmax(i, j) = -swapped.argmax(i, j);
		}
	}
	return out;
}

std::size_t streaming_bytes(int width, const DisparityRange &range, int threads)
{
	return static_cast<std::size_t>(2) * range.count() * sizeof(double) *
			static_cast<std::size_t>(std::max(threads, 1)) * (width > 0 ? 1 : 0);
}

std::size_t materialized_bytes(int height, int width, const DisparityRange &range)
{
	return static_cast<std::size_t>(height) * width * range.count() * sizeof(double);
}

}
