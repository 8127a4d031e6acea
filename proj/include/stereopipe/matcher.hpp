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

#ifndef STEREOPIPE_MATCHER_HPP
#define STEREOPIPE_MATCHER_HPP

#include <span>
#include <vector>

#include "stereopipe/core.hpp"
#include "stereopipe/features.hpp"

namespace stereopipe::matcher {

/// Dense per-pixel volume over the candidates of a DisparityRange, candidate
/// innermost. Shared layout for correlation scores and probabilities.
class Volume {
public:
	Volume(int height, int width, DisparityRange range, double fill);

	int height() const noexcept { return m_height; }
	int width() const noexcept { return m_width; }
	int candidates() const noexcept { return m_range.count(); }
	const DisparityRange &range() const noexcept { return m_range; }

	std::span<const double> pixel(int i, int j) const noexcept
	{
		return {m_data.data() + offset(i, j), static_cast<std::size_t>(candidates())};
	}
	std::span<double> pixel(int i, int j) noexcept
	{
		return {m_data.data() + offset(i, j), static_cast<std::size_t>(candidates())};
	}
	double operator()(int i, int j, int k) const noexcept { return m_data[offset(i, j) + k]; }

	const std::vector<double> &data() const noexcept { return m_data; }
	std::vector<double> &data() noexcept { return m_data; }

	std::size_t bytes() const noexcept { return m_data.size() * sizeof(double); }

private:
	std::size_t offset(int i, int j) const noexcept
	{
		return (static_cast<std::size_t>(i) * m_width + j) * candidates();
	}

	int m_height;
	int m_width;
	DisparityRange m_range;
	std::vector<double> m_data;
};

/// Full-correlation scores; candidates whose right coordinate j - d falls
/// outside the image hold -infinity.
class CostVolume : public Volume {
public:
	using Volume::Volume;
	bool candidate_valid(int i, int j, int k) const noexcept
	{
		return (*this)(i, j, k) != -std::numeric_limits<double>::infinity();
	}
	/// True when the pixel has at least one in-image candidate.
	bool pixel_valid(int i, int j) const noexcept;
};

/// Softmax of the scores along the candidate axis. Masked candidates and
/// pixels without any candidate hold probability 0.
class ProbabilityVolume : public Volume {
public:
	ProbabilityVolume(int height, int width, DisparityRange range);
	bool pixel_valid(int i, int j) const noexcept { return m_pixel_valid(i, j) != 0; }
	void set_pixel_valid(int i, int j, bool v) noexcept { m_pixel_valid(i, j) = v ? 1 : 0; }

private:
	Grid2D<std::uint8_t> m_pixel_valid;
};

/// Initial disparity (argmax plus three-tap offset) and reliability, all at
/// feature scale and in feature-scale disparity units.
struct MapEstimate {
	DisparityField init;
	Grid2D<int> argmax;
	Grid2D<double> reliability;
};

struct MatchOptions {
	/// Inverse softmax temperature applied to correlation scores.
	double beta = 1.0;
	bool subpixel = true;
	int threads = 1;
};

/// Per-pixel outcome of the MAP step.
struct PixelEstimate {
	bool valid = false;
	int argmax = 0;
	double offset = 0.0;
	double reliability = 0.0;
	double init = 0.0;
};

/// Scores of pixel (i, j) for every candidate, ascending-channel dot products.
void correlate_pixel(const features::FeatureMap &left, const features::FeatureMap &right,
		const DisparityRange &range, int i, int j, std::span<double> out);

/// Max-subtracted softmax of beta * scores; returns false when no candidate is valid.
bool softmax_pixel(std::span<const double> scores, double beta, std::span<double> probs);

/// Argmax (ties to the smallest candidate), offset and reliability of one
/// probability column. Neighbors outside the range contribute 0.
PixelEstimate map_pixel(std::span<const double> probs, const DisparityRange &range,
		bool subpixel);

CostVolume build_cost_volume(const features::FeatureMap &left,
		const features::FeatureMap &right, const DisparityRange &range, int threads = 1);

ProbabilityVolume softmax_over_disparity(const CostVolume &cv, double beta = 1.0,
		int threads = 1);

MapEstimate map_disparity(const ProbabilityVolume &pv, bool subpixel);

/// Row-streaming equivalent of build_cost_volume -> softmax -> map_disparity;
/// only one row of scores per worker is alive at a time.
MapEstimate estimate_disparity(const features::FeatureMap &left,
		const features::FeatureMap &right, const DisparityRange &range,
		const MatchOptions &opts);

/// Right-reference estimate: matches right against left over the negated
/// range and negates the result, so D_R(x_R) = x_L - x_R.
MapEstimate estimate_right_view(const features::FeatureMap &left,
		const features::FeatureMap &right, const DisparityRange &range,
		const MatchOptions &opts);

/// Scratch bytes the streaming path needs per worker, and the bytes a fully
/// materialized volume would take.
std::size_t streaming_bytes(int width, const DisparityRange &range, int threads);
std::size_t materialized_bytes(int height, int width, const DisparityRange &range);

}

#endif
