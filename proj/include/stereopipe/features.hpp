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

#ifndef STEREOPIPE_FEATURES_HPP
#define STEREOPIPE_FEATURES_HPP

#include <span>
#include <string>
#include <vector>

#include "stereopipe/core.hpp"

namespace stereopipe::features {

/// Per-pixel n-channel descriptors at feature scale alpha, channel innermost.
class FeatureMap {
public:
	FeatureMap() = default;
	FeatureMap(int height, int width, int channels, Scale alpha);

	int height() const noexcept { return m_height; }
	int width() const noexcept { return m_width; }
	int channels() const noexcept { return m_channels; }
	Scale alpha() const noexcept { return m_alpha; }

	std::span<const double> pixel(int i, int j) const noexcept
	{
		return {m_data.data() + offset(i, j), static_cast<std::size_t>(m_channels)};
	}
	std::span<double> pixel(int i, int j) noexcept
	{
		return {m_data.data() + offset(i, j), static_cast<std::size_t>(m_channels)};
	}

	const std::vector<double> &data() const noexcept { return m_data; }
	std::vector<double> &data() noexcept { return m_data; }

	bool same_layout(const FeatureMap &o) const noexcept
	{
		return m_height == o.m_height && m_width == o.m_width &&
				m_channels == o.m_channels && m_alpha == o.m_alpha;
	}

private:
	std::size_t offset(int i, int j) const noexcept
	{
		return (static_cast<std::size_t>(i) * m_width + j) * m_channels;
	}

	int m_height = 0;
	int m_width = 0;
	int m_channels = 0;
	Scale m_alpha;
	std::vector<double> m_data;
};

/// Learnable affine map applied to every descriptor before renormalization.
struct FeatureTransform {
	int n_out = 0;
	int n_in = 0;
	std::vector<double> matrix; // n_out x n_in, row-major
	std::vector<double> bias;   // n_out

	static FeatureTransform identity(int n);
	std::size_t parameter_count() const noexcept { return matrix.size() + bias.size(); }
};

struct CensusWindow {
	int height = 7;
	int width = 9;
};

/// Census channels (wh*ww - 1) plus two gradient channels.
int census_gradient_channels(CensusWindow window);

/// Scales intensity differences so gradient channels sit near the +-1 census bits.
inline constexpr double kGradientScale = 1.0 / 32.0;

/// Hand-crafted descriptor: census signs (+1 neighbor darker than center,
/// -1 brighter, 0 equal) over the window followed by central-difference
/// gradients, L2-normalized. The image is average-pooled to scale alpha
/// first; borders use clamped sampling.
FeatureMap extract_census_gradient(const Image &image, CensusWindow window, Scale alpha,
		int threads = 1);

/// L2-normalizes every descriptor in place; zero vectors stay zero.
void normalize(FeatureMap &fm);

FeatureMap apply_transform(const FeatureMap &fm, const FeatureTransform &t);

/// Average-pools an intensity grid by `factor` with clamped border blocks.
Grid2D<double> average_pool(const Grid2D<double> &gray, int factor);

void save_feature_tensor(const FeatureMap &fm, const std::string &path);
FeatureMap load_feature_tensor(const std::string &path);

void save_transform(const FeatureTransform &t, const std::string &path);
FeatureTransform load_transform(const std::string &path);

}

#endif
