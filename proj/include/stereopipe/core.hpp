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

#ifndef STEREOPIPE_CORE_HPP
#define STEREOPIPE_CORE_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "stereopipe/error.hpp"

namespace stereopipe {

/// Feature-map downscale factor. Only 1, 1/2 and 1/4 are supported; the
/// numerator is always 1, so `factor()` is the integer upsampling ratio.
class Scale {
public:
	constexpr Scale() = default;

	static Scale from_ratio(int num, int den);
	static Scale from_factor(int factor) { return from_ratio(1, factor); }

	int num() const noexcept { return 1; }
	int den() const noexcept { return m_den; }
	int factor() const noexcept { return m_den; }
	double value() const noexcept { return 1.0 / m_den; }

	friend bool operator==(Scale a, Scale b) noexcept { return a.m_den == b.m_den; }

private:
	constexpr explicit Scale(int den) : m_den(den) {}
	int m_den = 1;
};

/// Signed disparity search range [d_min, d_max] in full-resolution pixels,
/// viewed at feature scale alpha. Candidates are the integers
/// alpha*d_min .. alpha*d_max, ascending.
class DisparityRange {
public:
	DisparityRange(int d_min, int d_max, Scale alpha = {});

	int d_min() const noexcept { return m_d_min; }
	int d_max() const noexcept { return m_d_max; }
	Scale alpha() const noexcept { return m_alpha; }

	/// First and last candidate at feature scale.
	int lo() const noexcept { return m_d_min / m_alpha.den(); }
	int hi() const noexcept { return m_d_max / m_alpha.den(); }
	int count() const noexcept { return hi() - lo() + 1; }

	int candidate(int k) const noexcept { return lo() + k; }
	bool contains(int d) const noexcept { return d >= lo() && d <= hi(); }

	/// The same range with both ends negated (used for the right-reference view).
	DisparityRange negated() const { return DisparityRange(-m_d_max, -m_d_min, m_alpha); }

private:
	int m_d_min;
	int m_d_max;
	Scale m_alpha;
};

std::vector<int> enumerate_candidates(const DisparityRange &range);

template <typename V>
class Grid2D {
public:
	Grid2D() = default;
	Grid2D(int height, int width, V fill = V{})
		: m_height(height), m_width(width)
	{
		if (height < 0 || width < 0) {
			fail(ErrorCode::InvalidArgument, "grid dimensions must be non-negative");
		}
		m_values.assign(static_cast<std::size_t>(height) * width, fill);
	}

	int height() const noexcept { return m_height; }
	int width() const noexcept { return m_width; }
	std::size_t size() const noexcept { return m_values.size(); }
	bool empty() const noexcept { return m_values.empty(); }

	bool in_bounds(int i, int j) const noexcept
	{
		return i >= 0 && i < m_height && j >= 0 && j < m_width;
	}

	const V &at(int i, int j) const
	{
		check(i, j);
		return m_values[index(i, j)];
	}
	V &at(int i, int j)
	{
		check(i, j);
		return m_values[index(i, j)];
	}

	// Unchecked accessors for inner loops.
	const V &operator()(int i, int j) const noexcept { return m_values[index(i, j)]; }
	V &operator()(int i, int j) noexcept { return m_values[index(i, j)]; }

	const std::vector<V> &values() const noexcept { return m_values; }
	std::vector<V> &values() noexcept { return m_values; }

	bool same_shape(const Grid2D &o) const noexcept
	{
		return m_height == o.m_height && m_width == o.m_width;
	}

	friend bool operator==(const Grid2D &a, const Grid2D &b)
	{
		return a.same_shape(b) && a.m_values == b.m_values;
	}

private:
	std::size_t index(int i, int j) const noexcept
	{
		return static_cast<std::size_t>(i) * m_width + j;
	}
	void check(int i, int j) const
	{
		if (!in_bounds(i, j)) {
			fail(ErrorCode::Range, "grid index (" + std::to_string(i) + "," +
					std::to_string(j) + ") outside " + std::to_string(m_height) +
					"x" + std::to_string(m_width));
		}
	}

	int m_height = 0;
	int m_width = 0;
	std::vector<V> m_values;
};

inline constexpr double kInvalidDisparity = std::numeric_limits<double>::quiet_NaN();

/// Real-valued signed disparity map with a validity mask. Invalid pixels
/// always hold NaN.
class DisparityField {
public:
	DisparityField() = default;
	DisparityField(int height, int width);

	static DisparityField constant(int height, int width, double value);

	int height() const noexcept { return m_values.height(); }
	int width() const noexcept { return m_values.width(); }

	bool valid(int i, int j) const noexcept { return m_valid(i, j) != 0; }
	double operator()(int i, int j) const noexcept { return m_values(i, j); }
	double at(int i, int j) const { return m_values.at(i, j); }

	void set(int i, int j, double d);
	void invalidate(int i, int j);

	const Grid2D<double> &values() const noexcept { return m_values; }
	const Grid2D<std::uint8_t> &mask() const noexcept { return m_valid; }

	std::size_t count_valid() const noexcept;
	bool same_shape(const DisparityField &o) const noexcept
	{
		return m_values.same_shape(o.m_values);
	}

private:
	Grid2D<double> m_values;
	Grid2D<std::uint8_t> m_valid;
};

/// Interleaved image with 1 or 3 channels, intensities in 8-bit units.
class Image {
public:
	Image() = default;
	Image(int height, int width, int channels, float fill = 0.0f);

	int height() const noexcept { return m_height; }
	int width() const noexcept { return m_width; }
	int channels() const noexcept { return m_channels; }

	float operator()(int i, int j, int c = 0) const noexcept
	{
		return m_data[(static_cast<std::size_t>(i) * m_width + j) * m_channels + c];
	}
	float &operator()(int i, int j, int c = 0) noexcept
	{
		return m_data[(static_cast<std::size_t>(i) * m_width + j) * m_channels + c];
	}

	const std::vector<float> &data() const noexcept { return m_data; }
	std::vector<float> &data() noexcept { return m_data; }

	Grid2D<double> to_gray() const;

private:
	int m_height = 0;
	int m_width = 0;
	int m_channels = 1;
	std::vector<float> m_data;
};

/// Round half away from zero; the tie rule used for every disparity rounding.
inline long round_half_away(double x) noexcept { return std::lround(x); }

/// Bilinear upsampling with pixel-center alignment; disparities are multiplied
/// by `factor`. An output pixel is valid only if every contributing source
/// pixel is valid and, when `max_spread` is finite, the contributing source
/// values differ by at most `max_spread` (source units).
DisparityField upsample_disparity(const DisparityField &field, int factor,
		double max_spread = std::numeric_limits<double>::infinity());

/// Average-pools valid pixels over factor x factor blocks and divides
/// disparities by `factor`. A block with no valid pixel, or whose valid values
/// spread more than `max_spread` (source units), is invalid.
DisparityField downsample_disparity(const DisparityField &field, int factor,
		double max_spread = std::numeric_limits<double>::infinity());

DisparityField crop(const DisparityField &field, int height, int width);
DisparityField negate(const DisparityField &field);

/// Bilinear, pixel-center aligned resampling of a dense grid (no value scaling).
Grid2D<double> upsample_grid(const Grid2D<double> &grid, int factor);

/// Number of worker threads used when a caller passes 0: STEREOPIPE_THREADS,
/// else hardware concurrency.
int default_thread_count();

/// Runs fn(row) for every row in [0, rows). Rows are split into contiguous
/// chunks; the result never depends on the thread count as long as fn only
/// writes row-local state.
void parallel_rows(int rows, int threads, const std::function<void(int)> &fn);

}

#endif
