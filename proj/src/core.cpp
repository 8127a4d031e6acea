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

#include "stereopipe/core.hpp"

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <thread>

namespace stereopipe {

const char *error_code_name(ErrorCode code)
{
	switch (code) {
	case ErrorCode::InvalidArgument: return "invalid argument";
	case ErrorCode::Range: return "range error";
	case ErrorCode::DimensionMismatch: return "dimension mismatch";
	case ErrorCode::BadMagic: return "bad magic";
	case ErrorCode::DimOverflow: return "dimension overflow";
	case ErrorCode::Truncated: return "truncated payload";
	case ErrorCode::BadHeader: return "bad header";
	case ErrorCode::Io: return "i/o error";
	case ErrorCode::Numeric: return "numeric error";
	case ErrorCode::Degenerate: return "degenerate input";
	}
	return "unknown error";
}

Scale Scale::from_ratio(int num, int den)
{
	if (num != 1 || (den != 1 && den != 2 && den != 4)) {
		fail(ErrorCode::InvalidArgument, "scale must be one of 1, 1/2, 1/4; got " +
				std::to_string(num) + "/" + std::to_string(den));
	}
	return Scale(den);
}

DisparityRange::DisparityRange(int d_min, int d_max, Scale alpha)
	: m_d_min(d_min), m_d_max(d_max), m_alpha(alpha)
{
	if (d_min > d_max) {
		fail(ErrorCode::Range, "d_min " + std::to_string(d_min) + " > d_max " +
				std::to_string(d_max));
	}
	const int f = alpha.den();
	if (d_min % f != 0 || d_max % f != 0) {
		fail(ErrorCode::Range, "disparity range [" + std::to_string(d_min) + "," +
				std::to_string(d_max) + "] is not integral at scale 1/" + std::to_string(f));
	}
}

std::vector<int> enumerate_candidates(const DisparityRange &range)
{
	std::vector<int> out(range.count());
	for (int k = 0; k < range.count(); ++k) {
		out[k] = range.candidate(k);
	}
	return out;
}

DisparityField::DisparityField(int height, int width)
	: m_values(height, width, kInvalidDisparity), m_valid(height, width, 0)
{
}

DisparityField DisparityField::constant(int height, int width, double value)
{
	DisparityField f(height, width);
	for (int i = 0; i < height; ++i) {
		for (int j = 0; j < width; ++j) {
			f.set(i, j, value);
		}
	}
	return f;
}

void DisparityField::set(int i, int j, double d)
{
	if (!std::isfinite(d)) {
		invalidate(i, j);
		return;
	}
	m_values.at(i, j) = d;
	m_valid.at(i, j) = 1;
}

void DisparityField::invalidate(int i, int j)
{
	m_values.at(i, j) = kInvalidDisparity;
	m_valid.at(i, j) = 0;
}

std::size_t DisparityField::count_valid() const noexcept
{
	return static_cast<std::size_t>(
			std::count(m_valid.values().begin(), m_valid.values().end(), std::uint8_t{1}));
}

Image::Image(int height, int width, int channels, float fill)
	: m_height(height), m_width(width), m_channels(channels)
{
	if (height < 0 || width < 0 || (channels != 1 && channels != 3)) {
		fail(ErrorCode::InvalidArgument, "image must have non-negative size and 1 or 3 channels");
	}
	m_data.assign(static_cast<std::size_t>(height) * width * channels, fill);
}

Grid2D<double> Image::to_gray() const
{
	Grid2D<double> g(m_height, m_width);
	for (int i = 0; i < m_height; ++i) {
		for (int j = 0; j < m_width; ++j) {
			if (m_channels == 1) {
				g(i, j) = (*this)(i, j);
			} else {
				g(i, j) = (static_cast<double>((*this)(i, j, 0)) + (*this)(i, j, 1) +
						(*this)(i, j, 2)) / 3.0;
			}
		}
	}
	return g;
}

namespace {

// Source coordinate and weights of one output sample along an axis.
struct Tap {
	int lo;
	int hi;
	double w_hi;
};

Tap bilinear_tap(int out_index, int factor, int src_len)
{
	const double x = (out_index + 0.5) / factor - 0.5;
	const double xc = std::clamp(x, 0.0, static_cast<double>(src_len - 1));
	const int lo = static_cast<int>(std::floor(xc));
	const int hi = std::min(lo + 1, src_len - 1);
	return {lo, hi, xc - lo};
}

}

DisparityField upsample_disparity(const DisparityField &field, int factor, double max_spread)
{
	if (factor < 1) {
		fail(ErrorCode::InvalidArgument, "upsample factor must be >= 1");
	}
	if (factor == 1) {
		return field;
	}
	const int h = field.height() * factor;
	const int w = field.width() * factor;
	DisparityField out(h, w);
	if (field.height() == 0 || field.width() == 0) {
		return out;
	}
	for (int i = 0; i < h; ++i) {
		const Tap ty = bilinear_tap(i, factor, field.height());
		for (int j = 0; j < w; ++j) {
			const Tap tx = bilinear_tap(j, factor, field.width());
			const int rows[2] = {ty.lo, ty.hi};
			const int cols[2] = {tx.lo, tx.hi};
			const double wy[2] = {1.0 - ty.w_hi, ty.w_hi};
			const double wx[2] = {1.0 - tx.w_hi, tx.w_hi};
			double acc = 0.0;
			double vmin = std::numeric_limits<double>::infinity();
			double vmax = -vmin;
			bool ok = true;
			for (int a = 0; a < 2 && ok; ++a) {
				for (int b = 0; b < 2; ++b) {
					const double wt = wy[a] * wx[b];
					if (wt == 0.0) {
						continue;
					}
					if (!field.valid(rows[a], cols[b])) {
						ok = false;
						break;
					}
					const double v = field(rows[a], cols[b]);
					acc += wt * v;
					vmin = std::min(vmin, v);
					vmax = std::max(vmax, v);
				}
			}
			if (ok && vmax - vmin <= max_spread) {
				out.set(i, j, acc * factor);
			}
		}
	}
	return out;
}

DisparityField downsample_disparity(const DisparityField &field, int factor, double max_spread)
{
	if (factor < 1) {
		fail(ErrorCode::InvalidArgument, "downsample factor must be >= 1");
	}
	if (factor == 1) {
		return field;
	}
	const int h = (field.height() + factor - 1) / factor;
	const int w = (field.width() + factor - 1) / factor;
	DisparityField out(h, w);
	for (int i = 0; i < h; ++i) {
		for (int j = 0; j < w; ++j) {
			double sum = 0.0;
			int n = 0;
			double vmin = std::numeric_limits<double>::infinity();
			double vmax = -vmin;
			for (int a = i * factor; a < std::min((i + 1) * factor, field.height()); ++a) {
				for (int b = j * factor; b < std::min((j + 1) * factor, field.width()); ++b) {
					if (field.valid(a, b)) {
						sum += field(a, b);
						vmin = std::min(vmin, field(a, b));
						vmax = std::max(vmax, field(a, b));
						++n;
					}
				}
			}
			if (n > 0 && vmax - vmin <= max_spread) {
				out.set(i, j, sum / n / factor);
			}
		}
	}
	return out;
}

DisparityField crop(const DisparityField &field, int height, int width)
{
	if (height > field.height() || width > field.width()) {
		fail(ErrorCode::DimensionMismatch, "crop larger than source field");
	}
	DisparityField out(height, width);
	for (int i = 0; i < height; ++i) {
		for (int j = 0; j < width; ++j) {
			if (field.valid(i, j)) {
				out.set(i, j, field(i, j));
			}
		}
	}
	return out;
}

DisparityField negate(const DisparityField &field)
{
	DisparityField out(field.height(), field.width());
	for (int i = 0; i < field.height(); ++i) {
		for (int j = 0; j < field.width(); ++j) {
			if (field.valid(i, j)) {
				out.set(i, j, -field(i, j));
			}
		}
	}
	return out;
}

Grid2D<double> upsample_grid(const Grid2D<double> &grid, int factor)
{
	if (factor < 1) {
		fail(ErrorCode::InvalidArgument, "upsample factor must be >= 1");
	}
	if (factor == 1 || grid.empty()) {
		return grid;
	}
	Grid2D<double> out(grid.height() * factor, grid.width() * factor);
	for (int i = 0; i < out.height(); ++i) {
		const Tap ty = bilinear_tap(i, factor, grid.height());
		for (int j = 0; j < out.width(); ++j) {
			const Tap tx = bilinear_tap(j, factor, grid.width());
			const double top = (1.0 - tx.w_hi) * grid(ty.lo, tx.lo) + tx.w_hi * grid(ty.lo, tx.hi);
			const double bot = (1.0 - tx.w_hi) * grid(ty.hi, tx.lo) + tx.w_hi * grid(ty.hi, tx.hi);
			out(i, j) = (1.0 - ty.w_hi) * top + ty.w_hi * bot;
		}
	}
	return out;
}

int default_thread_count()
{
	if (const char *env = std::getenv("STEREOPIPE_THREADS")) {
		const int n = std::atoi(env);
		if (n > 0) {
			return n;
		}
	}
	const unsigned hw = std::thread::hardware_concurrency();
	return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_rows(int rows, int threads, const std::function<void(int)> &fn)
{
	if (threads <= 0) {
		threads = default_thread_count();
	}
	threads = std::max(1, std::min(threads, rows));
	if (threads == 1) {
		for (int r = 0; r < rows; ++r) {
			fn(r);
		}
		return;
	}
	std::vector<std::thread> pool;
	pool.reserve(threads);
	std::vector<std::exception_ptr> errors(threads);
	const int chunk = (rows + threads - 1) / threads;
	for (int t = 0; t < threads; ++t) {
		const int begin = t * chunk;
		const int end = std::min(rows, begin + chunk);
		if (begin >= end) {
			break;
		}
		pool.emplace_back([begin, end, &fn, &err = errors[t]] {
			try {
				for (int r = begin; r < end; ++r) {
					fn(r);
				}
			} catch (...) {
				err = std::current_exception();
			}
		});
	}
	for (auto &th : pool) {
		th.join();
	}
	for (auto &e : errors) {
		if (e) {
			std::rethrow_exception(e);
		}
	}
}

}
