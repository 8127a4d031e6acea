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

#include "stereopipe/features.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace stereopipe::features {

FeatureMap::FeatureMap(int height, int width, int channels, Scale alpha)
	: m_height(height), m_width(width), m_channels(channels), m_alpha(alpha)
{
	if (height < 0 || width < 0 || channels <= 0) {
		fail(ErrorCode::InvalidArgument, "feature map needs non-negative size and >= 1 channel");
	}
	m_data.assign(static_cast<std::size_t>(height) * width * channels, 0.0);
}

FeatureTransform FeatureTransform::identity(int n)
{
	FeatureTransform t;
	t.n_out = n;
	t.n_in = n;
	t.matrix.assign(static_cast<std::size_t>(n) * n, 0.0);
	t.bias.assign(n, 0.0);
	for (int k = 0; k < n; ++k) {
		t.matrix[static_cast<std::size_t>(k) * n + k] = 1.0;
	}
	return t;
}

int census_gradient_channels(CensusWindow window)
{
	return window.height * window.width - 1 + 2;
}

Grid2D<double> average_pool(const Grid2D<double> &gray, int factor)
{
	if (factor == 1) {
		return gray;
	}
	const int h = (gray.height() + factor - 1) / factor;
	const int w = (gray.width() + factor - 1) / factor;
	Grid2D<double> out(h, w);
	for (int i = 0; i < h; ++i) {
		for (int j = 0; j < w; ++j) {
			double sum = 0.0;
			for (int a = 0; a < factor; ++a) {
				const int si = std::min(i * factor + a, gray.height() - 1);
				for (int b = 0; b < factor; ++b) {
					const int sj = std::min(j * factor + b, gray.width() - 1);
					sum += gray(si, sj);
				}
			}
			out(i, j) = sum / (factor * factor);
		}
	}
	return out;
}

namespace {

void normalize_vector(std::span<double> v)
{
	double ss = 0.0;
	for (double x : v) {
		ss += x * x;
	}
	if (ss <= 0.0) {
		return;
	}
	const double inv = 1.0 / std::sqrt(ss);
	for (double &x : v) {
		x *= inv;
	}
}

}

FeatureMap extract_census_gradient(const Image &image, CensusWindow window, Scale alpha,
		int threads)
{
	if (window.height % 2 == 0 || window.width % 2 == 0 || window.height < 1 ||
			window.width < 1) {
		fail(ErrorCode::InvalidArgument, "census window dimensions must be odd and positive");
	}
	if (image.height() == 0 || image.width() == 0) {
		fail(ErrorCode::InvalidArgument, "empty image");
	}
	for (float v : image.data()) {
		if (!std::isfinite(v)) {
			fail(ErrorCode::InvalidArgument, "image contains non-finite values");
		}
	}
	const Grid2D<double> gray = average_pool(image.to_gray(), alpha.factor());
	const int h = gray.height();
	const int w = gray.width();
	if (window.height > h || window.width > w) {
		fail(ErrorCode::InvalidArgument, "census window larger than the (scaled) image");
	}
	const int n = census_gradient_channels(window);
	FeatureMap fm(h, w, n, alpha);
	const int ry = window.height / 2;
	const int rx = window.width / 2;
	auto px = [&](int i, int j) {
		return gray(std::clamp(i, 0, h - 1), std::clamp(j, 0, w - 1));
	};
	parallel_rows(h, threads, [&](int i) {
		for (int j = 0; j < w; ++j) {
			std::span<double> v = fm.pixel(i, j);
			const double center = gray(i, j);
			int k = 0;
			for (int dy = -ry; dy <= ry; ++dy) {
				for (int dx = -rx; dx <= rx; ++dx) {
					if (dy == 0 && dx == 0) {
						continue;
					}
					const double nb = px(i + dy, j + dx);
					v[k++] = nb < center ? 1.0 : (nb > center ? -1.0 : 0.0);
				}
			}
			v[k++] = kGradientScale * 0.5 * (px(i, j + 1) - px(i, j - 1));
			v[k++] = kGradientScale * 0.5 * (px(i + 1, j) - px(i - 1, j));
			normalize_vector(v);
		}
	});
	return fm;
}

void normalize(FeatureMap &fm)
{
	for (int i = 0; i < fm.height(); ++i) {
		for (int j = 0; j < fm.width(); ++j) {
			normalize_vector(fm.pixel(i, j));
		}
	}
}

FeatureMap apply_transform(const FeatureMap &fm, const FeatureTransform &t)
{
	if (t.n_in != fm.channels() ||
			t.matrix.size() != static_cast<std::size_t>(t.n_out) * t.n_in ||
			t.bias.size() != static_cast<std::size_t>(t.n_out)) {
		fail(ErrorCode::DimensionMismatch, "transform expects " + std::to_string(t.n_in) +
				" input channels, feature map has " + std::to_string(fm.channels()));
	}
	FeatureMap out(fm.height(), fm.width(), t.n_out, fm.alpha());
	for (int i = 0; i < fm.height(); ++i) {
		for (int j = 0; j < fm.width(); ++j) {
			std::span<const double> v = fm.pixel(i, j);
			std::span<double> u = out.pixel(i, j);
			for (int r = 0; r < t.n_out; ++r) {
				const double *row = t.matrix.data() + static_cast<std::size_t>(r) * t.n_in;
				double acc = t.bias[r];
				for (int c = 0; c < t.n_in; ++c) {
					acc += row[c] * v[c];
				}
				u[r] = acc;
			}
			normalize_vector(u);
		}
	}
	return out;
}

namespace {

constexpr std::array<char, 4> kMagic = {'F', 'M', 'A', 'P'};
constexpr std::uint32_t kVersion = 1;
// Guards against absurd headers before allocating.
constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 32;

static_assert(std::endian::native == std::endian::little,
		"FMAP I/O assumes a little-endian host");

void put_u32(std::ostream &os, std::uint32_t v)
{
	os.write(reinterpret_cast<const char *>(&v), sizeof v);
}

std::uint32_t get_u32(std::istream &is, const std::string &path)
{
	std::uint32_t v = 0;
	if (!is.read(reinterpret_cast<char *>(&v), sizeof v)) {
		fail(ErrorCode::Truncated, path + ": header truncated");
	}
	return v;
}

}

void save_feature_tensor(const FeatureMap &fm, const std::string &path)
{
	std::ofstream os(path, std::ios::binary);
	if (!os) {
		fail(ErrorCode::Io, "cannot open " + path + " for writing");
	}
	os.write(kMagic.data(), kMagic.size());
	put_u32(os, kVersion);
	put_u32(os, static_cast<std::uint32_t>(fm.height()));
	put_u32(os, static_cast<std::uint32_t>(fm.width()));
	put_u32(os, static_cast<std::uint32_t>(fm.channels()));
	put_u32(os, static_cast<std::uint32_t>(fm.alpha().num()));
	put_u32(os, static_cast<std::uint32_t>(fm.alpha().den()));
	std::vector<float> payload(fm.data().size());
	std::transform(fm.data().begin(), fm.data().end(), payload.begin(),
			[](double x) { return static_cast<float>(x); });
	os.write(reinterpret_cast<const char *>(payload.data()),
			static_cast<std::streamsize>(payload.size() * sizeof(float)));
	if (!os) {
		fail(ErrorCode::Io, "write failed: " + path);
	}
}

FeatureMap load_feature_tensor(const std::string &path)
{
	std::ifstream is(path, std::ios::binary);
	if (!is) {
		fail(ErrorCode::Io, "cannot open " + path);
	}
	std::array<char, 4> magic{};
	if (!is.read(magic.data(), magic.size())) {
		fail(ErrorCode::Truncated, path + ": header truncated");
	}
	if (magic != kMagic) {
		fail(ErrorCode::BadMagic, path + ": not an FMAP file");
	}
	const std::uint32_t version = get_u32(is, path);
	if (version != kVersion) {
		fail(ErrorCode::BadHeader, path + ": unsupported FMAP version " + std::to_string(version));
	}
	const std::uint32_t h = get_u32(is, path);
	const std::uint32_t w = get_u32(is, path);
	const std::uint32_t n = get_u32(is, path);
	const std::uint32_t anum = get_u32(is, path);
	const std::uint32_t aden = get_u32(is, path);
	const std::uint64_t total = std::uint64_t{h} * w * n;
	if (h > static_cast<std::uint32_t>(std::numeric_limits<int>::max()) ||
			w > static_cast<std::uint32_t>(std::numeric_limits<int>::max()) ||
			n > static_cast<std::uint32_t>(std::numeric_limits<int>::max()) ||
			total > kMaxElements) {
		fail(ErrorCode::DimOverflow, path + ": dimensions " + std::to_string(h) + "x" +
				std::to_string(w) + "x" + std::to_string(n) + " too large");
	}
	if (n == 0) {
		fail(ErrorCode::BadHeader, path + ": zero channels");
	}
	Scale alpha;
	try {
		alpha = Scale::from_ratio(static_cast<int>(anum), static_cast<int>(aden));
	} catch (const Error &) {
		fail(ErrorCode::BadHeader, path + ": unsupported alpha " + std::to_string(anum) + "/" +
				std::to_string(aden));
	}
	FeatureMap fm(static_cast<int>(h), static_cast<int>(w), static_cast<int>(n), alpha);
	std::vector<float> payload(total);
	is.read(reinterpret_cast<char *>(payload.data()),
			static_cast<std::streamsize>(total * sizeof(float)));
	if (static_cast<std::uint64_t>(is.gcount()) != total * sizeof(float)) {
		fail(ErrorCode::Truncated, path + ": expected " + std::to_string(total) +
				" floats, got " + std::to_string(is.gcount() / sizeof(float)));
	}
	for (std::size_t k = 0; k < payload.size(); ++k) {
		if (!std::isfinite(payload[k])) {
			fail(ErrorCode::Numeric, path + ": non-finite feature value");
		}
		fm.data()[k] = payload[k];
	}
	return fm;
}

void save_transform(const FeatureTransform &t, const std::string &path)
{
	std::ofstream os(path);
	if (!os) {
		fail(ErrorCode::Io, "cannot open " + path + " for writing");
	}
	os << "transform " << t.n_out << ' ' << t.n_in << '\n' << std::setprecision(17);
	for (int r = 0; r < t.n_out; ++r) {
		for (int c = 0; c < t.n_in; ++c) {
			os << (c ? " " : "") << t.matrix[static_cast<std::size_t>(r) * t.n_in + c];
		}
		os << '\n';
	}
	for (int r = 0; r < t.n_out; ++r) {
		os << (r ? " " : "") << t.bias[r];
	}
	os << '\n';
	if (!os) {
		fail(ErrorCode::Io, "write failed: " + path);
	}
}

FeatureTransform load_transform(const std::string &path)
{
	std::ifstream is(path);
	if (!is) {
		fail(ErrorCode::Io, "cannot open " + path);
	}
	std::string tag;
	FeatureTransform t;
	if (!(is >> tag >> t.n_out >> t.n_in) || tag != "transform" || t.n_out <= 0 || t.n_in <= 0) {
		fail(ErrorCode::BadHeader, path + ": not a transform file");
	}
	t.matrix.resize(static_cast<std::size_t>(t.n_out) * t.n_in);
	t.bias.resize(t.n_out);
	for (double &x : t.matrix) {
		if (!(is >> x)) {
			fail(ErrorCode::Truncated, path + ": matrix truncated");
		}
	}
	for (double &x : t.bias) {
		if (!(is >> x)) {
			fail(ErrorCode::Truncated, path + ": bias truncated");
		}
	}
	return t;
}

}
