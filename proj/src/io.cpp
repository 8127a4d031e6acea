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

#include "stereopipe/io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>

#include <png.h>

namespace stereopipe::evalio {

namespace {

std::string lower_ext(const std::string &path)
{
	const auto dot = path.find_last_of('.');
	if (dot == std::string::npos) {
		return {};
	}
	std::string ext = path.substr(dot + 1);
	std::transform(ext.begin(), ext.end(), ext.begin(),
			[](unsigned char c) { return static_cast<char>(std::tolower(c)); });
	return ext;
}

// Whitespace/comment separated header token of a netpbm-style file.
std::string header_token(std::istream &is, const std::string &path)
{
	std::string tok;
	int c = is.get();
	while (c != EOF) {
		if (c == '#') {
			while (c != EOF && c != '\n') {
				c = is.get();
			}
		} else if (!std::isspace(c)) {
			break;
		}
		c = is.get();
	}
	while (c != EOF && !std::isspace(c)) {
		tok.push_back(static_cast<char>(c));
		c = is.get();
	}
	if (tok.empty()) {
		fail(ErrorCode::BadHeader, path + ": truncated header");
	}
	// The single whitespace after the last token has been consumed.
	return tok;
}

int parse_dim(const std::string &tok, const std::string &path)
{
	char *end = nullptr;
	const long v = std::strtol(tok.c_str(), &end, 10);
	if (*end != '\0' || v <= 0 || v > (1L << 20)) {
		fail(ErrorCode::BadHeader, path + ": bad dimension '" + tok + "'");
	}
	return static_cast<int>(v);
}

struct FileCloser {
	void operator()(std::FILE *f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::string &path, const char *mode)
{
	FilePtr f(std::fopen(path.c_str(), mode));
	if (!f) {
		fail(ErrorCode::Io, std::string("cannot open ") + path +
				(mode[0] == 'w' ? " for writing" : ""));
	}
	return f;
}

struct PngErrorSlot {
	std::jmp_buf jmp;
	char message[256];
};

[[noreturn]] void png_error_cb(png_structp png, png_const_charp msg)
{
	auto *slot = static_cast<PngErrorSlot *>(png_get_error_ptr(png));
	std::snprintf(slot->message, sizeof slot->message, "%s", msg);
	std::longjmp(slot->jmp, 1);
}

void png_warning_cb(png_structp, png_const_charp) {}

struct PngData {
	int height = 0;
	int width = 0;
	int channels = 0;
	int bit_depth = 0;
	std::vector<std::uint16_t> samples; // interleaved
};

PngData read_png(const std::string &path)
{
	FilePtr f = open_file(path, "rb");
	unsigned char sig[8] = {};
	if (std::fread(sig, 1, 8, f.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
		fail(ErrorCode::BadHeader, path + ": not a PNG file");
	}
	PngErrorSlot slot{};
	png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &slot, png_error_cb,
			png_warning_cb);
	png_infop info = png_create_info_struct(png);
	struct Guard {
		png_structp *png;
		png_infop *info;
		~Guard() { png_destroy_read_struct(png, info, nullptr); }
	} guard{&png, &info};
	PngData out;
	std::vector<unsigned char> buf;
	std::vector<png_bytep> rows;
	if (setjmp(slot.jmp)) {
		fail(ErrorCode::BadHeader, path + ": " + slot.message);
	}

	png_init_io(png, f.get());
	png_set_sig_bytes(png, 8);
	png_read_info(png, info);
	out.width = static_cast<int>(png_get_image_width(png, info));
	out.height = static_cast<int>(png_get_image_height(png, info));
	out.bit_depth = png_get_bit_depth(png, info);
	const int color = png_get_color_type(png, info);
	if (color == PNG_COLOR_TYPE_PALETTE) {
		png_set_palette_to_rgb(png);
		out.bit_depth = 8;
	}
	if (color == PNG_COLOR_TYPE_GRAY && out.bit_depth < 8) {
		png_set_expand_gray_1_2_4_to_8(png);
		out.bit_depth = 8;
	}
	if (png_get_valid(png, info, PNG_INFO_tRNS)) {
		png_set_strip_alpha(png);
	}
	if (out.bit_depth == 16 && std::endian::native == std::endian::little) {
		png_set_swap(png);
	}
	png_read_update_info(png, info);
	out.channels = png_get_channels(png, info);
	const std::size_t rowbytes = png_get_rowbytes(png, info);
	buf.resize(rowbytes * out.height);
	rows.resize(out.height);
	for (int i = 0; i < out.height; ++i) {
		rows[i] = buf.data() + rowbytes * i;
	}
	png_read_image(png, rows.data());
	png_read_end(png, nullptr);

	const std::size_t count = static_cast<std::size_t>(out.height) * out.width * out.channels;
	out.samples.resize(count);
	if (out.bit_depth == 16) {
		for (std::size_t k = 0; k < count; ++k) {
			std::uint16_t v;
			std::memcpy(&v, buf.data() + 2 * k, 2);
			out.samples[k] = v;
		}
	} else {
		for (std::size_t k = 0; k < count; ++k) {
			out.samples[k] = buf[k];
		}
	}
	return out;
}

void write_png(const std::string &path, int height, int width, int channels, int bit_depth,
		const std::vector<std::uint16_t> &samples)
{
	FilePtr f = open_file(path, "wb");
	PngErrorSlot slot{};
	png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &slot, png_error_cb,
			png_warning_cb);
	png_infop info = png_create_info_struct(png);
	struct Guard {
		png_structp *png;
		png_infop *info;
		~Guard() { png_destroy_write_struct(png, info); }
	} guard{&png, &info};
	const int bytes = bit_depth / 8;
	std::vector<unsigned char> row(static_cast<std::size_t>(width) * channels * bytes);
	if (setjmp(slot.jmp)) {
		fail(ErrorCode::Io, path + ": " + slot.message);
	}

	png_init_io(png, f.get());
	const int color = channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB;
	png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height),
			bit_depth, color, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
			PNG_FILTER_TYPE_DEFAULT);
	png_write_info(png, info);
	for (int i = 0; i < height; ++i) {
		const std::size_t base = static_cast<std::size_t>(i) * width * channels;
		for (std::size_t k = 0; k < static_cast<std::size_t>(width) * channels; ++k) {
			const std::uint16_t v = samples[base + k];
			if (bytes == 2) {
				row[2 * k] = static_cast<unsigned char>(v >> 8); // PNG is big-endian
				row[2 * k + 1] = static_cast<unsigned char>(v & 0xff);
			} else {
				row[k] = static_cast<unsigned char>(v);
			}
		}
		png_write_row(png, row.data());
	}
	png_write_end(png, nullptr);
}

std::uint16_t to_u8(float v)
{
	return static_cast<std::uint16_t>(std::clamp(std::lround(v), 0L, 255L));
}

}

void write_pfm(const DisparityField &field, const std::string &path)
{
	std::ofstream os(path, std::ios::binary);
	if (!os) {
		fail(ErrorCode::Io, "cannot open " + path + " for writing");
	}
	os << "Pf\n" << field.width() << ' ' << field.height() << "\n-1\n";
	std::vector<float> row(field.width());
	for (int i = field.height() - 1; i >= 0; --i) {
		for (int j = 0; j < field.width(); ++j) {
			row[j] = field.valid(i, j) ? static_cast<float>(field(i, j))
									   : std::numeric_limits<float>::infinity();
		}
		if constexpr (std::endian::native == std::endian::big) {
			for (float &v : row) {
				v = std::bit_cast<float>(__builtin_bswap32(std::bit_cast<std::uint32_t>(v)));
			}
		}
		os.write(reinterpret_cast<const char *>(row.data()),
				static_cast<std::streamsize>(row.size() * sizeof(float)));
	}
	if (!os) {
		fail(ErrorCode::Io, "write failed: " + path);
	}
}

DisparityField read_pfm(const std::string &path)
{
	std::ifstream is(path, std::ios::binary);
	if (!is) {
		fail(ErrorCode::Io, "cannot open " + path);
	}
	const std::string magic = header_token(is, path);
	if (magic != "Pf") {
		fail(ErrorCode::BadHeader, path + ": expected single-channel 'Pf' PFM, got '" + magic + "'");
	}
	const int w = parse_dim(header_token(is, path), path);
	const int h = parse_dim(header_token(is, path), path);
	const std::string scale_tok = header_token(is, path);
	char *end = nullptr;
	const double scale = std::strtod(scale_tok.c_str(), &end);
	if (*end != '\0' || scale == 0.0 || !std::isfinite(scale)) {
		fail(ErrorCode::BadHeader, path + ": bad scale '" + scale_tok + "'");
	}
	const bool little = scale < 0.0;
	DisparityField field(h, w);
	std::vector<std::uint32_t> row(w);
	for (int i = h - 1; i >= 0; --i) {
		if (!is.read(reinterpret_cast<char *>(row.data()),
					static_cast<std::streamsize>(row.size() * sizeof(float)))) {
			fail(ErrorCode::Truncated, path + ": pixel data shorter than " +
					std::to_string(w) + "x" + std::to_string(h));
		}
		for (int j = 0; j < w; ++j) {
			std::uint32_t bits = row[j];
			if (little != (std::endian::native == std::endian::little)) {
				bits = __builtin_bswap32(bits);
			}
			const float v = std::bit_cast<float>(bits);
			if (std::isfinite(v)) {
				field.set(i, j, v);
			}
		}
	}
	return field;
}

bool kitti_representable(const DisparityField &field)
{
	for (int i = 0; i < field.height(); ++i) {
		for (int j = 0; j < field.width(); ++j) {
			if (!field.valid(i, j)) {
				continue;
			}
			const long v = std::lround(field(i, j) * 256.0);
			if (v < 1 || v > 65535) {
				return false;
			}
		}
	}
	return true;
}

void write_kitti_png(const DisparityField &field, const std::string &path)
{
	std::vector<std::uint16_t> samples(static_cast<std::size_t>(field.height()) * field.width(), 0);
	for (int i = 0; i < field.height(); ++i) {
		for (int j = 0; j < field.width(); ++j) {
			if (!field.valid(i, j)) {
				continue;
			}
			const long v = std::lround(field(i, j) * 256.0);
			if (v < 1 || v > 65535) {
				fail(ErrorCode::Range, path + ": disparity " + std::to_string(field(i, j)) +
						" at (" + std::to_string(i) + "," + std::to_string(j) +
						") is not representable in KITTI 16-bit PNG");
			}
			samples[static_cast<std::size_t>(i) * field.width() + j] = static_cast<std::uint16_t>(v);
		}
	}
	write_png(path, field.height(), field.width(), 1, 16, samples);
}

DisparityField read_kitti_png(const std::string &path)
{
	const PngData png = read_png(path);
	if (png.bit_depth != 16 || png.channels != 1) {
		fail(ErrorCode::BadHeader, path + ": KITTI disparity must be a 16-bit single-channel PNG");
	}
	DisparityField field(png.height, png.width);
	for (int i = 0; i < png.height; ++i) {
		for (int j = 0; j < png.width; ++j) {
			const std::uint16_t v = png.samples[static_cast<std::size_t>(i) * png.width + j];
			if (v != 0) {
				field.set(i, j, v / 256.0);
			}
		}
	}
	return field;
}

Image read_image(const std::string &path)
{
	std::ifstream probe(path, std::ios::binary);
	if (!probe) {
		fail(ErrorCode::Io, "cannot open " + path);
	}
	char m[2] = {};
	probe.read(m, 2);
	if (m[0] == 'P' && (m[1] == '5' || m[1] == '6')) {
		std::ifstream is(path, std::ios::binary);
		header_token(is, path);
		const int w = parse_dim(header_token(is, path), path);
		const int h = parse_dim(header_token(is, path), path);
		const int maxval = parse_dim(header_token(is, path), path);
		if (maxval > 255) {
			fail(ErrorCode::BadHeader, path + ": only 8-bit PGM/PPM is supported");
		}
		const int ch = m[1] == '5' ? 1 : 3;
		Image img(h, w, ch);
		std::vector<unsigned char> buf(img.data().size());
		if (!is.read(reinterpret_cast<char *>(buf.data()), static_cast<std::streamsize>(buf.size()))) {
			fail(ErrorCode::Truncated, path + ": pixel data truncated");
		}
		const float scale = 255.0f / static_cast<float>(maxval);
		for (std::size_t k = 0; k < buf.size(); ++k) {
			img.data()[k] = buf[k] * scale;
		}
		return img;
	}
	const PngData png = read_png(path);
	const int ch = png.channels >= 3 ? 3 : 1;
	Image img(png.height, png.width, ch);
	const float scale = png.bit_depth == 16 ? 255.0f / 65535.0f : 1.0f;
	for (int i = 0; i < png.height; ++i) {
		for (int j = 0; j < png.width; ++j) {
			const std::size_t base = (static_cast<std::size_t>(i) * png.width + j) * png.channels;
			for (int c = 0; c < ch; ++c) {
				img(i, j, c) = png.samples[base + c] * scale;
			}
		}
	}
	return img;
}

void write_image(const Image &image, const std::string &path)
{
	const std::string ext = lower_ext(path);
	if (ext == "pgm" || ext == "ppm") {
		if ((ext == "pgm") != (image.channels() == 1)) {
			fail(ErrorCode::InvalidArgument, path + ": extension does not match channel count");
		}
		std::ofstream os(path, std::ios::binary);
		if (!os) {
			fail(ErrorCode::Io, "cannot open " + path + " for writing");
		}
		os << (ext == "pgm" ? "P5" : "P6") << '\n' << image.width() << ' ' << image.height() << "\n255\n";
		std::vector<unsigned char> buf(image.data().size());
		for (std::size_t k = 0; k < buf.size(); ++k) {
			buf[k] = static_cast<unsigned char>(to_u8(image.data()[k]));
		}
		os.write(reinterpret_cast<const char *>(buf.data()), static_cast<std::streamsize>(buf.size()));
		if (!os) {
			fail(ErrorCode::Io, "write failed: " + path);
		}
		return;
	}
	std::vector<std::uint16_t> samples(image.data().size());
	std::transform(image.data().begin(), image.data().end(), samples.begin(), to_u8);
	write_png(path, image.height(), image.width(), image.channels(), 8, samples);
}

void write_mask_png(const Grid2D<std::uint8_t> &mask, const std::string &path)
{
	std::vector<std::uint16_t> samples(mask.size());
	std::transform(mask.values().begin(), mask.values().end(), samples.begin(),
			[](std::uint8_t v) { return static_cast<std::uint16_t>(v ? 255 : 0); });
	write_png(path, mask.height(), mask.width(), 1, 8, samples);
}

Grid2D<std::uint8_t> read_mask_png(const std::string &path)
{
	const PngData png = read_png(path);
	Grid2D<std::uint8_t> mask(png.height, png.width, 0);
	for (int i = 0; i < png.height; ++i) {
		for (int j = 0; j < png.width; ++j) {
			mask(i, j) = png.samples[(static_cast<std::size_t>(i) * png.width + j) * png.channels] ? 1 : 0;
		}
	}
	return mask;
}

}
