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

#include "stereopipe/synth.hpp"

#include <algorithm>
#include <array>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "stereopipe/io.hpp"

namespace stereopipe::evalio {

Layout parse_layout(const std::string &name)
{
	if (name == "fronto_layers") return Layout::FrontoLayers;
	if (name == "slanted") return Layout::Slanted;
	if (name == "negative_range") return Layout::NegativeRange;
	fail(ErrorCode::InvalidArgument, "unknown layout '" + name +
			"' (expected fronto_layers, slanted or negative_range)");
}

const char *layout_name(Layout layout)
{
	switch (layout) {
	case Layout::FrontoLayers: return "fronto_layers";
	case Layout::Slanted: return "slanted";
	case Layout::NegativeRange: return "negative_range";
	}
	return "?";
}

namespace {

constexpr double kSlantedGradient = -0.02;

std::uint64_t mix(std::uint64_t x)
{
	x += 0x9e3779b97f4a7c15ULL;
	x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
	x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
	return x ^ (x >> 31);
}

// Band-limited value noise in [0, 1], continuous in x.
class Texture {
public:
	Texture(std::uint64_t seed, int channels) : m_seed(seed), m_channels(channels) {}

	double sample(double x, double y, int channel) const
	{
		static constexpr std::array<std::pair<double, double>, 3> octaves = {{
				{4.0, 0.5}, {8.0, 0.3}, {16.0, 0.2}}};
		double v = 0.0;
		for (std::size_t o = 0; o < octaves.size(); ++o) {
			v += octaves[o].second * lattice(x / octaves[o].first, y / octaves[o].first,
					channel * 8 + static_cast<int>(o));
		}
		return v;
	}

private:
	double node(long ix, long iy, int salt) const
	{
		const std::uint64_t h = mix(m_seed ^ mix(static_cast<std::uint64_t>(ix) * 0x100000001b3ULL ^
				mix(static_cast<std::uint64_t>(iy) + (static_cast<std::uint64_t>(salt) << 40))));
		return static_cast<double>(h >> 11) * 0x1.0p-53;
	}

	double lattice(double x, double y, int salt) const
	{
		const double fx = std::floor(x);
		const double fy = std::floor(y);
		const long ix = static_cast<long>(fx);
		const long iy = static_cast<long>(fy);
		const double tx = x - fx;
		const double ty = y - fy;
		const double a = node(ix, iy, salt) * (1 - tx) + node(ix + 1, iy, salt) * tx;
		const double b = node(ix, iy + 1, salt) * (1 - tx) + node(ix + 1, iy + 1, salt) * tx;
		return a * (1 - ty) + b * ty;
	}

	std::uint64_t m_seed;
	int m_channels;
};

struct Rect {
	int top, bottom, left, right; // half-open
	bool contains(int i, double x) const
	{
		return i >= top && i < bottom && x >= left && x < right;
	}
};

struct Layer {
	double disparity = 0.0;  // at the image center column for the background
	double gradient = 0.0;   // d(disparity)/dx, background only
	Rect rect{};             // unused for the background
	std::array<double, 3> base{};
	std::uint64_t texture_seed = 0;
};

struct SceneModel {
	int h = 0;
	int w = 0;
	Layer bg;
	std::vector<Layer> fg;

	double bg_disparity(double x) const { return bg.disparity + bg.gradient * (x - 0.5 * w); }

	// Left-view layer index at (i, j): -1 background, else rectangle index.
	int top_left(int i, int j) const
	{
		for (std::size_t k = 0; k < fg.size(); ++k) {
			if (fg[k].rect.contains(i, j)) {
				return static_cast<int>(k);
			}
		}
		return -1;
	}
};

double color_at(const Layer &layer, const Texture &tex, double x, double y, int c)
{
	constexpr double amplitude = 110.0;
	const double v = layer.base[c] + amplitude * (tex.sample(x, y, c) - 0.5);
	return std::clamp(v, 0.0, 255.0);
}

void check_layer(double d, const SceneSpec &spec)
{
	if (d < spec.d_min || d > spec.d_max) {
		std::ostringstream msg;
		msg << "layer disparity " << d << " outside range [" << spec.d_min << ", " << spec.d_max << "]";
		fail(ErrorCode::Range, msg.str());
	}
}

std::vector<double> pick_layers(const SceneSpec &spec, std::mt19937_64 &rng)
{
	if (!spec.layers.empty()) {
		return spec.layers;
	}
	auto uniform_int = [&](int lo, int hi) {
		return static_cast<double>(std::uniform_int_distribution<int>(lo, hi)(rng));
	};
	switch (spec.layout) {
	case Layout::NegativeRange: {
		if (spec.d_min > -20 || spec.d_max < 15) {
			if (spec.d_min >= -1 || spec.d_max <= 1) {
				fail(ErrorCode::Range, "negative_range layout needs d_min < -1 and d_max > 1");
			}
			const double bg = uniform_int(spec.d_min, -2);
			const double mid = uniform_int(static_cast<int>(bg) + 1, 0);
			return {bg, mid, uniform_int(1, spec.d_max)};
		}
		return {-20.0, -5.0, 15.0};
	}
	case Layout::Slanted: {
		// Background spans +-w/2 * |gradient| around its center disparity.
		const double half_span = 0.5 * spec.width * std::abs(kSlantedGradient);
		const int lo = spec.d_min + static_cast<int>(std::ceil(half_span));
		const int hi = spec.d_max - static_cast<int>(std::ceil(half_span)) - 2;
		if (lo > hi) {
			fail(ErrorCode::Range, "disparity range too narrow for the slanted layout");
		}
		const double bg = uniform_int(lo, hi);
		const int fg_lo = static_cast<int>(std::ceil(bg + half_span)) + 1;
		return {bg, uniform_int(fg_lo, spec.d_max)};
	}
	case Layout::FrontoLayers: {
		if (spec.d_max - spec.d_min < 2) {
			fail(ErrorCode::Range, "fronto_layers needs a range of at least 3 disparities");
		}
		const double bg = uniform_int(spec.d_min, spec.d_min + (spec.d_max - spec.d_min) / 2 - 1);
		const double a = uniform_int(static_cast<int>(bg) + 1, spec.d_max);
		double b = uniform_int(static_cast<int>(bg) + 1, spec.d_max);
		if (b == a) {
			b = a > bg + 1 ? a - 1 : a + 1;
		}
		if (b > spec.d_max) {
			return {bg, a};
		}
		return {bg, a, b};
	}
	}
	return {};
}

SceneModel build_model(std::uint64_t seed, const SceneSpec &spec)
{
	if (spec.height < 8 || spec.width < 16) {
		fail(ErrorCode::InvalidArgument, "scene must be at least 8x16 pixels");
	}
	if (spec.d_min > spec.d_max) {
		fail(ErrorCode::Range, "d_min > d_max");
	}
	std::mt19937_64 rng(seed);
	const std::vector<double> layers = pick_layers(spec, rng);
	if (layers.empty()) {
		fail(ErrorCode::InvalidArgument, "scene needs at least a background layer");
	}
	SceneModel model;
	model.h = spec.height;
	model.w = spec.width;
	model.bg.disparity = layers[0];
	model.bg.gradient = spec.layout == Layout::Slanted ? kSlantedGradient : 0.0;
	const double bg_lo = std::min(model.bg_disparity(0), model.bg_disparity(spec.width - 1));
	const double bg_hi = std::max(model.bg_disparity(0), model.bg_disparity(spec.width - 1));
	check_layer(bg_lo, spec);
	check_layer(bg_hi, spec);

	std::uniform_real_distribution<double> base_color(50.0, 205.0);
	auto init_look = [&](Layer &l) {
		for (double &c : l.base) {
			c = base_color(rng);
		}
		l.texture_seed = rng();
	};
	init_look(model.bg);

	for (std::size_t k = 1; k < layers.size(); ++k) {
		Layer l;
		l.disparity = layers[k];
		check_layer(l.disparity, spec);
		if (l.disparity <= bg_hi) {
			fail(ErrorCode::InvalidArgument, "foreground layers must be nearer than the background");
		}
		if (l.disparity != std::round(l.disparity)) {
			fail(ErrorCode::InvalidArgument, "foreground layer disparities must be integers");
		}
		init_look(l);
		bool placed = false;
		for (int attempt = 0; attempt < 200 && !placed; ++attempt) {
			const int rw = std::uniform_int_distribution<int>(spec.width / 6, spec.width / 4)(rng);
			const int rh = std::uniform_int_distribution<int>(spec.height / 3, spec.height / 2)(rng);
			const int top = std::uniform_int_distribution<int>(0, spec.height - rh)(rng);
			const int left = std::uniform_int_distribution<int>(0, spec.width - rw)(rng);
			const Rect r{top, top + rh, left, left + rw};
			placed = std::none_of(model.fg.begin(), model.fg.end(), [&](const Layer &o) {
				return r.left < o.rect.right + 2 && o.rect.left < r.right + 2 &&
						r.top < o.rect.bottom + 2 && o.rect.top < r.bottom + 2;
			});
			if (placed) {
				l.rect = r;
			}
		}
		if (!placed) {
			fail(ErrorCode::InvalidArgument, "could not place non-overlapping rectangles");
		}
		model.fg.push_back(l);
	}
	return model;
}

}

SyntheticScene generate_scene(std::uint64_t seed, const SceneSpec &spec)
{
	const SceneModel model = build_model(seed, spec);
	const int h = model.h;
	const int w = model.w;
	SyntheticScene sc;
	sc.spec = spec;
	sc.seed = seed;
	sc.spec.layers.clear();
	sc.spec.layers.push_back(model.bg.disparity);
	for (const Layer &l : model.fg) {
		sc.spec.layers.push_back(l.disparity);
	}
	sc.left = Image(h, w, 3);
	sc.right = Image(h, w, 3);
	sc.gt_left = DisparityField(h, w);
	sc.gt_right = DisparityField(h, w);
	sc.occ_left = Grid2D<std::uint8_t>(h, w, 0);
	sc.occ_right = Grid2D<std::uint8_t>(h, w, 0);

	const Texture bg_tex(model.bg.texture_seed, 3);
	std::vector<Texture> fg_tex;
	for (const Layer &l : model.fg) {
		fg_tex.emplace_back(l.texture_seed, 3);
	}

	for (int i = 0; i < h; ++i) {
		for (int j = 0; j < w; ++j) {
			const int k = model.top_left(i, j);
			const Layer &l = k < 0 ? model.bg : model.fg[k];
			const Texture &tex = k < 0 ? bg_tex : fg_tex[k];
			sc.gt_left.set(i, j, k < 0 ? model.bg_disparity(j) : l.disparity);
			for (int c = 0; c < 3; ++c) {
				sc.left(i, j, c) = static_cast<float>(color_at(l, tex, j, i, c));
			}
		}
	}

	// Right view: the nearest surface whose left-view footprint covers x_R + d.
	const double g = model.bg.gradient;
	for (int i = 0; i < h; ++i) {
		for (int x = 0; x < w; ++x) {
			int winner = -1;
			for (std::size_t k = 0; k < model.fg.size(); ++k) {
				const Layer &l = model.fg[k];
				if (l.rect.contains(i, x + l.disparity) &&
						(winner < 0 || l.disparity > model.fg[winner].disparity)) {
					winner = static_cast<int>(k);
				}
			}
			double xl;
			double d;
			if (winner >= 0) {
				d = model.fg[winner].disparity;
				xl = x + d;
			} else {
				xl = (x + model.bg.disparity - g * 0.5 * w) / (1.0 - g);
				d = model.bg_disparity(xl);
			}
			const Layer &l = winner < 0 ? model.bg : model.fg[winner];
			const Texture &tex = winner < 0 ? bg_tex : fg_tex[winner];
			sc.gt_right.set(i, x, d);
			for (int c = 0; c < 3; ++c) {
				sc.right(i, x, c) = static_cast<float>(color_at(l, tex, xl, i, c));
			}
		}
	}

	// Visibility from the layer model: a left pixel is hidden when its target
	// column is outside the image or a nearer rectangle covers that column.
	for (int i = 0; i < h; ++i) {
		for (int j = 0; j < w; ++j) {
			const double d = sc.gt_left(i, j);
			const long target = round_half_away(j - d);
			bool hidden = target < 0 || target >= w;
			for (const Layer &l : model.fg) {
				if (!hidden && l.disparity > d && l.rect.contains(i, target + l.disparity)) {
					hidden = true;
				}
			}
			sc.occ_left(i, j) = hidden ? 1 : 0;
		}
		for (int x = 0; x < w; ++x) {
			const double d = sc.gt_right(i, x);
			const long target = round_half_away(x + d);
			bool hidden = target < 0 || target >= w;
			if (!hidden) {
				hidden = sc.gt_left(i, static_cast<int>(target)) > d;
			}
			sc.occ_right(i, x) = hidden ? 1 : 0;
		}
	}

	if (spec.noise_sigma > 0.0) {
		std::mt19937_64 rng(mix(seed ^ 0x6e6f697365ULL));
		std::normal_distribution<double> noise(0.0, spec.noise_sigma);
		for (Image *img : {&sc.left, &sc.right}) {
			for (float &v : img->data()) {
				v = static_cast<float>(std::clamp(v + noise(rng), 0.0, 255.0));
			}
		}
	}
	// Quantize to 8-bit so a saved and reloaded scene is identical.
	for (Image *img : {&sc.left, &sc.right}) {
		for (float &v : img->data()) {
			v = std::round(v);
		}
	}
	return sc;
}

namespace fs = std::filesystem;

void save_scene(const SyntheticScene &scene, const std::string &dir)
{
	std::error_code ec;
	fs::create_directories(fs::path(dir) / "gt", ec);
	if (ec) {
		fail(ErrorCode::Io, "cannot create " + dir + ": " + ec.message());
	}
	const fs::path root(dir);
	write_image(scene.left, (root / "left.png").string());
	write_image(scene.right, (root / "right.png").string());
	write_pfm(scene.gt_left, (root / "gt" / "disp.pfm").string());
	Grid2D<std::uint8_t> noc(scene.occ_left.height(), scene.occ_left.width(), 0);
	for (std::size_t k = 0; k < noc.size(); ++k) {
		noc.values()[k] = scene.occ_left.values()[k] ? 0 : 1;
	}
	write_mask_png(noc, (root / "gt" / "disp.noc.png").string());
	write_pfm(scene.gt_right, (root / "gt_right.pfm").string());
	write_mask_png(scene.occ_left, (root / "occ_left.png").string());
	write_mask_png(scene.occ_right, (root / "occ_right.png").string());

	std::ofstream os(root / "manifest.txt");
	os << "seed=" << scene.seed << '\n'
	   << "layout=" << layout_name(scene.spec.layout) << '\n'
	   << "height=" << scene.spec.height << '\n'
	   << "width=" << scene.spec.width << '\n'
	   << "d_min=" << scene.spec.d_min << '\n'
	   << "d_max=" << scene.spec.d_max << '\n'
	   << "noise_sigma=" << scene.spec.noise_sigma << '\n'
	   << "layers=";
	for (std::size_t k = 0; k < scene.spec.layers.size(); ++k) {
		os << (k ? "," : "") << scene.spec.layers[k];
	}
	os << '\n';
	if (!os) {
		fail(ErrorCode::Io, "cannot write manifest in " + dir);
	}
}

SyntheticScene load_scene(const std::string &dir)
{
	const fs::path root(dir);
	std::ifstream is(root / "manifest.txt");
	if (!is) {
		fail(ErrorCode::Io, dir + ": missing manifest.txt");
	}
	std::map<std::string, std::string> kv;
	std::string line;
	while (std::getline(is, line)) {
		const auto eq = line.find('=');
		if (eq != std::string::npos) {
			kv[line.substr(0, eq)] = line.substr(eq + 1);
		}
	}
	SyntheticScene sc;
	try {
		sc.seed = std::stoull(kv.at("seed"));
		sc.spec.layout = parse_layout(kv.at("layout"));
		sc.spec.height = std::stoi(kv.at("height"));
		sc.spec.width = std::stoi(kv.at("width"));
		sc.spec.d_min = std::stoi(kv.at("d_min"));
		sc.spec.d_max = std::stoi(kv.at("d_max"));
		sc.spec.noise_sigma = std::stod(kv.at("noise_sigma"));
		std::stringstream ls(kv.at("layers"));
		std::string tok;
		while (std::getline(ls, tok, ',')) {
			sc.spec.layers.push_back(std::stod(tok));
		}
	} catch (const std::out_of_range &) {
		fail(ErrorCode::BadHeader, dir + ": incomplete manifest");
	} catch (const std::invalid_argument &) {
		fail(ErrorCode::BadHeader, dir + ": malformed manifest value");
	}
	sc.left = read_image((root / "left.png").string());
	sc.right = read_image((root / "right.png").string());
	sc.gt_left = read_pfm((root / "gt" / "disp.pfm").string());
	sc.gt_right = read_pfm((root / "gt_right.pfm").string());
	sc.occ_left = read_mask_png((root / "occ_left.png").string());
	sc.occ_right = read_mask_png((root / "occ_right.png").string());
	return sc;
}

}
