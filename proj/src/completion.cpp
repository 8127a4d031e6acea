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

#include "stereopipe/completion.hpp"

#include <algorithm>
#include <deque>

namespace stereopipe::completion {

void validate(const CompletionConfig &cfg)
{
	if (cfg.levels < 1 || cfg.iterations_per_level < 1 || cfg.color_sigma <= 0.0 ||
			cfg.spatial_radius < 1 || cfg.reliability_floor <= 0.0 ||
			cfg.reliability_floor >= 1.0 || cfg.tolerance <= 0.0 ||
			cfg.max_final_iterations < 0) {
		fail(ErrorCode::InvalidArgument,
				"completion config needs levels, iterations, sigma, radius >= 1 and floor in (0, 1)");
	}
}

namespace {

struct Level {
	int h = 0;
	int w = 0;
	int channels = 1;
	std::vector<double> color;       // h*w*channels
	std::vector<double> value;       // known values, else initial guess
	std::vector<std::uint8_t> known;
	std::vector<double> reliability;

	std::size_t idx(int i, int j) const { return static_cast<std::size_t>(i) * w + j; }
};

Level downsample_level(const Level &src)
{
	Level dst;
	dst.h = (src.h + 1) / 2;
	dst.w = (src.w + 1) / 2;
	dst.channels = src.channels;
	const std::size_t n = static_cast<std::size_t>(dst.h) * dst.w;
	dst.color.assign(n * dst.channels, 0.0);
	dst.value.assign(n, 0.0);
	dst.known.assign(n, 0);
	dst.reliability.assign(n, 0.0);
	for (int i = 0; i < dst.h; ++i) {
		for (int j = 0; j < dst.w; ++j) {
			const std::size_t q = dst.idx(i, j);
			int cnt = 0;
			int kcnt = 0;
			double vsum = 0.0;
			double rsum = 0.0;
			for (int a = 2 * i; a < std::min(2 * i + 2, src.h); ++a) {
				for (int b = 2 * j; b < std::min(2 * j + 2, src.w); ++b) {
					const std::size_t p = src.idx(a, b);
					for (int c = 0; c < src.channels; ++c) {
						dst.color[q * dst.channels + c] += src.color[p * src.channels + c];
					}
					++cnt;
					if (src.known[p]) {
						vsum += src.value[p];
						rsum += src.reliability[p];
						++kcnt;
					}
				}
			}
			for (int c = 0; c < dst.channels; ++c) {
				dst.color[q * dst.channels + c] /= cnt;
			}
			if (kcnt > 0) {
				dst.known[q] = 1;
				dst.value[q] = vsum / kcnt / 2.0;
				dst.reliability[q] = rsum / kcnt;
			}
		}
	}
	return dst;
}

// Neighbor weights of every unknown pixel, fixed for the level.
struct Stencil {
	std::vector<std::size_t> pixels;
	std::vector<std::size_t> neighbor;
	std::vector<double> weight;
	std::vector<std::size_t> begin; // pixels.size() + 1 offsets into neighbor/weight
	std::vector<std::size_t> row_begin; // per image row, offsets into pixels
};

Stencil build_stencil(const Level &lv, const CompletionConfig &cfg)
{
	Stencil st;
	const int r = cfg.spatial_radius;
	const double inv2s2 = 1.0 / (2.0 * cfg.color_sigma * cfg.color_sigma);
	st.begin.push_back(0);
	st.row_begin.push_back(0);
	for (int i = 0; i < lv.h; ++i) {
		for (int j = 0; j < lv.w; ++j) {
			const std::size_t p = lv.idx(i, j);
			if (lv.known[p]) {
				continue;
			}
			st.pixels.push_back(p);
			for (int a = std::max(0, i - r); a <= std::min(lv.h - 1, i + r); ++a) {
				for (int b = std::max(0, j - r); b <= std::min(lv.w - 1, j + r); ++b) {
					if (a == i && b == j) {
						continue;
					}
					const std::size_t q = lv.idx(a, b);
					double dist2 = 0.0;
					for (int c = 0; c < lv.channels; ++c) {
						const double d = lv.color[p * lv.channels + c] - lv.color[q * lv.channels + c];
						dist2 += d * d;
					}
					const double rel = lv.known[q]
							? std::max(lv.reliability[q], cfg.reliability_floor)
							: cfg.reliability_floor;
					st.neighbor.push_back(q);
					st.weight.push_back(std::exp(-dist2 * inv2s2) * rel);
				}
			}
			st.begin.push_back(st.neighbor.size());
		}
		st.row_begin.push_back(st.pixels.size());
	}
	return st;
}

// One Jacobi sweep; returns the largest absolute update.
double sweep(const Stencil &st, const std::vector<double> &cur, std::vector<double> &next,
		int threads)
{
	const int rows = static_cast<int>(st.row_begin.size()) - 1;
	std::vector<double> row_delta(rows, 0.0);
	parallel_rows(rows, threads, [&](int row) {
		double delta = 0.0;
		for (std::size_t u = st.row_begin[row]; u < st.row_begin[row + 1]; ++u) {
			double num = 0.0;
			double den = 0.0;
			for (std::size_t e = st.begin[u]; e < st.begin[u + 1]; ++e) {
				num += st.weight[e] * cur[st.neighbor[e]];
				den += st.weight[e];
			}
			const std::size_t p = st.pixels[u];
			next[p] = den > 1e-300 ? num / den : cur[p];
			delta = std::max(delta, std::abs(next[p] - cur[p]));
		}
		row_delta[row] = delta;
	});
	double out = 0.0;
	for (double d : row_delta) {
		out = std::max(out, d);
	}
	return out;
}

void diffuse(const Level &lv, std::vector<double> &state, int min_iters, int max_iters,
		double tol, const CompletionConfig &cfg)
{
	const Stencil st = build_stencil(lv, cfg);
	if (st.pixels.empty()) {
		return;
	}
	std::vector<double> next = state;
	for (int it = 0; it < max_iters; ++it) {
		const double delta = sweep(st, state, next, cfg.threads);
		state.swap(next);
		if (it + 1 >= min_iters && delta < tol) {
			break;
		}
	}
}

// Clamp every 8-connected unknown region into the range of the known pixels
// bordering it.
void clamp_regions(const Level &lv, std::vector<double> &state)
{
	std::vector<int> label(state.size(), -1);
	std::deque<std::size_t> queue;
	std::vector<std::size_t> members;
	int next_label = 0;
	for (std::size_t s = 0; s < state.size(); ++s) {
		if (lv.known[s] || label[s] >= 0) {
			continue;
		}
		double lo = std::numeric_limits<double>::infinity();
		double hi = -lo;
		members.clear();
		queue.push_back(s);
		label[s] = next_label;
		while (!queue.empty()) {
			const std::size_t p = queue.front();
			queue.pop_front();
			members.push_back(p);
			const int i = static_cast<int>(p / lv.w);
			const int j = static_cast<int>(p % lv.w);
			for (int a = std::max(0, i - 1); a <= std::min(lv.h - 1, i + 1); ++a) {
				for (int b = std::max(0, j - 1); b <= std::min(lv.w - 1, j + 1); ++b) {
					const std::size_t q = lv.idx(a, b);
					if (lv.known[q]) {
						lo = std::min(lo, state[q]);
						hi = std::max(hi, state[q]);
					} else if (label[q] < 0) {
						label[q] = next_label;
						queue.push_back(q);
					}
				}
			}
		}
		if (lo <= hi) {
			for (std::size_t p : members) {
				state[p] = std::clamp(state[p], lo, hi);
			}
		}
		++next_label;
	}
}

DisparityField to_field(const Level &lv, const std::vector<double> &state)
{
	DisparityField f(lv.h, lv.w);
	for (int i = 0; i < lv.h; ++i) {
		for (int j = 0; j < lv.w; ++j) {
			f.set(i, j, state[lv.idx(i, j)]);
		}
	}
	return f;
}

int find_factor(int image_len, int field_len)
{
	for (int f = 1; f <= 64; f *= 2) {
		if ((image_len + f - 1) / f == field_len) {
			return f;
		}
	}
	return 0;
}

}

CompletionResult complete(const DisparityField &semi, const DisparityField &init,
		const Grid2D<double> &reliability, const Image &left, const CompletionConfig &cfg)
{
	validate(cfg);
	if (!semi.same_shape(init) || reliability.height() != semi.height() ||
			reliability.width() != semi.width()) {
		fail(ErrorCode::DimensionMismatch, "semi-dense, initial and reliability maps differ in size");
	}
	const int H = left.height();
	const int W = left.width();
	const int fy = find_factor(H, semi.height());
	const int fx = find_factor(W, semi.width());
	if (fy == 0 || fy != fx) {
		fail(ErrorCode::DimensionMismatch, "disparity maps are not a power-of-two reduction of the image");
	}
	const int f = fy;

	DisparityField semi_full = crop(upsample_disparity(semi, f, cfg.upsample_max_spread), H, W);
	DisparityField init_full = crop(upsample_disparity(init, f), H, W);
	Grid2D<double> rel_full = upsample_grid(reliability, f);

	Level base;
	base.h = H;
	base.w = W;
	base.channels = left.channels();
	base.color.assign(left.data().begin(), left.data().end());
	const std::size_t n = static_cast<std::size_t>(H) * W;
	base.value.assign(n, 0.0);
	base.known.assign(n, 0);
	base.reliability.assign(n, 0.0);
	std::size_t n_known = 0;
	for (int i = 0; i < H; ++i) {
		for (int j = 0; j < W; ++j) {
			const std::size_t p = base.idx(i, j);
			base.reliability[p] = std::clamp(rel_full(i, j), 0.0, 1.0);
			if (semi_full.valid(i, j)) {
				base.known[p] = 1;
				base.value[p] = semi_full(i, j);
				++n_known;
			}
		}
	}
	if (n_known == 0) {
		fail(ErrorCode::Degenerate, "semi-dense map has no valid pixel to propagate");
	}

	std::vector<Level> pyramid;
	pyramid.push_back(std::move(base));
	for (int l = 1; l < cfg.levels; ++l) {
		pyramid.push_back(downsample_level(pyramid.back()));
	}

	// Initial guess at the coarsest level: the matcher's own estimate where it
	// exists, else the mean of the known values.
	const Level &top = pyramid.back();
	const int top_factor = 1 << (cfg.levels - 1);
	DisparityField init_top = downsample_disparity(init_full, top_factor);
	double mean_known = 0.0;
	std::size_t cnt_known = 0;
	for (std::size_t p = 0; p < top.value.size(); ++p) {
		if (top.known[p]) {
			mean_known += top.value[p];
			++cnt_known;
		}
	}
	mean_known /= static_cast<double>(std::max<std::size_t>(cnt_known, 1));
	std::vector<double> state = top.value;
	for (int i = 0; i < top.h; ++i) {
		for (int j = 0; j < top.w; ++j) {
			const std::size_t p = top.idx(i, j);
			if (!top.known[p]) {
				state[p] = init_top.valid(i, j) ? init_top(i, j) : mean_known;
			}
		}
	}

	CompletionResult result;
	for (int l = cfg.levels - 1; l >= 0; --l) {
		const Level &lv = pyramid[l];
		if (l == 0) {
			diffuse(lv, state, cfg.iterations_per_level,
					cfg.iterations_per_level + cfg.max_final_iterations, cfg.tolerance, cfg);
			clamp_regions(lv, state);
		} else {
			diffuse(lv, state, cfg.iterations_per_level, cfg.iterations_per_level, 0.0, cfg);
		}
		result.levels.push_back(to_field(lv, state));
		if (l > 0) {
			const Level &finer = pyramid[l - 1];
			Grid2D<double> coarse(lv.h, lv.w);
			coarse.values() = state;
			const Grid2D<double> up = upsample_grid(coarse, 2);
			std::vector<double> next(static_cast<std::size_t>(finer.h) * finer.w);
			for (int i = 0; i < finer.h; ++i) {
				for (int j = 0; j < finer.w; ++j) {
					const std::size_t p = finer.idx(i, j);
					next[p] = finer.known[p] ? finer.value[p] : 2.0 * up(i, j);
				}
			}
			state.swap(next);
		}
	}
	result.final = result.levels.back();
	return result;
}

std::vector<DisparityField> multiscale_outputs(const CompletionResult &result, int count)
{
	if (count < 1 || static_cast<std::size_t>(count) > result.levels.size()) {
		fail(ErrorCode::InvalidArgument, "completion ran with " +
				std::to_string(result.levels.size()) + " levels, " + std::to_string(count) +
				" requested");
	}
	return {result.levels.end() - count, result.levels.end()};
}

}
