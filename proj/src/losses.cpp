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

#include "stereopipe/losses.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

namespace stereopipe::losses {

TentWeights tent_weights(double d_gt)
{
	TentWeights tw;
	tw.t = static_cast<int>(round_half_away(d_gt));
	double sum = 0.0;
	for (int delta = -1; delta <= 1; ++delta) {
		const double raw = std::max(0.0, 1.0 - std::abs(d_gt - (tw.t + delta)));
		tw.w[delta + 1] = raw;
		sum += raw;
	}
	for (double &w : tw.w) {
		w /= sum;
	}
	return tw;
}

namespace {

bool in_image_candidate(int j, int d, int width)
{
	const int jr = j - d;
	return jr >= 0 && jr < width;
}

// Tent weights restricted to in-range, in-image candidates and renormalized.
// Returns false when nothing remains.
bool masked_tent(double d_gt, int j, int width, const DisparityRange &range,
		std::array<int, 3> &k_out, std::array<double, 3> &w_out)
{
	const TentWeights tw = tent_weights(d_gt);
	double sum = 0.0;
	for (int delta = -1; delta <= 1; ++delta) {
		const int d = tw.t + delta;
		const int s = delta + 1;
		k_out[s] = d - range.lo();
		if (!range.contains(d) || !in_image_candidate(j, d, width) || tw.w[s] == 0.0) {
			w_out[s] = 0.0;
			continue;
		}
		w_out[s] = tw.w[s];
		sum += tw.w[s];
	}
	if (sum <= 0.0) {
		return false;
	}
	for (double &w : w_out) {
		w /= sum;
	}
	return true;
}

double dvr_pixel(std::span<const double> probs, const std::array<int, 3> &k,
		const std::array<double, 3> &w, double scale, std::span<double> grad_p)
{
	double loss = 0.0;
	for (int s = 0; s < 3; ++s) {
		if (w[s] == 0.0) {
			continue;
		}
		const double p = probs[k[s]];
		loss -= w[s] * std::log(std::max(p, kLogFloor));
		if (!grad_p.empty() && p > kLogFloor) {
			grad_p[k[s]] -= scale * w[s] / p;
		}
	}
	return loss;
}

// Adds d(loss)/d(score) for one pixel given d(loss)/d(prob).
void softmax_backward(std::span<const double> probs, std::span<const double> grad_p,
		double beta, std::span<double> grad_s)
{
	double dot = 0.0;
	for (std::size_t k = 0; k < probs.size(); ++k) {
		dot += probs[k] * grad_p[k];
	}
	for (std::size_t k = 0; k < probs.size(); ++k) {
		grad_s[k] += beta * probs[k] * (grad_p[k] - dot);
	}
}

// Three-tap statistics around a chosen argmax index.
struct Taps {
	int k = 0;
	double below = 0.0;
	double center = 0.0;
	double above = 0.0;
	bool has_below = false;
	bool has_above = false;

	double mass() const { return below + center + above; }
	double offset() const { return (above - below) / mass(); }
};

// 1 - r summed from the candidates outside the taps, which stays accurate
// when r is within rounding distance of 1.
double outside_mass(std::span<const double> probs, int k)
{
	double q = 0.0;
	for (int c = 0; c < static_cast<int>(probs.size()); ++c) {
		if (c < k - 1 || c > k + 1) {
			q += probs[c];
		}
	}
	return q;
}

Taps taps_at(std::span<const double> probs, int k)
{
	Taps t;
	const int m = static_cast<int>(probs.size());
	t.k = k;
	t.center = probs[k];
	t.has_below = k > 0;
	t.has_above = k + 1 < m;
	t.below = t.has_below ? probs[k - 1] : 0.0;
	t.above = t.has_above ? probs[k + 1] : 0.0;
	return t;
}

double sum_rows(const std::vector<double> &rows)
{
	double s = 0.0;
	for (double r : rows) {
		s += r;
	}
	return s;
}

}

ScalarLoss loss_dvr(const matcher::ProbabilityVolume &pv, const DisparityField &gt,
		const filter::RegionPartition &regions, double beta, matcher::Volume *grad_scores)
{
	const int h = pv.height();
	const int w = pv.width();
	const int m = pv.candidates();
	if (gt.height() != h || gt.width() != w) {
		fail(ErrorCode::DimensionMismatch, "ground truth does not match the volume");
	}
	std::array<int, 3> k{};
	std::array<double, 3> wt{};
	ScalarLoss out;
	for (int i = 0; i < h; ++i) {
		for (int j = 0; j < w; ++j) {
			if (regions.double_visible(i, j) && pv.pixel_valid(i, j) &&
					masked_tent(gt(i, j), j, w, pv.range(), k, wt)) {
				++out.count;
			}
		}
	}
	if (out.count == 0) {
		return out;
	}
	const double scale = 1.0 / static_cast<double>(out.count);
	std::vector<double> row_sum(h, 0.0);
	parallel_rows(h, 1, [&](int i) {
		std::array<int, 3> kk{};
		std::array<double, 3> ww{};
		std::vector<double> grad_p(grad_scores ? m : 0);
		for (int j = 0; j < w; ++j) {
			if (!regions.double_visible(i, j) || !pv.pixel_valid(i, j) ||
					!masked_tent(gt(i, j), j, w, pv.range(), kk, ww)) {
				continue;
			}
			std::fill(grad_p.begin(), grad_p.end(), 0.0);
			row_sum[i] += dvr_pixel(pv.pixel(i, j), kk, ww, scale, grad_p);
			if (grad_scores) {
				softmax_backward(pv.pixel(i, j), grad_p, beta, grad_scores->pixel(i, j));
			}
		}
	});
	out.value = sum_rows(row_sum) * scale;
	return out;
}

ScalarLoss loss_ur(const Grid2D<double> &reliability, const filter::RegionPartition &regions,
		Grid2D<double> *grad_reliability)
{
	ScalarLoss out;
	const int h = reliability.height();
	const int w = reliability.width();
	for (std::uint8_t u : regions.unreliable.values()) {
		out.count += u;
	}
	if (out.count == 0) {
		return out;
	}
	const double scale = 1.0 / static_cast<double>(out.count);
	double sum = 0.0;
	for (int i = 0; i < h; ++i) {
		double row = 0.0;
		for (int j = 0; j < w; ++j) {
			if (!regions.unreliable(i, j)) {
				continue;
			}
			const double q = 1.0 - reliability(i, j);
			row -= std::log(std::max(q, kLogFloor));
			if (grad_reliability && q > kLogFloor) {
				(*grad_reliability)(i, j) += scale / q;
			}
		}
		sum += row;
	}
	out.value = sum * scale;
	return out;
}

ScalarLoss loss_trr(const DisparityField &init, const DisparityField &gt,
		const filter::RegionPartition &regions, Grid2D<double> *grad_init)
{
	ScalarLoss out;
	const int h = init.height();
	const int w = init.width();
	for (int i = 0; i < h; ++i) {
		for (int j = 0; j < w; ++j) {
			out.count += regions.to_refine(i, j) && init.valid(i, j) && gt.valid(i, j);
		}
	}
	if (out.count == 0) {
		return out;
	}
	const double scale = 1.0 / static_cast<double>(out.count);
	double sum = 0.0;
	for (int i = 0; i < h; ++i) {
		double row = 0.0;
		for (int j = 0; j < w; ++j) {
			if (!regions.to_refine(i, j) || !init.valid(i, j) || !gt.valid(i, j)) {
				continue;
			}
			const double e = init(i, j) - gt(i, j);
			row += std::abs(e);
			if (grad_init && e != 0.0) {
				(*grad_init)(i, j) += scale * (e > 0.0 ? 1.0 : -1.0);
			}
		}
		sum += row;
	}
	out.value = sum * scale;
	return out;
}

SmoothL1 smooth_l1(const DisparityField &pred, const DisparityField &gt, Grid2D<double> *grad_pred)
{
	if (!pred.same_shape(gt)) {
		fail(ErrorCode::DimensionMismatch, "prediction and ground truth differ in size");
	}
	SmoothL1 out;
	for (int i = 0; i < pred.height(); ++i) {
		for (int j = 0; j < pred.width(); ++j) {
			out.count += pred.valid(i, j) && gt.valid(i, j);
		}
	}
	if (out.count == 0) {
		out.empty = true;
		return out;
	}
	const double scale = 1.0 / static_cast<double>(out.count);
	double sum = 0.0;
	for (int i = 0; i < pred.height(); ++i) {
		for (int j = 0; j < pred.width(); ++j) {
			if (!pred.valid(i, j) || !gt.valid(i, j)) {
				continue;
			}
			const double e = pred(i, j) - gt(i, j);
			const double a = std::abs(e);
			sum += a < 1.0 ? 0.5 * e * e : a - 0.5;
			if (grad_pred) {
				(*grad_pred)(i, j) += scale * (a < 1.0 ? e : (e > 0.0 ? 1.0 : -1.0));
			}
		}
	}
	out.value = sum * scale;
	return out;
}

LossBreakdown evaluate_volume(const matcher::ProbabilityVolume &pv, const DisparityField &gt,
		double beta, bool subpixel, const Structure *fixed, matcher::Volume *grad_scores,
		Structure *structure_out)
{
	const int h = pv.height();
	const int w = pv.width();
	const int m = pv.candidates();
	const DisparityRange &range = pv.range();
	if (gt.height() != h || gt.width() != w) {
		fail(ErrorCode::DimensionMismatch, "ground truth does not match the volume");
	}

	Structure local;
	const Structure *st = fixed;
	if (!st) {
		const matcher::MapEstimate est = matcher::map_disparity(pv, subpixel);
		local.regions = filter::derive_regions(gt, est.init);
		local.argmax = est.argmax;
		st = &local;
	}
	const filter::RegionPartition &rp = st->regions;

	// Region counts decide the normalizers before any gradient is formed.
	LossBreakdown lb;
	{
		std::array<int, 3> k{};
		std::array<double, 3> wt{};
		for (int i = 0; i < h; ++i) {
			for (int j = 0; j < w; ++j) {
				if (!pv.pixel_valid(i, j)) {
					continue;
				}
				lb.n_v += rp.double_visible(i, j) && masked_tent(gt(i, j), j, w, range, k, wt);
				lb.n_u += rp.unreliable(i, j);
				lb.n_t += rp.to_refine(i, j) && gt.valid(i, j);
			}
		}
	}
	const double sv = lb.n_v ? 1.0 / static_cast<double>(lb.n_v) : 0.0;
	const double su = lb.n_u ? 1.0 / static_cast<double>(lb.n_u) : 0.0;
	const double stt = lb.n_t ? 1.0 / static_cast<double>(lb.n_t) : 0.0;

	std::vector<double> dvr_rows(h, 0.0);
	std::vector<double> ur_rows(h, 0.0);
	std::vector<double> trr_rows(h, 0.0);
	parallel_rows(h, 1, [&](int i) {
		std::vector<double> grad_p(m);
		std::array<int, 3> k{};
		std::array<double, 3> wt{};
		for (int j = 0; j < w; ++j) {
			if (!pv.pixel_valid(i, j)) {
				continue;
			}
			const std::span<const double> probs = pv.pixel(i, j);
			std::fill(grad_p.begin(), grad_p.end(), 0.0);
			bool touched = false;

			if (rp.double_visible(i, j) && masked_tent(gt(i, j), j, w, range, k, wt)) {
				dvr_rows[i] += dvr_pixel(probs, k, wt, sv, grad_p);
				touched = true;
			}

			const int kh = st->argmax(i, j) - range.lo();
			const Taps tp = taps_at(probs, kh);
			if (rp.unreliable(i, j)) {
				const double q = outside_mass(probs, kh);
				ur_rows[i] -= std::log(std::max(q, kLogFloor));
				if (q > kLogFloor) {
					const double g = -su / q;
					for (int c = 0; c < m; ++c) {
						if (c < kh - 1 || c > kh + 1) {
							grad_p[c] += g;
						}
					}
				}
				touched = true;
			}
			if (rp.to_refine(i, j) && gt.valid(i, j)) {
				const double o = subpixel ? tp.offset() : 0.0;
				const double e = range.candidate(kh) + o - gt(i, j);
				trr_rows[i] += std::abs(e);
				if (subpixel && e != 0.0) {
					const double g = stt * (e > 0.0 ? 1.0 : -1.0) / tp.mass();
					grad_p[kh] += g * (-o);
					if (tp.has_below) grad_p[kh - 1] += g * (-1.0 - o);
					if (tp.has_above) grad_p[kh + 1] += g * (1.0 - o);
				}
				touched = true;
			}
			if (grad_scores && touched) {
				softmax_backward(probs, grad_p, beta, grad_scores->pixel(i, j));
			}
		}
	});
	lb.dvr = sum_rows(dvr_rows) * sv;
	lb.ur = sum_rows(ur_rows) * su;
	lb.trr = sum_rows(trr_rows) * stt;
	lb.total = lb.dvr + lb.ur + lb.trr;
	if (structure_out) {
		*structure_out = fixed ? *fixed : std::move(local);
	}
	return lb;
}

namespace {

struct Transformed {
	features::FeatureMap normalized;
	Grid2D<double> norm;
};

Transformed transform_with_norms(const features::FeatureMap &fm, const features::FeatureTransform &t)
{
	if (t.n_in != fm.channels()) {
		fail(ErrorCode::DimensionMismatch, "transform input size does not match the features");
	}
	Transformed out{features::FeatureMap(fm.height(), fm.width(), t.n_out, fm.alpha()),
			Grid2D<double>(fm.height(), fm.width(), 0.0)};
	for (int i = 0; i < fm.height(); ++i) {
		for (int j = 0; j < fm.width(); ++j) {
			std::span<const double> v = fm.pixel(i, j);
			std::span<double> u = out.normalized.pixel(i, j);
			double ss = 0.0;
			for (int r = 0; r < t.n_out; ++r) {
				const double *row = t.matrix.data() + static_cast<std::size_t>(r) * t.n_in;
				double acc = t.bias[r];
				for (int c = 0; c < t.n_in; ++c) {
					acc += row[c] * v[c];
				}
				u[r] = acc;
				ss += acc * acc;
			}
			const double nrm = std::sqrt(ss);
			out.norm(i, j) = nrm;
			if (nrm > 0.0) {
				for (double &x : u) {
					x /= nrm;
				}
			}
		}
	}
	return out;
}

// Accumulates d(loss)/d(matrix, bias) from d(loss)/d(normalized features).
void transform_backward(const features::FeatureMap &source, const Transformed &tf,
		const std::vector<double> &grad_f, const features::FeatureTransform &t,
		TransformGradient &grad)
{
	const int n = t.n_out;
	std::vector<double> gu(n);
	for (int i = 0; i < source.height(); ++i) {
		for (int j = 0; j < source.width(); ++j) {
			const double nrm = tf.norm(i, j);
			if (nrm <= 0.0) {
				continue;
			}
			const std::span<const double> f = tf.normalized.pixel(i, j);
			const double *gf = grad_f.data() + (static_cast<std::size_t>(i) * source.width() + j) * n;
			double fg = 0.0;
			for (int r = 0; r < n; ++r) {
				fg += f[r] * gf[r];
			}
			bool any = false;
			for (int r = 0; r < n; ++r) {
				gu[r] = (gf[r] - f[r] * fg) / nrm;
				any = any || gu[r] != 0.0;
			}
			if (!any) {
				continue;
			}
			const std::span<const double> v = source.pixel(i, j);
			for (int r = 0; r < n; ++r) {
				double *grow = grad.matrix.data() + static_cast<std::size_t>(r) * t.n_in;
				for (int c = 0; c < t.n_in; ++c) {
					grow[c] += gu[r] * v[c];
				}
				grad.bias[r] += gu[r];
			}
		}
	}
}

}

LossBreakdown transform_objective(const TrainingSample &sample, const DisparityRange &range,
		const features::FeatureTransform &t, const ObjectiveOptions &opts,
		TransformGradient *grad, const Structure *fixed, Structure *structure_out)
{
	const Transformed left = transform_with_norms(sample.left, t);
	const Transformed right = transform_with_norms(sample.right, t);
	const matcher::CostVolume cv =
			matcher::build_cost_volume(left.normalized, right.normalized, range, opts.threads);
	const matcher::ProbabilityVolume pv = matcher::softmax_over_disparity(cv, opts.beta, opts.threads);
	if (!grad) {
		return evaluate_volume(pv, sample.gt, opts.beta, opts.subpixel, fixed, nullptr, structure_out);
	}
	matcher::Volume grad_scores(pv.height(), pv.width(), range, 0.0);
	const LossBreakdown lb = evaluate_volume(pv, sample.gt, opts.beta, opts.subpixel, fixed,
			&grad_scores, structure_out);

	const int h = pv.height();
	const int w = pv.width();
	const int n = t.n_out;
	std::vector<double> gl(static_cast<std::size_t>(h) * w * n, 0.0);
	std::vector<double> gr(static_cast<std::size_t>(h) * w * n, 0.0);
	// Left pixel (i, j) only touches right pixels of row i, so rows are independent.
	parallel_rows(h, opts.threads, [&](int i) {
		for (int j = 0; j < w; ++j) {
			const std::span<const double> gs = grad_scores.pixel(i, j);
			const std::span<const double> fl = left.normalized.pixel(i, j);
			double *gli = gl.data() + (static_cast<std::size_t>(i) * w + j) * n;
			for (int k = 0; k < range.count(); ++k) {
				if (gs[k] == 0.0) {
					continue;
				}
				const int jr = j - range.candidate(k);
				if (jr < 0 || jr >= w) {
					continue;
				}
				const std::span<const double> fr = right.normalized.pixel(i, jr);
				double *gri = gr.data() + (static_cast<std::size_t>(i) * w + jr) * n;
				for (int c = 0; c < n; ++c) {
					gli[c] += gs[k] * fr[c];
					gri[c] += gs[k] * fl[c];
				}
			}
		}
	});
	grad->matrix.assign(t.matrix.size(), 0.0);
	grad->bias.assign(t.bias.size(), 0.0);
	transform_backward(sample.left, left, gl, t, *grad);
	transform_backward(sample.right, right, gr, t, *grad);
	return lb;
}

TrainingResult train_feature_transform(const std::vector<TrainingSample> &samples,
		const DisparityRange &range, const features::FeatureTransform &init,
		const AdamConfig &config, const ObjectiveOptions &opts)
{
	if (samples.empty()) {
		fail(ErrorCode::InvalidArgument, "training needs at least one sample");
	}
	if (config.steps < 0 || config.lr < 0.0) {
		fail(ErrorCode::InvalidArgument, "steps and learning rate must be non-negative");
	}
	const std::size_t n_samples = samples.size();
	const std::size_t batch = (config.batch <= 0 || static_cast<std::size_t>(config.batch) >= n_samples)
			? n_samples : static_cast<std::size_t>(config.batch);

	std::vector<std::size_t> order(n_samples);
	std::iota(order.begin(), order.end(), 0);
	std::mt19937_64 rng(config.seed);
	std::size_t cursor = n_samples;

	TrainingResult result;
	result.transform = init;
	features::FeatureTransform &t = result.transform;
	const std::size_t n_m = t.matrix.size();
	std::vector<double> m1(t.parameter_count(), 0.0);
	std::vector<double> m2(t.parameter_count(), 0.0);

	auto next_batch = [&]() {
		std::vector<std::size_t> ids;
		if (batch == n_samples) {
			ids = order;
			return ids;
		}
		while (ids.size() < batch) {
			if (cursor == n_samples) {
				std::shuffle(order.begin(), order.end(), rng);
				cursor = 0;
			}
			ids.push_back(order[cursor++]);
		}
		return ids;
	};

	auto evaluate = [&](const std::vector<std::size_t> &ids, TransformGradient *g) {
		LossBreakdown mean;
		TransformGradient one;
		if (g) {
			g->matrix.assign(n_m, 0.0);
			g->bias.assign(t.bias.size(), 0.0);
		}
		for (std::size_t id : ids) {
			const LossBreakdown lb = transform_objective(samples[id], range, t, opts, g ? &one : nullptr);
			mean.dvr += lb.dvr;
			mean.ur += lb.ur;
			mean.trr += lb.trr;
			mean.n_v += lb.n_v;
			mean.n_u += lb.n_u;
			mean.n_t += lb.n_t;
			if (g) {
				for (std::size_t q = 0; q < n_m; ++q) g->matrix[q] += one.matrix[q];
				for (std::size_t q = 0; q < one.bias.size(); ++q) g->bias[q] += one.bias[q];
			}
		}
		const double inv = 1.0 / static_cast<double>(ids.size());
		mean.dvr *= inv;
		mean.ur *= inv;
		mean.trr *= inv;
		mean.total = mean.dvr + mean.ur + mean.trr;
		if (g) {
			for (double &x : g->matrix) x *= inv;
			for (double &x : g->bias) x *= inv;
		}
		return mean;
	};

	auto check_finite = [](const LossBreakdown &lb, int step) {
		if (!std::isfinite(lb.total)) {
			std::ostringstream msg;
			msg << "training diverged at step " << step << ": dvr=" << lb.dvr << " ur=" << lb.ur
				<< " trr=" << lb.trr;
			fail(ErrorCode::Numeric, msg.str());
		}
	};

	TransformGradient g;
	for (int step = 0; step < config.steps; ++step) {
		const LossBreakdown lb = evaluate(next_batch(), &g);
		check_finite(lb, step);
		result.history.push_back(lb);
		const double c1 = 1.0 - std::pow(config.beta1, step + 1);
		const double c2 = 1.0 - std::pow(config.beta2, step + 1);
		for (std::size_t q = 0; q < m1.size(); ++q) {
			const double gq = q < n_m ? g.matrix[q] : g.bias[q - n_m];
			m1[q] = config.beta1 * m1[q] + (1.0 - config.beta1) * gq;
			m2[q] = config.beta2 * m2[q] + (1.0 - config.beta2) * gq * gq;
			const double delta = config.lr * (m1[q] / c1) / (std::sqrt(m2[q] / c2) + config.eps);
			double &param = q < n_m ? t.matrix[q] : t.bias[q - n_m];
			param -= delta;
		}
	}
	std::vector<std::size_t> all(n_samples);
	std::iota(all.begin(), all.end(), 0);
	const LossBreakdown final_loss = evaluate(batch == n_samples ? all : next_batch(), nullptr);
	check_finite(final_loss, config.steps);
	result.history.push_back(final_loss);
	return result;
}

std::vector<double> smoothed_totals(const std::vector<LossBreakdown> &history, int window)
{
	std::vector<double> out(history.size());
	window = std::max(window, 1);
	double acc = 0.0;
	for (std::size_t s = 0; s < history.size(); ++s) {
		acc += history[s].total;
		if (s >= static_cast<std::size_t>(window)) {
			acc -= history[s - window].total;
		}
		out[s] = acc / static_cast<double>(std::min<std::size_t>(s + 1, window));
	}
	return out;
}

}
