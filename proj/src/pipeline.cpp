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

#include "stereopipe/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "stereopipe/filter.hpp"
#include "stereopipe/io.hpp"
#include "stereopipe/metrics.hpp"

namespace stereopipe::pipeline {

namespace fs = std::filesystem;

namespace {

std::string format_double(double v)
{
	if (std::isnan(v)) {
		return "nan";
	}
	std::ostringstream os;
	os << std::setprecision(17) << v;
	return os.str();
}

std::string format_fixed(double v, int digits)
{
	if (std::isnan(v)) {
		return "nan";
	}
	std::ostringstream os;
	os << std::fixed << std::setprecision(digits) << v;
	return os.str();
}

bool parse_bool(const std::string &key, const std::string &v)
{
	if (v == "1" || v == "true" || v == "on" || v == "yes") return true;
	if (v == "0" || v == "false" || v == "off" || v == "no") return false;
	fail(ErrorCode::InvalidArgument, "config key '" + key + "': expected a boolean, got '" + v + "'");
}

template <typename T>
T parse_number(const std::string &key, const std::string &v)
{
	std::istringstream is(v);
	T out{};
	is >> out;
	if (!is || !(is >> std::ws).eof()) {
		fail(ErrorCode::InvalidArgument, "config key '" + key + "': cannot parse '" + v + "'");
	}
	return out;
}

std::string trim(const std::string &s)
{
	const auto b = s.find_first_not_of(" \t\r");
	if (b == std::string::npos) {
		return {};
	}
	const auto e = s.find_last_not_of(" \t\r");
	return s.substr(b, e - b + 1);
}

template <typename F>
auto timed_stage(const char *name, std::vector<StageTiming> &timings, F &&fn)
{
	const auto t0 = std::chrono::steady_clock::now();
	try {
		auto out = fn();
		const auto t1 = std::chrono::steady_clock::now();
		timings.push_back({name, std::chrono::duration<double>(t1 - t0).count()});
		return out;
	} catch (const Error &e) {
		throw Error(e.code(), std::string(name) + ": " + e.what());
	}
}

struct FeaturePair {
	features::FeatureMap left;
	features::FeatureMap right;
};

FeaturePair compute_features(const Image &left, const Image &right, const PipelineConfig &cfg,
		int threads)
{
	FeaturePair fp;
	if (cfg.features == FeatureSource::Files) {
		fp.left = features::load_feature_tensor(cfg.left_feat);
		fp.right = features::load_feature_tensor(cfg.right_feat);
		if (!fp.left.same_layout(fp.right)) {
			fail(ErrorCode::DimensionMismatch, "left and right feature files differ in layout");
		}
		const int f = fp.left.alpha().factor();
		if (fp.left.height() != (left.height() + f - 1) / f ||
				fp.left.width() != (left.width() + f - 1) / f) {
			fail(ErrorCode::DimensionMismatch, "feature files do not match the image size at their scale");
		}
	} else {
		const features::CensusWindow window{cfg.census_height, cfg.census_width};
		const Scale alpha = Scale::from_factor(cfg.feature_factor);
		fp.left = features::extract_census_gradient(left, window, alpha, threads);
		fp.right = features::extract_census_gradient(right, window, alpha, threads);
	}
	if (!cfg.transform.empty()) {
		const features::FeatureTransform t = features::load_transform(cfg.transform);
		fp.left = features::apply_transform(fp.left, t);
		fp.right = features::apply_transform(fp.right, t);
	}
	return fp;
}

struct Estimates {
	matcher::MapEstimate left;
	matcher::MapEstimate right;
	bool has_right = false;
};

Estimates compute_estimates(const FeaturePair &fp, const PipelineConfig &cfg, int threads,
		bool with_right)
{
	const DisparityRange range(cfg.d_min, cfg.d_max, fp.left.alpha());
	const matcher::MatchOptions opts{cfg.beta, cfg.subpixel, threads};
	Estimates est;
	est.left = matcher::estimate_disparity(fp.left, fp.right, range, opts);
	if (with_right) {
		est.right = matcher::estimate_right_view(fp.left, fp.right, range, opts);
		est.has_right = true;
	}
	return est;
}

DisparityField semi_dense(const Estimates &est, double tau, bool lr_check)
{
	DisparityField semi = filter::reliability_filter(est.left, tau);
	if (lr_check) {
		semi = filter::lr_consistency_filter(semi, est.right.init);
	}
	return semi;
}

DisparityField upsample_semi(const DisparityField &semi, int factor, int h, int w,
		const completion::CompletionConfig &cc)
{
	return crop(upsample_disparity(semi, factor, cc.upsample_max_spread), h, w);
}

void check_images(const Image &left, const Image &right)
{
	if (left.height() == 0 || left.width() == 0) {
		fail(ErrorCode::InvalidArgument, "left image is empty");
	}
	if (left.height() != right.height() || left.width() != right.width()) {
		fail(ErrorCode::DimensionMismatch, "left and right images differ in size");
	}
}

}

int resolve_threads(int threads)
{
	if (threads < 0) {
		fail(ErrorCode::InvalidArgument, "thread count must be non-negative");
	}
	return threads == 0 ? default_thread_count() : threads;
}

void validate(const PipelineConfig &cfg)
{
	if (cfg.d_min > cfg.d_max) {
		fail(ErrorCode::Range, "d_min (" + std::to_string(cfg.d_min) + ") exceeds d_max (" +
				std::to_string(cfg.d_max) + ")");
	}
	if (!(cfg.tau >= 0.0 && cfg.tau <= 1.0)) {
		fail(ErrorCode::InvalidArgument, "tau must lie in [0, 1]");
	}
	if (!(cfg.beta > 0.0) || !std::isfinite(cfg.beta)) {
		fail(ErrorCode::InvalidArgument, "beta must be positive and finite");
	}
	if (cfg.features == FeatureSource::Files) {
		if (cfg.left_feat.empty() || cfg.right_feat.empty()) {
			fail(ErrorCode::InvalidArgument, "feature files need both left and right paths");
		}
	} else {
		Scale::from_factor(cfg.feature_factor);
		if (cfg.census_height < 1 || cfg.census_width < 1 || cfg.census_height % 2 == 0 ||
				cfg.census_width % 2 == 0) {
			fail(ErrorCode::InvalidArgument, "census window sides must be odd and positive");
		}
	}
	if (cfg.threads < 0) {
		fail(ErrorCode::InvalidArgument, "thread count must be non-negative");
	}
	completion::validate(cfg.completion);
	DisparityRange(cfg.d_min, cfg.d_max, Scale::from_factor(
			cfg.features == FeatureSource::Census ? cfg.feature_factor : 1));
}

std::string config_to_text(const PipelineConfig &cfg)
{
	const completion::CompletionConfig &c = cfg.completion;
	std::ostringstream os;
	os << "d_min=" << cfg.d_min << '\n'
	   << "d_max=" << cfg.d_max << '\n'
	   << "tau=" << format_double(cfg.tau) << '\n'
	   << "lr_check=" << (cfg.lr_check ? 1 : 0) << '\n'
	   << "subpixel=" << (cfg.subpixel ? 1 : 0) << '\n'
	   << "beta=" << format_double(cfg.beta) << '\n'
	   << "features=" << (cfg.features == FeatureSource::Census ? "census" : "files") << '\n'
	   << "left_feat=" << cfg.left_feat << '\n'
	   << "right_feat=" << cfg.right_feat << '\n'
	   << "transform=" << cfg.transform << '\n'
	   << "feature_factor=" << cfg.feature_factor << '\n'
	   << "census_height=" << cfg.census_height << '\n'
	   << "census_width=" << cfg.census_width << '\n'
	   << "completion.levels=" << c.levels << '\n'
	   << "completion.iterations_per_level=" << c.iterations_per_level << '\n'
	   << "completion.color_sigma=" << format_double(c.color_sigma) << '\n'
	   << "completion.spatial_radius=" << c.spatial_radius << '\n'
	   << "completion.reliability_floor=" << format_double(c.reliability_floor) << '\n'
	   << "completion.tolerance=" << format_double(c.tolerance) << '\n'
	   << "completion.max_final_iterations=" << c.max_final_iterations << '\n'
	   << "completion.upsample_max_spread=" << format_double(c.upsample_max_spread) << '\n'
	   << "threads=" << cfg.threads << '\n'
	   << "seed=" << cfg.seed << '\n';
	return os.str();
}

PipelineConfig config_from_text(const std::string &text, PipelineConfig cfg)
{
	std::istringstream is(text);
	std::string line;
	int lineno = 0;
	while (std::getline(is, line)) {
		++lineno;
		const auto hash = line.find('#');
		if (hash != std::string::npos) {
			line.erase(hash);
		}
		line = trim(line);
		if (line.empty()) {
			continue;
		}
		const auto eq = line.find('=');
		if (eq == std::string::npos) {
			fail(ErrorCode::InvalidArgument, "config line " + std::to_string(lineno) +
					": expected key=value");
		}
		const std::string key = trim(line.substr(0, eq));
		const std::string v = trim(line.substr(eq + 1));
		completion::CompletionConfig &c = cfg.completion;
		if (key == "d_min") cfg.d_min = parse_number<int>(key, v);
		else if (key == "d_max") cfg.d_max = parse_number<int>(key, v);
		else if (key == "tau") cfg.tau = parse_number<double>(key, v);
		else if (key == "lr_check") cfg.lr_check = parse_bool(key, v);
		else if (key == "subpixel") cfg.subpixel = parse_bool(key, v);
		else if (key == "beta") cfg.beta = parse_number<double>(key, v);
		else if (key == "features") {
			if (v == "census") cfg.features = FeatureSource::Census;
			else if (v == "files") cfg.features = FeatureSource::Files;
			else fail(ErrorCode::InvalidArgument, "config key 'features': expected census or files");
		}
		else if (key == "left_feat") cfg.left_feat = v;
		else if (key == "right_feat") cfg.right_feat = v;
		else if (key == "transform") cfg.transform = v;
		else if (key == "feature_factor") cfg.feature_factor = parse_number<int>(key, v);
		else if (key == "census_height") cfg.census_height = parse_number<int>(key, v);
		else if (key == "census_width") cfg.census_width = parse_number<int>(key, v);
		else if (key == "completion.levels") c.levels = parse_number<int>(key, v);
		else if (key == "completion.iterations_per_level") c.iterations_per_level = parse_number<int>(key, v);
		else if (key == "completion.color_sigma") c.color_sigma = parse_number<double>(key, v);
		else if (key == "completion.spatial_radius") c.spatial_radius = parse_number<int>(key, v);
		else if (key == "completion.reliability_floor") c.reliability_floor = parse_number<double>(key, v);
		else if (key == "completion.tolerance") c.tolerance = parse_number<double>(key, v);
		else if (key == "completion.max_final_iterations") c.max_final_iterations = parse_number<int>(key, v);
		else if (key == "completion.upsample_max_spread") c.upsample_max_spread = parse_number<double>(key, v);
		else if (key == "threads") cfg.threads = parse_number<int>(key, v);
		else if (key == "seed") cfg.seed = parse_number<std::uint64_t>(key, v);
		else fail(ErrorCode::InvalidArgument, "unknown config key '" + key + "'");
	}
	return cfg;
}

PipelineConfig load_config(const std::string &path, PipelineConfig base)
{
	std::ifstream is(path);
	if (!is) {
		fail(ErrorCode::Io, "cannot open config " + path);
	}
	std::ostringstream ss;
	ss << is.rdbuf();
	return config_from_text(ss.str(), std::move(base));
}

void save_config(const PipelineConfig &cfg, const std::string &path)
{
	std::ofstream os(path);
	os << config_to_text(cfg);
	if (!os) {
		fail(ErrorCode::Io, "cannot write config " + path);
	}
}

PipelineResult run_pipeline(const Image &left, const Image &right, const PipelineConfig &cfg)
{
	validate(cfg);
	check_images(left, right);
	PipelineResult res;
	res.threads = resolve_threads(cfg.threads);
	const int threads = res.threads;
	const int h = left.height();
	const int w = left.width();

	const FeaturePair fp = timed_stage("features", res.timings, [&] {
		return compute_features(left, right, cfg, threads);
	});
	res.factor = fp.left.alpha().factor();
	const DisparityRange range(cfg.d_min, cfg.d_max, fp.left.alpha());
	res.streaming_bytes = matcher::streaming_bytes(fp.left.width(), range, threads);
	res.materialized_bytes = matcher::materialized_bytes(fp.left.height(), fp.left.width(), range);

	Estimates est = timed_stage("matcher", res.timings, [&] {
		return compute_estimates(fp, cfg, threads, cfg.lr_check);
	});
	res.semi_feature = timed_stage("filter", res.timings, [&] {
		return semi_dense(est, cfg.tau, cfg.lr_check);
	});
	res.semi = timed_stage("upsample", res.timings, [&] {
		return upsample_semi(res.semi_feature, res.factor, h, w, cfg.completion);
	});
	res.init_full = crop(upsample_disparity(est.left.init, res.factor), h, w);
	res.reliability_full = upsample_grid(est.left.reliability, res.factor);
	{
		Grid2D<double> cropped(h, w);
		for (int i = 0; i < h; ++i) {
			for (int j = 0; j < w; ++j) {
				cropped(i, j) = res.reliability_full(i, j);
			}
		}
		res.reliability_full = std::move(cropped);
	}
	completion::CompletionConfig cc = cfg.completion;
	cc.threads = threads;
	res.final = timed_stage("completion", res.timings, [&] {
		return completion::complete(res.semi_feature, est.left.init, est.left.reliability, left, cc)
				.final;
	});
	res.left = std::move(est.left);
	return res;
}

std::array<std::uint8_t, 3> turbo(double t)
{
	t = std::clamp(std::isnan(t) ? 0.0 : t, 0.0, 1.0);
	const double r = 0.13572138 + t * (4.61539260 + t * (-42.66032258 + t * (132.13108234 +
			t * (-152.94239396 + t * 59.28637943))));
	const double g = 0.09140261 + t * (2.19418839 + t * (4.84296658 + t * (-14.18503333 +
			t * (4.27729857 + t * 2.82956604))));
	const double b = 0.10667330 + t * (12.64194608 + t * (-60.58204836 + t * (110.36276771 +
			t * (-89.90310912 + t * 27.34824973))));
	auto to8 = [](double v) {
		return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
	};
	return {to8(r), to8(g), to8(b)};
}

Image colorize(const DisparityField &field, double d_min, double d_max)
{
	Image img(field.height(), field.width(), 3, 0.0f);
	const double span = d_max > d_min ? d_max - d_min : 1.0;
	for (int i = 0; i < field.height(); ++i) {
		for (int j = 0; j < field.width(); ++j) {
			if (!field.valid(i, j)) {
				continue;
			}
			const auto rgb = turbo((field(i, j) - d_min) / span);
			for (int c = 0; c < 3; ++c) {
				img(i, j, c) = rgb[c];
			}
		}
	}
	return img;
}

void write_outputs(const PipelineResult &result, const PipelineConfig &cfg, const std::string &dir)
{
	std::error_code ec;
	fs::create_directories(dir, ec);
	if (ec) {
		fail(ErrorCode::Io, "cannot create output directory " + dir + ": " + ec.message());
	}
	const fs::path root(dir);
	std::vector<std::string> notes = result.notes;

	evalio::write_pfm(result.final, (root / "disp.pfm").string());
	evalio::write_pfm(result.semi, (root / "semi.pfm").string());
	if (evalio::kitti_representable(result.final)) {
		evalio::write_kitti_png(result.final, (root / "disp.png").string());
	} else {
		notes.push_back("disp.png skipped: values outside the KITTI 16-bit range (0, 256)");
	}
	evalio::write_image(colorize(result.final, cfg.d_min, cfg.d_max),
			(root / "disp_color.png").string());
	{
		std::ofstream os(root / "disp_color.txt");
		const double span = cfg.d_max > cfg.d_min ? cfg.d_max - cfg.d_min : 1.0;
		os << "colormap=turbo\n"
		   << "blue=" << cfg.d_min << '\n'
		   << "red=" << cfg.d_max << '\n';
		if (cfg.d_min <= 0 && cfg.d_max >= 0) {
			os << "zero_at=" << format_fixed(-cfg.d_min / span, 6) << '\n';
		} else {
			os << "zero_at=none\n";
		}
		if (!os) {
			fail(ErrorCode::Io, "cannot write colormap sidecar in " + dir);
		}
	}
	{
		const Grid2D<double> &r = result.reliability_full;
		Image img(r.height(), r.width(), 1);
		for (int i = 0; i < r.height(); ++i) {
			for (int j = 0; j < r.width(); ++j) {
				img(i, j) = static_cast<float>(std::clamp(r(i, j), 0.0, 1.0) * 255.0);
			}
		}
		evalio::write_image(img, (root / "reliability.png").string());
	}
	save_config(cfg, (root / "config.txt").string());

	nlohmann::ordered_json j;
	double total = 0.0;
	j["stages"] = nlohmann::ordered_json::array();
	for (const StageTiming &t : result.timings) {
		j["stages"].push_back({{"stage", t.stage}, {"seconds", t.seconds}});
		total += t.seconds;
	}
	j["total_seconds"] = total;
	j["threads"] = result.threads;
	j["memory"] = {
		{"cost_volume_streaming_bytes", result.streaming_bytes},
		{"cost_volume_materialized_bytes", result.materialized_bytes},
	};
	j["semi_dense_valid"] = result.semi.count_valid();
	j["pixels"] = static_cast<std::size_t>(result.final.height()) * result.final.width();
	j["notes"] = notes;
	std::ofstream os(root / "timing.json");
	os << j.dump(2) << '\n';
	if (!os) {
		fail(ErrorCode::Io, "cannot write timing.json in " + dir);
	}
}

PipelineResult run_files(const std::string &left_path, const std::string &right_path,
		const PipelineConfig &cfg, const std::string &out_dir)
{
	validate(cfg);
	Image left;
	Image right;
	try {
		left = evalio::read_image(left_path);
		right = evalio::read_image(right_path);
		check_images(left, right);
	} catch (const Error &e) {
		throw Error(e.code(), std::string("input: ") + e.what());
	}
	PipelineResult res = run_pipeline(left, right, cfg);
	try {
		write_outputs(res, cfg, out_dir);
	} catch (const Error &e) {
		throw Error(e.code(), std::string("output: ") + e.what());
	}
	return res;
}

std::string Table::to_csv() const
{
	std::ostringstream os;
	auto line = [&](const std::vector<std::string> &cells) {
		for (std::size_t k = 0; k < cells.size(); ++k) {
			os << (k ? "," : "") << cells[k];
		}
		os << '\n';
	};
	line(header);
	for (const auto &r : rows) {
		line(r);
	}
	return os.str();
}

std::string Table::to_text() const
{
	std::vector<std::size_t> width(header.size(), 0);
	auto grow = [&](const std::vector<std::string> &cells) {
		for (std::size_t k = 0; k < cells.size() && k < width.size(); ++k) {
			width[k] = std::max(width[k], cells[k].size());
		}
	};
	grow(header);
	for (const auto &r : rows) {
		grow(r);
	}
	std::ostringstream os;
	auto line = [&](const std::vector<std::string> &cells) {
		for (std::size_t k = 0; k < cells.size(); ++k) {
			if (k) {
				os << "  ";
			}
			os << std::setw(static_cast<int>(k < width.size() ? width[k] : 0))
			   << (k == 0 ? std::left : std::right) << cells[k];
		}
		os << '\n';
	};
	line(header);
	for (const auto &r : rows) {
		line(r);
	}
	return os.str();
}

std::vector<SweepRow> sweep_tau(const std::vector<evalio::SyntheticScene> &scenes,
		const SweepOptions &opts, const PipelineConfig &cfg)
{
	validate(cfg);
	if (scenes.empty()) {
		fail(ErrorCode::InvalidArgument, "sweep needs at least one scene");
	}
	if (opts.taus.empty() || opts.lr_modes.empty()) {
		fail(ErrorCode::InvalidArgument, "sweep needs at least one tau and one lr mode");
	}
	for (double tau : opts.taus) {
		if (!(tau >= 0.0 && tau <= 1.0)) {
			fail(ErrorCode::InvalidArgument, "tau must lie in [0, 1]");
		}
	}
	const int threads = resolve_threads(cfg.threads);
	completion::CompletionConfig cc = cfg.completion;
	cc.threads = threads;

	const bool need_right = std::find(opts.lr_modes.begin(), opts.lr_modes.end(), true) !=
			opts.lr_modes.end();
	std::vector<SweepRow> rows;
	for (bool lr : opts.lr_modes) {
		for (double tau : opts.taus) {
			SweepRow row;
			row.tau = tau;
			row.lr_check = lr;
			rows.push_back(row);
		}
	}
	for (const evalio::SyntheticScene &sc : scenes) {
		check_images(sc.left, sc.right);
		const FeaturePair fp = compute_features(sc.left, sc.right, cfg, threads);
		const int f = fp.left.alpha().factor();
		const Estimates est = compute_estimates(fp, cfg, threads, need_right);
		const int h = sc.left.height();
		const int w = sc.left.width();
		for (SweepRow &row : rows) {
			const DisparityField semi_f = semi_dense(est, row.tau, row.lr_check);
			const DisparityField semi = upsample_semi(semi_f, f, h, w, cc);
			const evalio::SemiDenseReport sd = evalio::evaluate_semi_dense(semi, sc.gt_left, 1.0);
			row.density += sd.density;
			row.semi_bad1 += sd.bad;
			if (!opts.run_completion || row.degenerate) {
				continue;
			}
			try {
				const DisparityField fin =
						completion::complete(semi_f, est.left.init, est.left.reliability, sc.left, cc).final;
				const evalio::MetricReport m = evalio::evaluate(fin, sc.gt_left);
				row.d1_all += m.d1_all;
				row.bad2 += m.bad2;
				row.epe += m.epe;
			} catch (const Error &e) {
				if (e.code() != ErrorCode::Degenerate) {
					throw;
				}
				row.degenerate = true;
			}
		}
	}
	const double n = static_cast<double>(scenes.size());
	const double nan = std::numeric_limits<double>::quiet_NaN();
	for (SweepRow &row : rows) {
		row.density /= n;
		row.semi_bad1 /= n;
		if (row.degenerate || !opts.run_completion) {
			row.d1_all = row.bad2 = row.epe = nan;
		} else {
			row.d1_all /= n;
			row.bad2 /= n;
			row.epe /= n;
		}
	}
	return rows;
}

Table sweep_table(const std::vector<SweepRow> &rows)
{
	Table t;
	t.header = {"tau", "lr_check", "density(%)", "semi_bad1.0(%)", "D1_all(%)", "bad2.0(%)",
			"EPE(px)", "degenerate"};
	for (const SweepRow &r : rows) {
		t.rows.push_back({format_fixed(r.tau, 3), r.lr_check ? "on" : "off",
				format_fixed(r.density, 4), format_fixed(r.semi_bad1, 4),
				format_fixed(r.d1_all, 4), format_fixed(r.bad2, 4), format_fixed(r.epe, 4),
				r.degenerate ? "1" : "0"});
	}
	return t;
}

EvalFormat parse_eval_format(const std::string &name)
{
	if (name == "pfm") return EvalFormat::Pfm;
	if (name == "kitti" || name == "png") return EvalFormat::Kitti;
	fail(ErrorCode::InvalidArgument, "unknown format '" + name + "' (expected pfm or kitti)");
}

namespace {

bool ends_with(const std::string &s, const std::string &suffix)
{
	return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}

Table eval_dirs(const std::string &pred_dir, const std::string &gt_dir, EvalFormat format)
{
	const std::string ext = format == EvalFormat::Pfm ? ".pfm" : ".png";
	for (const std::string &d : {pred_dir, gt_dir}) {
		if (!fs::is_directory(d)) {
			fail(ErrorCode::Io, d + " is not a directory");
		}
	}
	std::vector<std::string> names;
	for (const auto &entry : fs::directory_iterator(gt_dir)) {
		const std::string name = entry.path().filename().string();
		if (entry.is_regular_file() && ends_with(name, ext) && !ends_with(name, ".noc.png")) {
			names.push_back(name);
		}
	}
	std::sort(names.begin(), names.end());
	if (names.empty()) {
		fail(ErrorCode::InvalidArgument, "no ground-truth " + ext + " files in " + gt_dir);
	}
	std::vector<std::string> missing;
	for (const std::string &n : names) {
		if (!fs::is_regular_file(fs::path(pred_dir) / n)) {
			missing.push_back(n);
		}
	}
	if (!missing.empty()) {
		std::string msg = "prediction directory lacks";
		for (const std::string &n : missing) {
			msg += " " + n;
		}
		fail(ErrorCode::InvalidArgument, msg);
	}

	auto read = [&](const fs::path &p) {
		return format == EvalFormat::Pfm ? evalio::read_pfm(p.string())
		                                 : evalio::read_kitti_png(p.string());
	};
	Table t;
	t.header = {"image", "D1_all(%)", "bad2.0(%)", "EPE(px)", "density(%)", "D1_noc(%)",
			"bad2.0_noc(%)", "EPE_noc(px)"};
	std::array<double, 7> sums{};
	std::array<std::size_t, 2> counts{};
	for (const std::string &n : names) {
		const DisparityField gt = read(fs::path(gt_dir) / n);
		const DisparityField pred = read(fs::path(pred_dir) / n);
		const evalio::MetricReport all = evalio::evaluate(pred, gt);
		std::vector<std::string> row{n, format_fixed(all.d1_all, 4), format_fixed(all.bad2, 4),
				format_fixed(all.epe, 4), format_fixed(all.density, 4)};
		if (!all.empty()) {
			sums[0] += all.d1_all;
			sums[1] += all.bad2;
			sums[2] += all.epe;
			sums[3] += all.density;
			++counts[0];
		}
		const fs::path mask_path = fs::path(gt_dir) / (n.substr(0, n.size() - ext.size()) + ".noc.png");
		if (fs::is_regular_file(mask_path)) {
			const Grid2D<std::uint8_t> mask = evalio::read_mask_png(mask_path.string());
			const evalio::MetricReport noc = evalio::evaluate(pred, gt, &mask);
			row.push_back(format_fixed(noc.d1_all, 4));
			row.push_back(format_fixed(noc.bad2, 4));
			row.push_back(format_fixed(noc.epe, 4));
			if (!noc.empty()) {
				sums[4] += noc.d1_all;
				sums[5] += noc.bad2;
				sums[6] += noc.epe;
				++counts[1];
			}
		} else {
			row.insert(row.end(), {"-", "-", "-"});
		}
		t.rows.push_back(std::move(row));
	}
	std::vector<std::string> mean{"mean"};
	for (int k = 0; k < 4; ++k) {
		mean.push_back(counts[0] ? format_fixed(sums[k] / counts[0], 4) : "-");
	}
	for (int k = 4; k < 7; ++k) {
		mean.push_back(counts[1] ? format_fixed(sums[k] / counts[1], 4) : "-");
	}
	t.rows.push_back(std::move(mean));
	return t;
}

losses::TrainingSample make_training_sample(const evalio::SyntheticScene &scene,
		const PipelineConfig &cfg)
{
	PipelineConfig census = cfg;
	census.features = FeatureSource::Census;
	census.transform.clear();
	const FeaturePair fp = compute_features(scene.left, scene.right, census,
			resolve_threads(cfg.threads));
	losses::TrainingSample s;
	s.left = fp.left;
	s.right = fp.right;
	s.gt = downsample_disparity(scene.gt_left, fp.left.alpha().factor(), 1.0);
	return s;
}

TrainFromScenes train_from_scenes(const std::vector<evalio::SyntheticScene> &scenes,
		const losses::AdamConfig &adam, const PipelineConfig &cfg, int smooth_window)
{
	validate(cfg);
	if (scenes.empty()) {
		fail(ErrorCode::InvalidArgument, "training needs at least one scene");
	}
	std::vector<losses::TrainingSample> samples;
	for (const evalio::SyntheticScene &sc : scenes) {
		samples.push_back(make_training_sample(sc, cfg));
	}
	const DisparityRange range(cfg.d_min, cfg.d_max, samples.front().left.alpha());
	const losses::ObjectiveOptions opts{cfg.beta, cfg.subpixel, resolve_threads(cfg.threads)};
	TrainFromScenes out;
	out.result = losses::train_feature_transform(samples, range,
			features::FeatureTransform::identity(samples.front().left.channels()), adam, opts);
	out.smoothed = losses::smoothed_totals(out.result.history, smooth_window);
	return out;
}

Table loss_history_table(const TrainFromScenes &run)
{
	Table t;
	t.header = {"step", "dvr", "ur", "trr", "total", "smoothed_total"};
	for (std::size_t k = 0; k < run.result.history.size(); ++k) {
		const losses::LossBreakdown &b = run.result.history[k];
		t.rows.push_back({std::to_string(k), format_double(b.dvr), format_double(b.ur),
				format_double(b.trr), format_double(b.total),
				k < run.smoothed.size() ? format_double(run.smoothed[k]) : "nan"});
	}
	return t;
}

}
