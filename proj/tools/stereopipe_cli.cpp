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

#include <cstdio>
#include <cstdlib>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stereopipe.h"

namespace {

struct ConfigFlags {
	std::string config_path;
	std::optional<int> dmin;
	std::optional<int> dmax;
	std::optional<double> tau;
	std::optional<double> beta;
	bool no_lr_check = false;
	bool no_subpixel = false;
	std::string features;
	std::string left_feat;
	std::string right_feat;
	std::string transform;
	std::optional<unsigned long long> seed;
	std::optional<int> threads;

	void add_to(CLI::App *app, bool with_tau, bool with_features)
	{
		app->add_option("--config", config_path, "key=value config file (flags override it)");
		app->add_option("--dmin", dmin, "minimum disparity (signed, full-resolution px)");
		app->add_option("--dmax", dmax, "maximum disparity (signed, full-resolution px)");
		if (with_tau) {
			app->add_option("--tau", tau, "reliability threshold in [0, 1]");
		}
		app->add_option("--beta", beta, "softmax inverse temperature");
		app->add_flag("--no-lr-check", no_lr_check, "disable the left-right consistency check");
		app->add_flag("--no-subpixel", no_subpixel, "disable the sub-pixel offset");
		if (with_features) {
			app->add_option("--features", features, "feature source: census");
			app->add_option("--left-feat", left_feat, "left FMAP feature file");
			app->add_option("--right-feat", right_feat, "right FMAP feature file");
		}
		app->add_option("--transform", transform, "learned feature transform file");
		app->add_option("--seed", seed, "run seed");
		app->add_option("--threads", threads, "worker threads (0: STEREOPIPE_THREADS or all cores)");
	}
};

class Config {
public:
	Config()
	{
		check(sp_config_create(&m_cfg));
	}
	~Config() { sp_config_destroy(m_cfg); }
	Config(const Config &) = delete;
	Config &operator=(const Config &) = delete;

	sp_config *get() { return m_cfg; }

	void set(const char *key, const std::string &value) { check(sp_config_set(m_cfg, key, value.c_str())); }

	void apply(const ConfigFlags &f)
	{
		if (!f.config_path.empty()) {
			check(sp_config_load(m_cfg, f.config_path.c_str()));
		}
		if (f.dmin) set("d_min", std::to_string(*f.dmin));
		if (f.dmax) set("d_max", std::to_string(*f.dmax));
		if (f.tau) set("tau", to_text(*f.tau));
		if (f.beta) set("beta", to_text(*f.beta));
		if (f.no_lr_check) set("lr_check", "0");
		if (f.no_subpixel) set("subpixel", "0");
		if (!f.features.empty()) {
			if (f.features != "census") {
				fail(SP_ERR_INVALID_ARGUMENT, "--features accepts only 'census'; use --left-feat/--right-feat for files");
			}
			set("features", "census");
		}
		if (!f.left_feat.empty() || !f.right_feat.empty()) {
			set("features", "files");
			set("left_feat", f.left_feat);
			set("right_feat", f.right_feat);
		}
		if (!f.transform.empty()) set("transform", f.transform);
		if (f.seed) set("seed", std::to_string(*f.seed));
		if (f.threads) set("threads", std::to_string(*f.threads));
	}

	struct Failure {
		sp_status status;
		std::string message;
	};

	static void check(sp_status s)
	{
		if (s != SP_OK) {
			throw Failure{s, sp_last_error()};
		}
	}

	[[noreturn]] static void fail(sp_status s, const std::string &msg) { throw Failure{s, msg}; }

private:
	static std::string to_text(double v)
	{
		std::ostringstream os;
		os.precision(17);
		os << v;
		return os.str();
	}

	sp_config *m_cfg = nullptr;
};

class TableHandle {
public:
	~TableHandle() { sp_table_destroy(t); }
	sp_table *t = nullptr;
};

std::vector<double> parse_taus(const std::string &text)
{
	std::vector<double> out;
	std::stringstream ss(text);
	std::string tok;
	while (std::getline(ss, tok, ',')) {
		try {
			std::size_t used = 0;
			out.push_back(std::stod(tok, &used));
			if (used != tok.size()) {
				throw std::invalid_argument(tok);
			}
		} catch (const std::exception &) {
			Config::fail(SP_ERR_INVALID_ARGUMENT, "cannot parse tau '" + tok + "'");
		}
	}
	return out;
}

std::vector<const char *> c_strings(const std::vector<std::string> &v)
{
	std::vector<const char *> out;
	for (const std::string &s : v) {
		out.push_back(s.c_str());
	}
	return out;
}

}

int main(int argc, char **argv)
{
	CLI::App app{"stereopipe: stereo matching with a signed disparity search range"};
	app.require_subcommand(1);
	app.set_version_flag("--version", std::string(sp_version()));

	ConfigFlags pipe_flags;
	std::string left_path;
	std::string right_path;
	std::string out_dir;
	CLI::App *pipe = app.add_subcommand("pipeline", "run the full pipeline on a rectified pair");
	pipe->add_option("left", left_path, "left image (PNG/PGM/PPM)")->required();
	pipe->add_option("right", right_path, "right image (PNG/PGM/PPM)")->required();
	pipe->add_option("--out", out_dir, "output directory")->required();
	pipe_flags.add_to(pipe, true, true);

	ConfigFlags sweep_flags;
	std::vector<std::string> sweep_scenes;
	std::string sweep_taus = "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1";
	std::string sweep_lr = "both";
	std::string sweep_out;
	CLI::App *sweep = app.add_subcommand("sweep-tau", "reliability-threshold ablation over scene directories");
	sweep->add_option("--scenes", sweep_scenes, "scene directories (from gen-synth)")->required();
	sweep->add_option("--taus", sweep_taus, "comma-separated thresholds");
	sweep->add_option("--lr", sweep_lr, "left-right check: on, off or both")
			->check(CLI::IsMember({"on", "off", "both"}));
	sweep->add_option("--out", sweep_out, "CSV output path");
	sweep_flags.add_to(sweep, false, false);

	std::string eval_pred;
	std::string eval_gt;
	std::string eval_format = "pfm";
	std::string eval_out;
	CLI::App *eval = app.add_subcommand("eval", "compare prediction and ground-truth directories");
	eval->add_option("--pred", eval_pred, "prediction directory")->required();
	eval->add_option("--gt", eval_gt, "ground-truth directory")->required();
	eval->add_option("--format", eval_format, "pfm or kitti")->check(CLI::IsMember({"pfm", "kitti"}));
	eval->add_option("--out", eval_out, "CSV output path");

	unsigned long long gen_seed = 0;
	std::string gen_layout = "fronto_layers";
	std::string gen_out;
	int gen_h = 128;
	int gen_w = 256;
	int gen_dmin = 0;
	int gen_dmax = 32;
	double gen_noise = 0.0;
	std::vector<double> gen_layers;
	CLI::App *gen = app.add_subcommand("gen-synth", "render a synthetic scene with ground truth");
	gen->add_option("--seed", gen_seed, "scene seed");
	gen->add_option("--layout", gen_layout, "fronto_layers, slanted or negative_range")
			->check(CLI::IsMember({"fronto_layers", "slanted", "negative_range"}));
	gen->add_option("--out", gen_out, "scene directory")->required();
	gen->add_option("--height", gen_h, "image height");
	gen->add_option("--width", gen_w, "image width");
	gen->add_option("--dmin", gen_dmin, "minimum disparity");
	gen->add_option("--dmax", gen_dmax, "maximum disparity");
	gen->add_option("--noise", gen_noise, "Gaussian noise std-dev (8-bit units)");
	gen->add_option("--layers", gen_layers, "layer disparities, background first")->delimiter(',');

	ConfigFlags train_flags;
	std::vector<std::string> train_scenes;
	double train_lr = 0.01;
	int train_steps = 200;
	int train_batch = 0;
	unsigned long long train_seed = 0;
	std::string train_out;
	std::string train_history;
	CLI::App *train = app.add_subcommand("train-feat", "fit a feature transform on scene directories");
	train->add_option("--scenes", train_scenes, "scene directories (from gen-synth)")->required();
	train->add_option("--lr", train_lr, "Adam learning rate");
	train->add_option("--steps", train_steps, "Adam steps");
	train->add_option("--batch", train_batch, "scenes per step (0: all)");
	train->add_option("--train-seed", train_seed, "minibatch sampling seed");
	train->add_option("--out", train_out, "transform output file")->required();
	train->add_option("--history", train_history, "loss history CSV");
	train_flags.add_to(train, false, false);

	CLI11_PARSE(app, argc, argv);

	try {
		if (*pipe) {
			Config cfg;
			cfg.apply(pipe_flags);
			sp_result *res = nullptr;
			Config::check(sp_pipeline_run_files(cfg.get(), left_path.c_str(), right_path.c_str(),
					out_dir.c_str(), &res));
			int h = 0;
			int w = 0;
			sp_result_size(res, &h, &w);
			sp_result_destroy(res);
			std::printf("wrote %dx%d disparity to %s\n", w, h, out_dir.c_str());
		} else if (*sweep) {
			Config cfg;
			cfg.apply(sweep_flags);
			const std::vector<double> taus = parse_taus(sweep_taus);
			const auto dirs = c_strings(sweep_scenes);
			const sp_lr_mode mode = sweep_lr == "on" ? SP_LR_ON : sweep_lr == "off" ? SP_LR_OFF : SP_LR_BOTH;
			TableHandle t;
			Config::check(sp_sweep_tau(cfg.get(), dirs.data(), dirs.size(), taus.data(), taus.size(),
					mode, &t.t));
			std::fputs(sp_table_text(t.t), stdout);
			if (!sweep_out.empty()) {
				Config::check(sp_table_write_csv(t.t, sweep_out.c_str()));
			}
		} else if (*eval) {
			TableHandle t;
			Config::check(sp_eval_dirs(eval_pred.c_str(), eval_gt.c_str(), eval_format.c_str(), &t.t));
			std::fputs(sp_table_text(t.t), stdout);
			if (!eval_out.empty()) {
				Config::check(sp_table_write_csv(t.t, eval_out.c_str()));
			}
		} else if (*gen) {
			sp_scene *scene = nullptr;
			Config::check(sp_scene_generate(gen_seed, gen_layout.c_str(), gen_h, gen_w, gen_dmin,
					gen_dmax, gen_noise, gen_layers.data(), gen_layers.size(), &scene));
			const sp_status s = sp_scene_save(scene, gen_out.c_str());
			sp_scene_destroy(scene);
			Config::check(s);
			std::printf("wrote %s scene to %s\n", gen_layout.c_str(), gen_out.c_str());
		} else if (*train) {
			Config cfg;
			cfg.apply(train_flags);
			const auto dirs = c_strings(train_scenes);
			TableHandle t;
			Config::check(sp_train_feature_transform(cfg.get(), dirs.data(), dirs.size(), train_lr,
					train_steps, train_batch, train_seed, train_out.c_str(), &t.t));
			if (!train_history.empty()) {
				Config::check(sp_table_write_csv(t.t, train_history.c_str()));
			}
			const std::size_t rows = sp_table_rows(t.t);
			if (rows > 0) {
				std::printf("smoothed total loss: %s -> %s\n", sp_table_cell(t.t, 0, 5),
						sp_table_cell(t.t, rows - 1, 5));
			}
		}
	} catch (const Config::Failure &f) {
		std::fprintf(stderr, "error (%s): %s\n", sp_status_name(f.status), f.message.c_str());
		return static_cast<int>(f.status);
	}
	return 0;
}
