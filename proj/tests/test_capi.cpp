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

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "stereopipe.h"

namespace fs = std::filesystem;

namespace {

std::string fresh_dir(const std::string &name)
{
	const fs::path p = fs::temp_directory_path() /
			("stereopipe-capi-" + name + "-" + std::to_string(std::random_device{}()));
	fs::remove_all(p);
	fs::create_directories(p);
	return p.string();
}

sp_config *small_config()
{
	sp_config *cfg = nullptr;
	REQUIRE(sp_config_create(&cfg) == SP_OK);
	REQUIRE(sp_config_set(cfg, "d_min", "-8") == SP_OK);
	REQUIRE(sp_config_set(cfg, "d_max", "8") == SP_OK);
	REQUIRE(sp_config_set(cfg, "threads", "1") == SP_OK);
	REQUIRE(sp_config_set(cfg, "completion.levels", "3") == SP_OK);
	return cfg;
}

}

TEST_CASE("status names and version")
{
	CHECK(std::string(sp_status_name(SP_OK)) == "ok");
	CHECK(std::string(sp_status_name(SP_ERR_DEGENERATE)) == "degenerate");
	CHECK(std::string(sp_version()) == "0.1.0");
}

TEST_CASE("config set, text and errors")
{
	sp_config *cfg = small_config();
	const char *text = nullptr;
	REQUIRE(sp_config_text(cfg, &text) == SP_OK);
	CHECK(std::string(text).find("d_min=-8\n") != std::string::npos);
	CHECK(sp_config_set(cfg, "unknown_key", "1") == SP_ERR_INVALID_ARGUMENT);
	CHECK(std::string(sp_last_error()).find("unknown_key") != std::string::npos);
	CHECK(sp_config_set(cfg, "tau", "abc") == SP_ERR_INVALID_ARGUMENT);
	REQUIRE(sp_config_set(cfg, "tau", "2.0") == SP_OK);
	std::vector<float> img(16 * 32, 50.0f);
	sp_result *res = nullptr;
	CHECK(sp_pipeline_run(cfg, img.data(), img.data(), 16, 32, 1, &res) == SP_ERR_INVALID_ARGUMENT);
	CHECK(res == nullptr);
	REQUIRE(sp_config_set(cfg, "tau", "0.3") == SP_OK);
	CHECK(sp_config_set(nullptr, "tau", "0.1") == SP_ERR_INVALID_ARGUMENT);
	CHECK(sp_config_create(nullptr) == SP_ERR_INVALID_ARGUMENT);

	const std::string dir = fresh_dir("cfg");
	REQUIRE(sp_config_save(cfg, (dir + "/c.txt").c_str()) == SP_OK);
	sp_config *other = nullptr;
	REQUIRE(sp_config_create(&other) == SP_OK);
	REQUIRE(sp_config_load(other, (dir + "/c.txt").c_str()) == SP_OK);
	const char *other_text = nullptr;
	sp_config_text(other, &other_text);
	sp_config_text(cfg, &text);
	CHECK(std::string(other_text) == std::string(text));
	CHECK(sp_config_load(other, (dir + "/missing.txt").c_str()) == SP_ERR_IO);
	sp_config_destroy(other);
	sp_config_destroy(cfg);
	fs::remove_all(dir);
}

TEST_CASE("scene generation and an in-memory run")
{
	const double layers[] = {-4.0, 5.0};
	sp_scene *scene = nullptr;
	REQUIRE(sp_scene_generate(3, "fronto_layers", 32, 64, -8, 8, 0.0, layers, 2, &scene) == SP_OK);
	int h = 0;
	int w = 0;
	REQUIRE(sp_scene_size(scene, &h, &w) == SP_OK);
	CHECK(h == 32);
	CHECK(w == 64);
	std::vector<float> gt(static_cast<std::size_t>(h) * w);
	REQUIRE(sp_scene_gt_left(scene, gt.data()) == SP_OK);
	CHECK((gt[0] == -4.0f || gt[0] == 5.0f));

	const std::string dir = fresh_dir("scene");
	REQUIRE(sp_scene_save(scene, dir.c_str()) == SP_OK);
	sp_scene *loaded = nullptr;
	REQUIRE(sp_scene_load(dir.c_str(), &loaded) == SP_OK);
	std::vector<float> gt2(gt.size());
	sp_scene_gt_left(loaded, gt2.data());
	CHECK(gt2 == gt);
	sp_scene_destroy(loaded);

	sp_config *cfg = small_config();
	sp_result *res = nullptr;
	const std::string out = dir + "/run";
	REQUIRE(sp_pipeline_run_files(cfg, (dir + "/left.png").c_str(), (dir + "/right.png").c_str(),
			out.c_str(), &res) == SP_OK);
	CHECK(fs::exists(out + "/disp.pfm"));
	int rh = 0;
	int rw = 0;
	sp_result_size(res, &rh, &rw);
	CHECK(rh == 32);
	std::vector<float> fin(static_cast<std::size_t>(rh) * rw);
	std::vector<float> semi(fin.size());
	REQUIRE(sp_result_final(res, fin.data()) == SP_OK);
	REQUIRE(sp_result_semi(res, semi.data()) == SP_OK);
	std::size_t close = 0;
	for (std::size_t k = 0; k < fin.size(); ++k) {
		CHECK(std::isfinite(fin[k]));
		close += std::abs(fin[k] - gt[k]) <= 1.0f;
	}
	CHECK(close >= fin.size() * 9 / 10);
	sp_result_destroy(res);

	std::vector<float> flat(32 * 64, 100.0f);
	CHECK(sp_pipeline_run(cfg, flat.data(), flat.data(), 32, 64, 2, &res) == SP_ERR_INVALID_ARGUMENT);
	CHECK(sp_pipeline_run_files(cfg, "/nonexistent/l.png", "/nonexistent/r.png",
			(dir + "/nothing").c_str(), &res) == SP_ERR_IO);
	CHECK_FALSE(fs::exists(dir + "/nothing"));
	CHECK(sp_scene_generate(1, "spiral", 32, 64, 0, 8, 0.0, nullptr, 0, &scene) == SP_ERR_INVALID_ARGUMENT);

	sp_config_destroy(cfg);
	sp_scene_destroy(scene);
	fs::remove_all(dir);
}

TEST_CASE("sweep, evaluation and training tables")
{
	const std::string dir = fresh_dir("tables");
	const double layers[] = {0.0, 6.0};
	std::vector<std::string> dirs;
	for (int k = 0; k < 2; ++k) {
		sp_scene *s = nullptr;
		REQUIRE(sp_scene_generate(10 + k, "fronto_layers", 32, 64, 0, 16, 0.0, layers, 2, &s) == SP_OK);
		dirs.push_back(dir + "/s" + std::to_string(k));
		REQUIRE(sp_scene_save(s, dirs.back().c_str()) == SP_OK);
		sp_scene_destroy(s);
	}
	const char *paths[] = {dirs[0].c_str(), dirs[1].c_str()};
	sp_config *cfg = small_config();
	sp_config_set(cfg, "d_min", "0");
	sp_config_set(cfg, "d_max", "16");

	const double taus[] = {0.0, 0.5, 1.0};
	sp_table *t = nullptr;
	REQUIRE(sp_sweep_tau(cfg, paths, 2, taus, 3, SP_LR_BOTH, &t) == SP_OK);
	CHECK(sp_table_rows(t) == 6);
	CHECK(std::string(sp_table_header(t, 0)) == "tau");
	CHECK(sp_table_cell(t, 99, 0) == nullptr);
	CHECK(std::string(sp_table_csv(t)).rfind("tau,", 0) == 0);
	REQUIRE(sp_table_write_csv(t, (dir + "/sweep.csv").c_str()) == SP_OK);
	CHECK(fs::exists(dir + "/sweep.csv"));
	sp_table_destroy(t);

	REQUIRE(sp_eval_dirs((dirs[0] + "/gt").c_str(), (dirs[0] + "/gt").c_str(), "pfm", &t) == SP_OK);
	CHECK(sp_table_rows(t) == 2);
	CHECK(std::stod(sp_table_cell(t, 0, 3)) == 0.0);
	sp_table_destroy(t);
	CHECK(sp_eval_dirs(dir.c_str(), (dirs[0] + "/gt").c_str(), "pfm", &t) == SP_ERR_INVALID_ARGUMENT);
	CHECK(sp_eval_dirs(dir.c_str(), dir.c_str(), "tiff", &t) == SP_ERR_INVALID_ARGUMENT);

	const std::string transform = dir + "/t.txt";
	REQUIRE(sp_train_feature_transform(cfg, paths, 2, 0.01, 2, 0, 1, transform.c_str(), &t) == SP_OK);
	CHECK(fs::exists(transform));
	CHECK(sp_table_rows(t) == 3);
	sp_table_destroy(t);
	CHECK(sp_train_feature_transform(cfg, paths, 0, 0.01, 2, 0, 1, transform.c_str(), nullptr) ==
			SP_ERR_INVALID_ARGUMENT);

	REQUIRE(sp_config_set(cfg, "transform", transform.c_str()) == SP_OK);
	sp_result *res = nullptr;
	CHECK(sp_pipeline_run_files(cfg, (dirs[0] + "/left.png").c_str(), (dirs[0] + "/right.png").c_str(),
			(dir + "/trained").c_str(), &res) == SP_OK);
	sp_result_destroy(res);
	sp_config_destroy(cfg);
	fs::remove_all(dir);
}
