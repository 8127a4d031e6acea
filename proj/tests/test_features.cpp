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

#include <cstring>
#include <filesystem>
#include <fstream>

#include "stereopipe/features.hpp"
#include "support/oracles.hpp"

using namespace stereopipe;
using namespace stereopipe::features;

namespace {

ErrorCode load_code(const std::string &path)
{
	try {
		load_feature_tensor(path);
	} catch (const Error &e) {
		return e.code();
	}
	FAIL("expected an error");
	return ErrorCode::InvalidArgument;
}

void write_bytes(const std::string &path, const std::vector<std::uint32_t> &words,
		const char *magic = "FMAP", std::size_t extra_floats = 0)
{
	std::ofstream os(path, std::ios::binary);
	os.write(magic, 4);
	for (std::uint32_t w : words) {
		os.write(reinterpret_cast<const char *>(&w), 4);
	}
	const float zero = 0.0f;
	for (std::size_t k = 0; k < extra_floats; ++k) {
		os.write(reinterpret_cast<const char *>(&zero), 4);
	}
}

}

TEST_CASE("default window gives 64 channels")
{
	CHECK(census_gradient_channels(CensusWindow{}) == 64);
	CHECK(census_gradient_channels(CensusWindow{3, 3}) == 10);
}

TEST_CASE("census signs and gradients on a hand image")
{
	Image img(3, 3, 1);
	const float px[9] = {90, 100, 110, 100, 100, 120, 80, 130, 100};
	std::memcpy(img.data().data(), px, sizeof px);
	const FeatureMap fm = extract_census_gradient(img, CensusWindow{3, 3}, Scale{});
	REQUIRE(fm.channels() == 10);
	// Neighbors of (1,1) in raster order: 90 100 110 / 100 . 120 / 80 130 100.
	const double raw[10] = {1, 0, -1, 0, -1, 1, -1, 0,
			kGradientScale * 0.5 * (120 - 100), kGradientScale * 0.5 * (130 - 100)};
	double norm = 0.0;
	for (double v : raw) {
		norm += v * v;
	}
	norm = std::sqrt(norm);
	const auto v = fm.pixel(1, 1);
	for (int k = 0; k < 10; ++k) {
		CHECK(v[k] == doctest::Approx(raw[k] / norm).epsilon(1e-12));
	}
}

TEST_CASE("descriptors are unit length and pooled to scale")
{
	oracle::Gen gen(5);
	const Image img = gen.image(21, 30, 3);
	for (int f : {1, 2, 4}) {
		const FeatureMap fm = extract_census_gradient(img, CensusWindow{3, 5}, Scale::from_factor(f));
		CHECK(fm.height() == (21 + f - 1) / f);
		CHECK(fm.width() == (30 + f - 1) / f);
		CHECK(fm.alpha() == Scale::from_factor(f));
		for (int i = 0; i < fm.height(); ++i) {
			for (int j = 0; j < fm.width(); ++j) {
				double ss = 0.0;
				for (double x : fm.pixel(i, j)) {
					ss += x * x;
				}
				// A flat neighbourhood yields the zero vector and stays zero.
				CHECK((ss == doctest::Approx(1.0).epsilon(1e-12) || ss == 0.0));
			}
		}
	}
}

TEST_CASE("extraction is independent of the thread count")
{
	oracle::Gen gen(9);
	const Image img = gen.image(40, 50, 1);
	const FeatureMap a = extract_census_gradient(img, CensusWindow{}, Scale::from_factor(2), 1);
	const FeatureMap b = extract_census_gradient(img, CensusWindow{}, Scale::from_factor(2), 5);
	CHECK(a.data() == b.data());
}

TEST_CASE("average pooling clamps at the border")
{
	Grid2D<double> g(3, 3);
	for (int i = 0; i < 3; ++i) {
		for (int j = 0; j < 3; ++j) {
			g(i, j) = i * 3 + j;
		}
	}
	const Grid2D<double> p = average_pool(g, 2);
	REQUIRE(p.height() == 2);
	CHECK(p(0, 0) == (0 + 1 + 3 + 4) / 4.0);
	CHECK(p(1, 1) == 8.0);
	CHECK(p(0, 1) == (2 + 2 + 5 + 5) / 4.0);
}

TEST_CASE("extraction errors")
{
	Image img(10, 10, 1, 5.0f);
	CHECK_THROWS_AS(extract_census_gradient(img, CensusWindow{4, 3}, Scale{}), Error);
	CHECK_THROWS_AS(extract_census_gradient(img, CensusWindow{11, 3}, Scale{}), Error);
	CHECK_THROWS_AS(extract_census_gradient(img, CensusWindow{7, 9}, Scale::from_factor(2)), Error);
	CHECK_THROWS_AS(extract_census_gradient(Image(0, 0, 1), CensusWindow{}, Scale{}), Error);
	img(3, 3) = std::nanf("");
	CHECK_THROWS_AS(extract_census_gradient(img, CensusWindow{3, 3}, Scale{}), Error);
}

TEST_CASE("transform application")
{
	oracle::Gen gen(13);
	const FeatureMap fm = gen.features(3, 4, 5);
	const FeatureMap same = apply_transform(fm, FeatureTransform::identity(5));
	for (std::size_t k = 0; k < fm.data().size(); ++k) {
		CHECK(same.data()[k] == doctest::Approx(fm.data()[k]).epsilon(1e-14));
	}

	FeatureTransform t;
	t.n_out = 2;
	t.n_in = 5;
	t.matrix = {1, 0, 0, 0, 0, 0, 0, 0, 0, 0};
	t.bias = {0, 3};
	const FeatureMap out = apply_transform(fm, t);
	CHECK(out.channels() == 2);
	const auto v = out.pixel(1, 2);
	const double a = fm.pixel(1, 2)[0];
	CHECK(v[0] == doctest::Approx(a / std::sqrt(a * a + 9.0)));
	CHECK(v[1] == doctest::Approx(3.0 / std::sqrt(a * a + 9.0)));

	t.n_in = 4;
	CHECK_THROWS_AS(apply_transform(fm, t), Error);
}

TEST_CASE("FMAP round trip")
{
	const std::string dir = oracle::temp_dir("fmap");
	oracle::Gen gen(17);
	FeatureMap fm = gen.features(6, 7, 3, Scale::from_factor(4));
	for (double &x : fm.data()) {
		x = static_cast<float>(x);
	}
	const std::string path = dir + "/f.fmap";
	save_feature_tensor(fm, path);
	CHECK(std::filesystem::file_size(path) == 4 + 6 * 4 + 6 * 7 * 3 * 4);
	const FeatureMap back = load_feature_tensor(path);
	CHECK(back.same_layout(fm));
	CHECK(back.data() == fm.data());
	std::filesystem::remove_all(dir);
}

TEST_CASE("FMAP header errors")
{
	const std::string dir = oracle::temp_dir("fmap-err");
	const std::string p = dir + "/x.fmap";

	write_bytes(p, {1, 2, 2, 1, 1, 1}, "FMAQ", 4);
	CHECK(load_code(p) == ErrorCode::BadMagic);

	write_bytes(p, {1, 2, 2});
	CHECK(load_code(p) == ErrorCode::Truncated);

	write_bytes(p, {1, 2, 2, 1, 1, 1}, "FMAP", 3);
	CHECK(load_code(p) == ErrorCode::Truncated);

	write_bytes(p, {1, 65536, 65536, 64, 1, 1});
	CHECK(load_code(p) == ErrorCode::DimOverflow);

	write_bytes(p, {2, 2, 2, 1, 1, 1}, "FMAP", 4);
	CHECK(load_code(p) == ErrorCode::BadHeader);

	write_bytes(p, {1, 2, 2, 1, 1, 3}, "FMAP", 4);
	CHECK(load_code(p) == ErrorCode::BadHeader);

	write_bytes(p, {1, 2, 2, 0, 1, 1});
	CHECK(load_code(p) == ErrorCode::BadHeader);

	CHECK(load_code(dir + "/missing.fmap") == ErrorCode::Io);
	std::filesystem::remove_all(dir);
}

TEST_CASE("transform file round trip")
{
	const std::string dir = oracle::temp_dir("transform");
	oracle::Gen gen(19);
	FeatureTransform t;
	t.n_out = 3;
	t.n_in = 4;
	for (int k = 0; k < 12; ++k) {
		t.matrix.push_back(gen.normal());
	}
	t.bias = {gen.normal(), gen.normal(), gen.normal()};
	save_transform(t, dir + "/t.txt");
	const FeatureTransform back = load_transform(dir + "/t.txt");
	CHECK(back.n_out == 3);
	CHECK(back.n_in == 4);
	CHECK(back.matrix == t.matrix);
	CHECK(back.bias == t.bias);
	std::filesystem::remove_all(dir);
}
