#include <doctest.h>

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <vector>

#include "pbit/mnist.hpp"

using namespace pbit;

TEST_SUITE_BEGIN("mnist");

namespace {

void append_be32(std::vector<unsigned char> &buf, std::uint32_t value)
{
	buf.push_back(static_cast<unsigned char>(value >> 24));
	buf.push_back(static_cast<unsigned char>(value >> 16));
	buf.push_back(static_cast<unsigned char>(value >> 8));
	buf.push_back(static_cast<unsigned char>(value));
}

std::string write_temp(const std::string &name,
                       const std::vector<unsigned char> &bytes)
{
	const auto path =
	    (std::filesystem::temp_directory_path() / name).string();
	std::ofstream out(path, std::ios::binary);
	out.write(reinterpret_cast<const char *>(bytes.data()),
	          std::streamsize(bytes.size()));
	return path;
}

// A two-image 2x3 fixture built byte by byte.
struct Fixture {
	std::string images;
	std::string labels;
	std::array<unsigned char, 12> pixel_bytes{};
};

Fixture make_fixture()
{
	Fixture fx;
	std::vector<unsigned char> img;
	append_be32(img, 0x00000803);
	append_be32(img, 2);  // images
	append_be32(img, 2);  // rows
	append_be32(img, 3);  // cols
	for (int i = 0; i < 12; ++i) {
		fx.pixel_bytes[i] = static_cast<unsigned char>(20 * i + 3);
		img.push_back(fx.pixel_bytes[i]);
	}
	std::vector<unsigned char> lab;
	append_be32(lab, 0x00000801);
	append_be32(lab, 2);
	lab.push_back(7);
	lab.push_back(0);
	fx.images = write_temp("pbit_fixture_images", img);
	fx.labels = write_temp("pbit_fixture_labels", lab);
	return fx;
}

}  // namespace

TEST_CASE("IDX fixture round-trips exactly")
{
	const Fixture fx = make_fixture();
	const Dataset data = load_idx(fx.images, fx.labels);

	REQUIRE(data.size() == 2);
	CHECK(data.rows == 2);
	CHECK(data.cols == 3);
	REQUIRE(data.pixels.size() == 12);
	for (int i = 0; i < 12; ++i) {
		CHECK(data.pixels[i] ==
		      doctest::Approx(fx.pixel_bytes[i] / 255.0f).epsilon(1e-7));
	}
	CHECK(data.labels[0] == 7);
	CHECK(data.labels[1] == 0);
}

TEST_CASE("IDX error handling")
{
	const Fixture fx = make_fixture();

	SUBCASE("missing file")
	{
		CHECK_THROWS_AS(load_idx("/nonexistent/images", fx.labels), DataError);
	}

	SUBCASE("empty image file is reported as truncated")
	{
		const auto path = write_temp("pbit_fixture_empty", {});
		CHECK_THROWS_WITH_AS(load_idx(path, fx.labels),
		                     doctest::Contains("truncated"), DataError);
	}

	SUBCASE("bad magic numbers")
	{
		std::vector<unsigned char> img;
		append_be32(img, 0x00000802);
		append_be32(img, 0);
		append_be32(img, 0);
		append_be32(img, 0);
		const auto path = write_temp("pbit_fixture_badmagic", img);
		CHECK_THROWS_WITH_AS(load_idx(path, fx.labels),
		                     doctest::Contains("magic"), DataError);
		// Labels with the image magic are also rejected.
		CHECK_THROWS_AS(load_idx(fx.images, fx.images), DataError);
	}

	SUBCASE("count mismatch")
	{
		std::vector<unsigned char> lab;
		append_be32(lab, 0x00000801);
		append_be32(lab, 3);
		lab.push_back(1);
		lab.push_back(2);
		lab.push_back(3);
		const auto path = write_temp("pbit_fixture_mismatch", lab);
		CHECK_THROWS_WITH_AS(load_idx(fx.images, path),
		                     doctest::Contains("mismatch"), DataError);
	}

	SUBCASE("truncated pixel payload")
	{
		std::vector<unsigned char> img;
		append_be32(img, 0x00000803);
		append_be32(img, 2);
		append_be32(img, 2);
		append_be32(img, 3);
		img.push_back(1);  // far too few pixel bytes
		const auto path = write_temp("pbit_fixture_short", img);
		CHECK_THROWS_WITH_AS(load_idx(path, fx.labels),
		                     doctest::Contains("truncated"), DataError);
	}
}

TEST_CASE("missing dataset directory is a data error")
{
	CHECK(!mnist_present("/nonexistent/dir"));
	CHECK_THROWS_AS(load_mnist("/nonexistent/dir"), DataError);
}

TEST_CASE("synthetic digits")
{
	const Dataset a = synthetic_digits(500, 42);
	const Dataset b = synthetic_digits(500, 42);

	REQUIRE(a.size() == 500);
	CHECK(a.rows == 28);
	CHECK(a.cols == 28);
	CHECK(a.pixels == b.pixels);  // deterministic
	CHECK(a.labels == b.labels);

	std::array<int, 10> histogram{};
	for (auto label : a.labels) {
		REQUIRE(label < 10);
		histogram[label]++;
	}
	for (int count : histogram) {
		CHECK(count > 20);  // roughly balanced classes
	}
	for (float p : a.pixels) {
		CHECK(p >= 0.0f);
		CHECK(p <= 1.0f);
	}

	// Different seeds give different data.
	const Dataset c = synthetic_digits(500, 43);
	CHECK(a.pixels != c.pixels);

	// head() takes a prefix.
	const Dataset h = a.head(10);
	CHECK(h.size() == 10);
	CHECK(std::equal(h.pixels.begin(), h.pixels.end(), a.pixels.begin()));
}

TEST_SUITE_END();
