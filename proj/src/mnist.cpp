#include "pbit/mnist.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "pbit/rng.hpp"

namespace pbit {

namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;

std::vector<unsigned char> read_file(const std::string &path)
{
	std::ifstream in(path, std::ios::binary);
	if (!in) {
		throw DataError("cannot open " + path);
	}
	return std::vector<unsigned char>(std::istreambuf_iterator<char>(in),
	                                  std::istreambuf_iterator<char>());
}

std::uint32_t read_be32(const std::vector<unsigned char> &buf,
                        std::size_t offset, const std::string &path)
{
	if (offset + 4 > buf.size()) {
		throw DataError("truncated IDX file " + path);
	}
	return (std::uint32_t(buf[offset]) << 24) |
	       (std::uint32_t(buf[offset + 1]) << 16) |
	       (std::uint32_t(buf[offset + 2]) << 8) |
	       std::uint32_t(buf[offset + 3]);
}

}  // namespace

Dataset Dataset::head(std::size_t n) const
{
	if (n == 0 || n >= size()) {
		return *this;
	}
	Dataset out;
	out.rows = rows;
	out.cols = cols;
	out.pixels.assign(pixels.begin(),
	                  pixels.begin() + n * pixels_per_image());
	out.labels.assign(labels.begin(), labels.begin() + n);
	return out;
}

Dataset load_idx(const std::string &images_path, const std::string &labels_path)
{
	const auto img = read_file(images_path);
	const auto lab = read_file(labels_path);

	if (read_be32(img, 0, images_path) != kImageMagic) {
		throw DataError("bad magic in image file " + images_path);
	}
	if (read_be32(lab, 0, labels_path) != kLabelMagic) {
		throw DataError("bad magic in label file " + labels_path);
	}

	const std::uint32_t n_images = read_be32(img, 4, images_path);
	const std::uint32_t rows = read_be32(img, 8, images_path);
	const std::uint32_t cols = read_be32(img, 12, images_path);
	const std::uint32_t n_labels = read_be32(lab, 4, labels_path);
	if (n_images != n_labels) {
		throw DataError("image/label count mismatch: " +
		                std::to_string(n_images) + " vs " +
		                std::to_string(n_labels));
	}

	const std::size_t want_img = 16 + std::size_t(n_images) * rows * cols;
	if (img.size() < want_img) {
		throw DataError("truncated IDX file " + images_path);
	}
	if (lab.size() < 8 + n_labels) {
		throw DataError("truncated IDX file " + labels_path);
	}

	Dataset data;
	data.rows = static_cast<int>(rows);
	data.cols = static_cast<int>(cols);
	data.pixels.resize(std::size_t(n_images) * rows * cols);
	for (std::size_t i = 0; i < data.pixels.size(); ++i) {
		data.pixels[i] = static_cast<float>(img[16 + i]) * (1.0f / 255.0f);
	}
	data.labels.assign(lab.begin() + 8, lab.begin() + 8 + n_labels);
	return data;
}

MnistSplits load_mnist(const std::string &dir)
{
	const std::filesystem::path base(dir);
	MnistSplits splits;
	splits.train = load_idx((base / "train-images-idx3-ubyte").string(),
	                        (base / "train-labels-idx1-ubyte").string());
	splits.test = load_idx((base / "t10k-images-idx3-ubyte").string(),
	                       (base / "t10k-labels-idx1-ubyte").string());
	return splits;
}

bool mnist_present(const std::string &dir)
{
	const std::filesystem::path base(dir);
	for (const char *name :
	     {"train-images-idx3-ubyte", "train-labels-idx1-ubyte",
	      "t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte"}) {
		std::error_code ec;
		if (!std::filesystem::exists(base / name, ec)) {
			return false;
		}
	}
	return true;
}

namespace {

// Seven-segment glyphs. Segment order: top, top-right, bottom-right,
// bottom, bottom-left, top-left, middle.
constexpr std::array<std::array<bool, 7>, 10> kSegments = {{
    {true, true, true, true, true, true, false},     // 0
    {false, true, true, false, false, false, false}, // 1
    {true, true, false, true, true, false, true},    // 2
    {true, true, true, true, false, false, true},    // 3
    {false, true, true, false, false, true, true},   // 4
    {true, false, true, true, false, true, true},    // 5
    {true, false, true, true, true, true, true},     // 6
    {true, true, true, false, false, false, false},  // 7
    {true, true, true, true, true, true, true},      // 8
    {true, true, true, true, false, true, true},     // 9
}};

struct Stroke {
	double x0, y0, x1, y1;
};

// Segment endpoints in a unit digit box (x in [0,1], y in [0,2]).
constexpr std::array<Stroke, 7> kStrokes = {{
    {0.0, 2.0, 1.0, 2.0},  // top
    {1.0, 2.0, 1.0, 1.0},  // top-right
    {1.0, 1.0, 1.0, 0.0},  // bottom-right
    {0.0, 0.0, 1.0, 0.0},  // bottom
    {0.0, 1.0, 0.0, 0.0},  // bottom-left
    {0.0, 2.0, 0.0, 1.0},  // top-left
    {0.0, 1.0, 1.0, 1.0},  // middle
}};

double segment_distance(double px, double py, const Stroke &s)
{
	const double dx = s.x1 - s.x0;
	const double dy = s.y1 - s.y0;
	const double len2 = dx * dx + dy * dy;
	double t = ((px - s.x0) * dx + (py - s.y0) * dy) / len2;
	t = std::clamp(t, 0.0, 1.0);
	const double cx = s.x0 + t * dx;
	const double cy = s.y0 + t * dy;
	return std::hypot(px - cx, py - cy);
}

}  // namespace

Dataset synthetic_digits(std::size_t n, std::uint64_t seed)
{
	Dataset data;
	data.pixels.resize(n * data.pixels_per_image());
	data.labels.resize(n);

	for (std::size_t i = 0; i < n; ++i) {
		Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
		const int label = static_cast<int>(rng.next() % 10);
		data.labels[i] = static_cast<std::uint8_t>(label);

		// Per-sample jitter: translation, scale, shear, stroke width.
		const double cx = 13.5 + rng.uniform(-2.5, 2.5);
		const double cy = 13.5 + rng.uniform(-2.5, 2.5);
		const double sx = 8.0 * (1.0 + rng.uniform(-0.15, 0.15));
		const double sy = 5.0 * (1.0 + rng.uniform(-0.15, 0.15));
		const double shear = rng.uniform(-0.15, 0.15);
		const double width = 1.1 + rng.uniform(-0.25, 0.35);

		float *img = data.pixels.data() + i * data.pixels_per_image();
		for (int y = 0; y < 28; ++y) {
			for (int x = 0; x < 28; ++x) {
				// Map the pixel back into the digit box.
				const double gy = (cy - y) / sy;           // y up, in [0,2]
				const double gx = (x - cx) / sx + 0.5 - shear * (gy - 1.0);
				double dist = 1e9;
				for (int s = 0; s < 7; ++s) {
					if (kSegments[label][s]) {
						dist = std::min(
						    dist, segment_distance(gx, gy, kStrokes[s]));
					}
				}
				// Scaled distance to intensity, plus pixel noise.
				const double d_px = dist * sy;
				double v = std::clamp(1.4 - d_px / width, 0.0, 1.0);
				v += 0.08 * rng.normal();
				img[y * 28 + x] = static_cast<float>(std::clamp(v, 0.0, 1.0));
			}
		}
	}
	return data;
}

}  // namespace pbit
