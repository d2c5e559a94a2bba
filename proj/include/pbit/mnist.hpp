#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pbit/errors.hpp"

namespace pbit {

// Labeled 28x28 grayscale images, pixels normalized to [0, 1].
struct Dataset {
	int rows = 28;
	int cols = 28;
	std::vector<float> pixels;  // size() * rows * cols, row-major per image
	std::vector<std::uint8_t> labels;

	std::size_t size() const { return labels.size(); }
	std::size_t pixels_per_image() const
	{
		return static_cast<std::size_t>(rows) * cols;
	}
	const float *image(std::size_t i) const
	{
		return pixels.data() + i * pixels_per_image();
	}

	// First n samples as a new dataset (n = 0 keeps everything).
	Dataset head(std::size_t n) const;
};

// Parses a big-endian IDX image/label file pair. Throws DataError on a bad
// magic number, truncation, or image/label count mismatch.
Dataset load_idx(const std::string &images_path, const std::string &labels_path);

struct MnistSplits {
	Dataset train;
	Dataset test;
};

// Loads the four canonical IDX files from a directory
// (train-images-idx3-ubyte, train-labels-idx1-ubyte, t10k-...).
MnistSplits load_mnist(const std::string &dir);

bool mnist_present(const std::string &dir);

// Deterministic stand-in dataset: jittered seven-segment digit glyphs with
// pixel noise. Same shape and value conventions as the IDX loader, for
// running the pipeline where the real dataset is not installed.
Dataset synthetic_digits(std::size_t n, std::uint64_t seed);

}  // namespace pbit
