#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "pbit/device.hpp"
#include "pbit/mitigation.hpp"
#include "pbit/mnist.hpp"
#include "pbit/variation.hpp"

// Deep belief network whose non-input neurons are p-bits. Training is
// offline and ideal (software sigmoids, greedy CD-1 pretraining plus a
// logistic readout); only inference runs on the simulated devices.

namespace pbit {

struct Matrix {
	int rows = 0;
	int cols = 0;
	std::vector<float> data;  // row-major

	static Matrix zeros(int r, int c)
	{
		return Matrix{r, c, std::vector<float>(std::size_t(r) * c, 0.0f)};
	}
	float *row(int r) { return data.data() + std::size_t(r) * cols; }
	const float *row(int r) const { return data.data() + std::size_t(r) * cols; }
};

struct DbnLayer {
	Matrix weight;            // out x in
	std::vector<float> bias;  // out
};

struct TrainHyper {
	float learning_rate = 0.1f;
	int cd_epochs = 15;
	int readout_epochs = 60;
	int batch = 64;
	// Optional gain applied to each pretrained hidden layer before the
	// readout is trained; > 1 drives hidden units toward saturation, which
	// trades analog feature information for noise immunity of the sampled
	// window fractions.
	float hidden_gain = 1.0f;
	std::uint64_t seed = 1;
};

struct DbnModel {
	std::vector<int> topology;     // e.g. {784, 200, 10}
	std::vector<DbnLayer> layers;  // topology.size() - 1 entries
	// Long-run duty cycle of each non-input neuron over the training set,
	// in layer order. Inference draws the initial magnetization of each
	// device from this marginal: the state a device is left in by earlier
	// activity, independent of the image being presented.
	std::vector<float> duty_cycles;
	TrainHyper meta;

	std::size_t pbit_count() const
	{
		std::size_t n = 0;
		for (std::size_t l = 1; l < topology.size(); ++l) {
			n += static_cast<std::size_t>(topology[l]);
		}
		return n;
	}
	void validate() const;
};

// Greedy layer-wise pretraining with 1-step contrastive divergence for the
// hidden stack, then a softmax readout for the top pair trained by
// gradient descent on the (deterministic) hidden probabilities.
// Deterministic given the seed. Throws DataError on divergent training.
DbnModel train_cd1(const Dataset &train, const std::vector<int> &topology,
                   const TrainHyper &hyper);

// Versioned little-endian binary model file; round-trips exactly.
void save_model(const DbnModel &model, const std::string &path);
DbnModel load_model(const std::string &path);

// Input voltage encoding a pre-activation: vdd/2 + v_slope * a, clamped to
// the supply rails. Composed with the device activation this realizes
// logistic(a) until the clamp engages.
double activation_voltage(const PbitParams &params, double pre_activation);

struct InferenceConfig {
	const DevicePopulation *population = nullptr;  // one device per p-bit
	SamplingPolicy policy{2.0, 0.0};
	std::vector<double> rf_kohm;  // optional per-device feedback (empty = none)
	int votes = 1;

	void validate(const DbnModel &model) const;
};

struct Prediction {
	int digit = 0;
	std::array<double, 10> scores{};  // mean output-layer window fractions
};

// Stochastic feed-forward pass. Every non-input neuron runs its own
// device over one sampling window per vote and feeds forward the analog
// window fraction (the time average the next layer's resistive coupling
// integrates); output fractions accumulate across votes. Every device's
// magnetization persists across layers and votes within the call, seeded
// per (image) and evolved per (layer, neuron, vote) counters, so results
// are schedule-independent.
Prediction infer_stochastic(const DbnModel &model, const float *image,
                            const InferenceConfig &cfg, std::uint64_t seed);

struct EvalResult {
	double error_rate = 0.0;
	std::size_t count = 0;
	std::array<std::array<std::uint32_t, 10>, 10> confusion{};  // [true][pred]
};

// Error rate over a dataset, parallel over images, reproducible bit-for-bit
// from the seed regardless of thread count.
EvalResult evaluate(const DbnModel &model, const Dataset &data,
                    const InferenceConfig &cfg, std::uint64_t seed);

// Deterministic ideal-sigmoid forward pass (analog activations all the way
// through), the reference the stochastic network is compared against.
int infer_ideal(const DbnModel &model, const float *image);
EvalResult evaluate_ideal(const DbnModel &model, const Dataset &data);

}  // namespace pbit
