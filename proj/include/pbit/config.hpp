#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pbit/device.hpp"
#include "pbit/errors.hpp"
#include "pbit/mitigation.hpp"
#include "pbit/variation.hpp"

// Experiment configuration: a sectioned key-value text file carrying every
// calibration constant that affects reported numbers. Unknown sections or
// keys are rejected so typos cannot silently fall back to defaults.

namespace pbit {

struct TraceConfig {
	std::vector<double> eb_kt{0.5, 1.0, 1.5, 2.0};
	std::vector<double> rf_kohm{kNoFeedback, 100.0};
	double duration_ns = 200.0;
};

struct SigmoidConfig {
	int points = 41;
	int repeats = 24;
	double duration_tau = 500.0;  // per-repeat trace length, in units of tau
};

struct TuningConfig {
	double rms_tolerance = 0.0374;
	double window_cap_ns = 1e4;
	int ensembles = 160;
	std::vector<double> eb_grid_kt{0.0, 0.5, 1.0, 1.5, 2.0};
};

struct EnergyConfig {
	PowerModel power{};
	std::vector<double> rf_table_kohm{30.0, 60.0, 100.0, 120.0};
	double compensation_target_kt = 0.0;
	std::vector<double> tolerance_levels_kt{0.0, 0.5, 1.0, 1.5, 2.0};
};

struct DbnConfig {
	int hidden = 100;
	int train_images = 10000;
	int test_images = 1000;
	int cd_epochs = 15;
	int readout_epochs = 40;
	double learning_rate = 0.1;
	double hidden_gain = 1.0;
	int batch = 64;
	int votes = 1;
	std::vector<double> knee_levels_kt{0.0, 0.5, 1.0, 1.5, 1.75, 2.0};
	std::string model_path = "pbit_dbn.model";

	std::vector<int> topology() const { return {784, hidden, 10}; }
};

enum class DatasetSource { Auto, Mnist, Synthetic };

struct DatasetConfig {
	DatasetSource source = DatasetSource::Auto;
	std::string dir;  // empty: use the PBIT_MNIST_DIR environment variable
};

struct ExperimentConfig {
	std::uint64_t seed = 1;
	bool full_scale = false;

	PbitParams device{};
	SamplingPolicy baseline_policy{2.0, 0.6};
	SweepSpec sweep{};
	TuningConfig tuning{};
	TraceConfig trace{};
	SigmoidConfig sigmoid{};
	EnergyConfig energy{};
	VariationSpec variation{};
	DbnConfig dbn{};
	DatasetConfig dataset{};

	std::string raw_text;
	std::uint64_t config_hash = 0;

	// Desk-scale vs full-scale experiment dimensions.
	std::vector<int> dbn_topology() const;
	int dbn_train_images() const;
	int dbn_test_images() const;

	void validate() const;
};

// FNV-1a 64-bit, used to stamp outputs with the configuration they came from.
std::uint64_t fnv1a64(const std::string &text);

// Parses configuration text; throws ConfigError on syntax errors, unknown
// sections/keys, or invalid values.
ExperimentConfig parse_config(const std::string &text);
ExperimentConfig load_config_file(const std::string &path);

// VariationSpec round-trips through its config sections.
std::string variation_to_ini(const VariationSpec &spec);

}  // namespace pbit
