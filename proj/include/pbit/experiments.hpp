#pragma once

#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "pbit/config.hpp"
#include "pbit/dbn.hpp"

// Experiment commands. Each renders one reproducible CSV artifact from a
// configuration; the CLI is a thin shell around these.

namespace pbit {

struct ResolvedDataset {
	Dataset train;
	Dataset test;
	std::string source;  // "mnist" or "synthetic"
};

// Picks the dataset per [dataset] config: explicit source, or automatic
// fallback to the synthetic digits when the IDX files are absent. The
// synthetic sets are fixed (independent of the run seed).
ResolvedDataset resolve_dataset(const ExperimentConfig &cfg);

// Activation probability vs input voltage, measured on long stationary
// traces against the analytic logistic.
void run_sigmoid(const ExperimentConfig &cfg, std::ostream &out);

// Telegraph time series for each configured barrier / feedback pairing.
void run_trace(const ExperimentConfig &cfg, std::ostream &out);

// Minimal sampling windows over the configured barrier grid.
void run_tune(const ExperimentConfig &cfg, std::ostream &out);

// (eb, window) pairs as run_tune computes them, for reuse in-process.
std::vector<std::pair<double, double>> tuned_window_table(
    const ExperimentConfig &cfg);

// Parses the CSV written by run_tune back into (eb, window) pairs.
std::vector<std::pair<double, double>> load_windows_csv(
    const std::string &path);

// Network energy per tolerance level for both mitigation mechanisms.
// windows_csv may point at a previous `tune` artifact; when empty the
// windows are tuned in-process.
void run_energy(const ExperimentConfig &cfg, const std::string &windows_csv,
                std::ostream &out);

// DBN recognition error vs maximum barrier variation at the fixed baseline
// window (requires a trained model and a dataset).
void run_knee(const ExperimentConfig &cfg, std::ostream &out);

// Trains the desk- or full-scale DBN and writes the model file; logs a
// short summary. model_out overrides the configured model path when
// non-empty.
void run_dbn_train(const ExperimentConfig &cfg, const std::string &model_out,
                   std::ostream &log);

struct EvalOverrides {
	double eb_max_kt = -1.0;   // < 0: use [variation] eb_max_kt
	double tau_s_ns = 0.0;     // <= 0: baseline window
	int votes = 0;             // <= 0: [dbn] votes
	bool compensate = false;   // per-device feedback resistors
};

// Evaluates a trained model on the test split under a variation population
// and sampling policy; emits the error rate and confusion matrix.
void run_dbn_eval(const ExperimentConfig &cfg, const std::string &model_path,
                  const EvalOverrides &overrides, std::ostream &out);

}  // namespace pbit
