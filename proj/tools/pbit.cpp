// p-bit experiment runner: reproduces the device, mitigation and network
// experiments as CSV artifacts from a config file and a seed.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>

#include "pbit/experiments.hpp"
#include "pbit/mitigation.hpp"

namespace {

enum ExitCode : int {
	kOk = 0,
	kConfigError = 2,
	kDataError = 3,
	kCapExceeded = 4,
};

struct OutputTarget {
	std::ofstream file;
	std::ostream *stream = &std::cout;

	void open(const std::string &path)
	{
		if (path.empty()) {
			return;
		}
		file.open(path, std::ios::binary);
		if (!file) {
			throw pbit::DataError("cannot open output file " + path);
		}
		stream = &file;
	}
};

}  // namespace

int main(int argc, char **argv)
{
	CLI::App app{"p-bit stochastic neuron simulator and DBN evaluation"};
	app.require_subcommand(1);
	// Let global options (--config, --seed, ...) appear after the
	// subcommand as well.
	app.fallthrough();

	std::string config_path;
	std::string out_path;
	std::uint64_t seed_override = 0;
	bool full_scale = false;

	app.add_option("--config", config_path, "configuration file")->required();
	app.add_option("--out", out_path, "output file (default: stdout)");
	auto *seed_opt =
	    app.add_option("--seed", seed_override, "override the config seed");
	app.add_flag("--full-scale", full_scale,
	             "use the full 60k-image 784x200x10 setup");

	auto *sigmoid = app.add_subcommand("sigmoid", "activation curve CSV");
	auto *trace = app.add_subcommand("trace", "telegraph time series CSV");
	auto *tune = app.add_subcommand("tune", "minimal sampling windows CSV");
	auto *knee = app.add_subcommand("knee", "DBN error vs barrier variation");

	auto *energy = app.add_subcommand("energy", "network energy per tolerance");
	std::string windows_csv;
	energy->add_option("--windows", windows_csv,
	                   "reuse a `tune` CSV instead of re-tuning");

	auto *dbn_train = app.add_subcommand("dbn-train", "train and store the DBN");

	auto *dbn_eval = app.add_subcommand("dbn-eval", "evaluate the stored DBN");
	std::string model_path;
	pbit::EvalOverrides overrides;
	std::string feedback = "none";
	dbn_eval->add_option("--model", model_path, "model file (default: config)");
	dbn_eval->add_option("--eb-max", overrides.eb_max_kt,
	                     "population barrier variation, kT");
	dbn_eval->add_option("--tau-s", overrides.tau_s_ns,
	                     "sampling window override, ns");
	dbn_eval->add_option("--votes", overrides.votes, "votes per image");
	dbn_eval->add_option("--feedback", feedback,
	                     "none | compensate (per-device resistors)");

	CLI11_PARSE(app, argc, argv);

	try {
		pbit::ExperimentConfig cfg = pbit::load_config_file(config_path);
		if (seed_opt->count() > 0) {
			cfg.seed = seed_override;
		}
		if (full_scale) {
			cfg.full_scale = true;
		}

		OutputTarget out;
		if (!dbn_train->parsed()) {
			out.open(out_path);  // dbn-train writes a model file instead
		}

		if (sigmoid->parsed()) {
			pbit::run_sigmoid(cfg, *out.stream);
		}
		else if (trace->parsed()) {
			pbit::run_trace(cfg, *out.stream);
		}
		else if (tune->parsed()) {
			pbit::run_tune(cfg, *out.stream);
		}
		else if (knee->parsed()) {
			pbit::run_knee(cfg, *out.stream);
		}
		else if (energy->parsed()) {
			pbit::run_energy(cfg, windows_csv, *out.stream);
		}
		else if (dbn_train->parsed()) {
			pbit::run_dbn_train(cfg, out_path, std::cout);
		}
		else if (dbn_eval->parsed()) {
			if (feedback == "compensate") {
				overrides.compensate = true;
			}
			else if (feedback != "none") {
				throw pbit::ConfigError(
				    "--feedback must be none or compensate");
			}
			pbit::run_dbn_eval(cfg, model_path, overrides, *out.stream);
		}
	}
	catch (const pbit::ConfigError &err) {
		std::cerr << "config error: " << err.what() << "\n";
		return kConfigError;
	}
	catch (const pbit::DataError &err) {
		std::cerr << "data error: " << err.what() << "\n";
		return kDataError;
	}
	catch (const pbit::WindowCapExceeded &err) {
		std::cerr << "error: " << err.what() << "\n";
		return kCapExceeded;
	}
	catch (const std::exception &err) {
		std::cerr << "error: " << err.what() << "\n";
		return 1;
	}
	return kOk;
}
