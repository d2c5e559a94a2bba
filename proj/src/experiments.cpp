#include "pbit/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pbit/csv.hpp"
#include "pbit/mitigation.hpp"
#include "pbit/parallel.hpp"
#include "pbit/rng.hpp"
#include "pbit/variation.hpp"

namespace pbit {

namespace {

// Fixed generator seeds so the synthetic dataset is one dataset, not a
// function of the run seed.
constexpr std::uint64_t kSyntheticTrainSeed = 1000001;
constexpr std::uint64_t kSyntheticTestSeed = 2000002;

// Stream tags for deriving independent seed domains per command.
enum : std::uint64_t {
	kTagSigmoid = 0x51,
	kTagTrace = 0x72,
	kTagPopulation = 0xA0,
	kTagEval = 0xE7,
	kTagInitState = 0x57a7e,
};

std::string dataset_dir(const ExperimentConfig &cfg)
{
	if (!cfg.dataset.dir.empty()) {
		return cfg.dataset.dir;
	}
	const char *env = std::getenv("PBIT_MNIST_DIR");
	return env != nullptr ? env : "";
}

VariationSpec level_variation(const ExperimentConfig &cfg, double eb_max,
                              std::uint64_t level_index)
{
	VariationSpec spec = cfg.variation;
	spec.eb_max_kt = eb_max;
	if (spec.seed == 0) {
		spec.seed = derive_seed(cfg.seed, kTagPopulation, level_index);
	}
	return spec;
}

WindowSearch window_search(const ExperimentConfig &cfg)
{
	WindowSearch search;
	search.rms_tolerance = cfg.tuning.rms_tolerance;
	search.settle_ns = cfg.baseline_policy.settle_ns;
	search.cap_ns = cfg.tuning.window_cap_ns;
	search.ensembles = cfg.tuning.ensembles;
	search.start_ns = 0.5 * cfg.device.tau0_ns;
	return search;
}

}  // namespace

ResolvedDataset resolve_dataset(const ExperimentConfig &cfg)
{
	const std::string dir = dataset_dir(cfg);
	const int n_train = cfg.dbn_train_images();
	const int n_test = cfg.dbn_test_images();

	DatasetSource source = cfg.dataset.source;
	if (source == DatasetSource::Auto) {
		source = !dir.empty() && mnist_present(dir) ? DatasetSource::Mnist
		                                            : DatasetSource::Synthetic;
	}

	ResolvedDataset resolved;
	if (source == DatasetSource::Mnist) {
		if (dir.empty()) {
			throw DataError(
			    "no dataset directory configured ([dataset] dir or "
			    "PBIT_MNIST_DIR)");
		}
		MnistSplits splits = load_mnist(dir);
		resolved.train = splits.train.head(n_train);
		resolved.test = splits.test.head(n_test);
		resolved.source = "mnist";
	}
	else {
		resolved.train = synthetic_digits(n_train, kSyntheticTrainSeed);
		resolved.test = synthetic_digits(n_test, kSyntheticTestSeed);
		resolved.source = "synthetic";
	}
	return resolved;
}

void run_sigmoid(const ExperimentConfig &cfg, std::ostream &out)
{
	const PbitParams &params = cfg.device;
	const double eb_eff = std::max(
	    0.0,
	    effective_barrier_kt(params.eb_kt, params.rf_kohm, params.r0_kohm));
	const double tau = fluctuation_timescale_ns(eb_eff, params.tau0_ns);
	const double duration = cfg.sigmoid.duration_tau * tau;

	CsvWriter csv(out, "sigmoid.v1", cfg.config_hash, cfg.seed);
	csv.columns({"v_in_volts", "p_analytic", "p_empirical", "stderr"});
	for (int i = 0; i < cfg.sigmoid.points; ++i) {
		const double v_in =
		    params.vdd_volts * i / (cfg.sigmoid.points - 1);
		double sum = 0.0;
		double sum_sq = 0.0;
		for (int r = 0; r < cfg.sigmoid.repeats; ++r) {
			const auto trace = simulate_trace(
			    params, v_in, duration,
			    derive_seed(cfg.seed, kTagSigmoid,
			                static_cast<std::uint64_t>(i),
			                static_cast<std::uint64_t>(r)));
			const double p = sample_window(trace, 0.0, duration);
			sum += p;
			sum_sq += p * p;
		}
		const int n = cfg.sigmoid.repeats;
		const double mean = sum / n;
		const double variance =
		    n > 1 ? std::max(0.0, (sum_sq - n * mean * mean) / (n - 1)) : 0.0;
		csv.cell(v_in)
		    .cell(input_bias_probability(params, v_in))
		    .cell(mean)
		    .cell(std::sqrt(variance / n));
		csv.end_row();
	}
}

void run_trace(const ExperimentConfig &cfg, std::ostream &out)
{
	CsvWriter csv(out, "trace.v1", cfg.config_hash, cfg.seed);
	csv.columns({"eb_kt", "rf_kohm", "time_ns", "output_bit"});
	for (std::size_t ie = 0; ie < cfg.trace.eb_kt.size(); ++ie) {
		for (std::size_t ir = 0; ir < cfg.trace.rf_kohm.size(); ++ir) {
			PbitParams params = cfg.device;
			params.eb_kt = cfg.trace.eb_kt[ie];
			params.rf_kohm = cfg.trace.rf_kohm[ir];
			const auto trace = simulate_trace(
			    params, 0.5 * params.vdd_volts, cfg.trace.duration_ns,
			    derive_seed(cfg.seed, kTagTrace,
			                static_cast<std::uint64_t>(ie),
			                static_cast<std::uint64_t>(ir)));
			double t = 0.0;
			for (const auto &segment : trace.segments) {
				csv.cell(params.eb_kt)
				    .cell(params.rf_kohm)
				    .cell(t)
				    .cell(output_bit(segment.state));
				csv.end_row();
				t += segment.dwell_ns;
			}
		}
	}
}

std::vector<std::pair<double, double>> tuned_window_table(
    const ExperimentConfig &cfg)
{
	const WindowSearch search = window_search(cfg);
	std::vector<std::pair<double, double>> table;
	for (double eb : cfg.tuning.eb_grid_kt) {
		PbitParams params = cfg.device;
		params.eb_kt = eb;
		table.emplace_back(
		    eb, tune_sampling_window(params, cfg.sweep, search, cfg.seed));
	}
	return table;
}

void run_tune(const ExperimentConfig &cfg, std::ostream &out)
{
	CsvWriter csv(out, "tune.v1", cfg.config_hash, cfg.seed);
	csv.columns({"eb_kt", "min_tau_s_ns"});
	for (const auto &[eb, window] : tuned_window_table(cfg)) {
		csv.cell(eb).cell(window);
		csv.end_row();
	}
}

std::vector<std::pair<double, double>> load_windows_csv(
    const std::string &path)
{
	std::ifstream in(path);
	if (!in) {
		throw DataError("cannot open windows file " + path);
	}
	std::vector<std::pair<double, double>> table;
	std::string line;
	while (std::getline(in, line)) {
		if (line.empty() || line[0] == '#' || line.rfind("eb_kt", 0) == 0) {
			continue;
		}
		std::istringstream cells(line);
		std::string eb_text;
		std::string window_text;
		if (!std::getline(cells, eb_text, ',') ||
		    !std::getline(cells, window_text, ',')) {
			throw DataError("malformed windows file " + path);
		}
		table.emplace_back(std::stod(eb_text), std::stod(window_text));
	}
	if (table.empty()) {
		throw DataError("windows file has no rows: " + path);
	}
	return table;
}

void run_energy(const ExperimentConfig &cfg, const std::string &windows_csv,
                std::ostream &out)
{
	std::vector<std::pair<double, double>> windows;
	if (!windows_csv.empty()) {
		windows = load_windows_csv(windows_csv);
	}

	const auto window_for = [&](double level) {
		for (const auto &[eb, w] : windows) {
			if (std::abs(eb - level) < 1e-9) {
				return w;
			}
		}
		if (!windows_csv.empty()) {
			throw DataError("windows file lacks level " +
			                CsvWriter::fmt(level));
		}
		PbitParams params = cfg.device;
		params.eb_kt = level;
		return tune_sampling_window(params, cfg.sweep, window_search(cfg),
		                            cfg.seed);
	};

	const std::vector<int> topology = cfg.dbn_topology();
	const SamplingPolicy baseline = cfg.baseline_policy;
	const EnergyReport base_report =
	    dbn_energy(topology, cfg.device, cfg.energy.power, baseline,
	               kNoFeedback, nullptr);

	CsvWriter csv(out, "energy.v1", cfg.config_hash, cfg.seed);
	csv.columns({"tolerance_kt", "mechanism", "tau_s_ns", "rf_kohm",
	             "per_pbit_pj", "network_pj", "overhead_ratio"});
	for (double level : cfg.energy.tolerance_levels_kt) {
		// Temporal redundancy: window grown to cover the worst device at
		// this tolerance; the near-zero level needs no growth by
		// calibration, so both mechanisms share the baseline row.
		SamplingPolicy policy = baseline;
		if (level > 0.0) {
			policy.tau_s_ns = window_for(level);
		}
		EnergyReport temporal =
		    dbn_energy(topology, cfg.device, cfg.energy.power, policy,
		               kNoFeedback, &baseline);
		csv.cell(level)
		    .cell("temporal")
		    .cell(policy.tau_s_ns)
		    .cell(kNoFeedback)
		    .cell(temporal.per_pbit_pj)
		    .cell(temporal.network_pj)
		    .cell(temporal.network_pj / base_report.network_pj);
		csv.end_row();
	}
	for (double level : cfg.energy.tolerance_levels_kt) {
		const double rf = compensating_resistor_kohm(
		    level, cfg.energy.compensation_target_kt, cfg.device.r0_kohm);
		EnergyReport feedback = dbn_energy(
		    topology, cfg.device, cfg.energy.power, baseline, rf, &baseline);
		csv.cell(level)
		    .cell("feedback")
		    .cell(baseline.tau_s_ns)
		    .cell(rf)
		    .cell(feedback.per_pbit_pj)
		    .cell(feedback.network_pj)
		    .cell(feedback.network_pj / base_report.network_pj);
		csv.end_row();
	}

	// Diagnostic: least-squares fit of the resistor-per-tolerance table.
	std::vector<double> levels;
	for (double level : cfg.energy.tolerance_levels_kt) {
		if (level > 0.0) {
			levels.push_back(level);
		}
	}
	if (levels.size() == cfg.energy.rf_table_kohm.size()) {
		const ResistorFit fit =
		    fit_resistor_table(levels, cfg.energy.rf_table_kohm);
		std::string residuals;
		for (std::size_t i = 0; i < fit.residuals_kohm.size(); ++i) {
			residuals += (i ? "," : "") + CsvWriter::fmt(fit.residuals_kohm[i]);
		}
		csv.comment("resistor_fit r0_kohm=" + CsvWriter::fmt(fit.r0_kohm) +
		            " target_kt=" + CsvWriter::fmt(fit.target_kt) +
		            " rmse_kohm=" + CsvWriter::fmt(fit.rmse_kohm));
		csv.comment("resistor_fit_residuals_kohm=" + residuals);
	}
}

void run_knee(const ExperimentConfig &cfg, std::ostream &out)
{
	const DbnModel model = load_model(cfg.dbn.model_path);
	const ResolvedDataset data = resolve_dataset(cfg);
	const EvalResult ideal = evaluate_ideal(model, data.test);

	CsvWriter csv(out, "knee.v1", cfg.config_hash, cfg.seed);
	csv.comment("dataset=" + data.source +
	            " test_images=" + std::to_string(data.test.size()) +
	            " votes=" + std::to_string(cfg.dbn.votes));
	csv.columns({"eb_max_kt", "error_rate", "ideal_error_rate"});
	for (std::size_t li = 0; li < cfg.dbn.knee_levels_kt.size(); ++li) {
		const double level = cfg.dbn.knee_levels_kt[li];
		const DevicePopulation population = build_population(
		    model.pbit_count(), cfg.device,
		    level_variation(cfg, level, li));
		InferenceConfig inference;
		inference.population = &population;
		inference.policy = cfg.baseline_policy;
		inference.votes = cfg.dbn.votes;
		const EvalResult result =
		    evaluate(model, data.test, inference,
		             derive_seed(cfg.seed, kTagEval, li));
		csv.cell(level).cell(result.error_rate).cell(ideal.error_rate);
		csv.end_row();
	}
}

void run_dbn_train(const ExperimentConfig &cfg, const std::string &model_out,
                   std::ostream &log)
{
	const ResolvedDataset data = resolve_dataset(cfg);

	TrainHyper hyper;
	hyper.learning_rate = static_cast<float>(cfg.dbn.learning_rate);
	hyper.cd_epochs = cfg.dbn.cd_epochs;
	hyper.readout_epochs = cfg.dbn.readout_epochs;
	hyper.hidden_gain = static_cast<float>(cfg.dbn.hidden_gain);
	hyper.batch = cfg.dbn.batch;
	hyper.seed = cfg.seed;

	const DbnModel model = train_cd1(data.train, cfg.dbn_topology(), hyper);
	const std::string path =
	    model_out.empty() ? cfg.dbn.model_path : model_out;
	save_model(model, path);

	const EvalResult train_err = evaluate_ideal(model, data.train);
	const EvalResult test_err = evaluate_ideal(model, data.test);
	log << "model=" << path << " dataset=" << data.source
	    << " train_images=" << data.train.size()
	    << " ideal_train_error=" << CsvWriter::fmt(train_err.error_rate)
	    << " ideal_test_error=" << CsvWriter::fmt(test_err.error_rate)
	    << "\n";
}

void run_dbn_eval(const ExperimentConfig &cfg, const std::string &model_path,
                  const EvalOverrides &overrides, std::ostream &out)
{
	const DbnModel model =
	    load_model(model_path.empty() ? cfg.dbn.model_path : model_path);
	const ResolvedDataset data = resolve_dataset(cfg);

	const double eb_max =
	    overrides.eb_max_kt >= 0.0 ? overrides.eb_max_kt
	                               : cfg.variation.eb_max_kt;
	const DevicePopulation population = build_population(
	    model.pbit_count(), cfg.device, level_variation(cfg, eb_max, 0));

	InferenceConfig inference;
	inference.population = &population;
	inference.policy = cfg.baseline_policy;
	if (overrides.tau_s_ns > 0.0) {
		inference.policy.tau_s_ns = overrides.tau_s_ns;
	}
	inference.votes = overrides.votes > 0 ? overrides.votes : cfg.dbn.votes;
	if (overrides.compensate) {
		inference.rf_kohm.reserve(population.size());
		for (const auto &device : population.devices) {
			inference.rf_kohm.push_back(compensating_resistor_kohm(
			    device.eb_kt, cfg.energy.compensation_target_kt,
			    device.r0_kohm));
		}
	}

	const EvalResult result = evaluate(model, data.test, inference,
	                                   derive_seed(cfg.seed, kTagEval));

	CsvWriter csv(out, "dbn-eval.v1", cfg.config_hash, cfg.seed);
	csv.comment("dataset=" + data.source +
	            " eb_max_kt=" + CsvWriter::fmt(eb_max) +
	            " tau_s_ns=" + CsvWriter::fmt(inference.policy.tau_s_ns) +
	            " votes=" + std::to_string(inference.votes) +
	            " feedback=" + (overrides.compensate ? "compensate" : "none"));
	csv.columns({"record", "true_digit", "predicted_digit", "value"});
	csv.cell("error_rate").cell(-1).cell(-1).cell(result.error_rate);
	csv.end_row();
	csv.cell("count").cell(-1).cell(-1).cell(result.count);
	csv.end_row();
	for (int t = 0; t < 10; ++t) {
		for (int p = 0; p < 10; ++p) {
			csv.cell("confusion").cell(t).cell(p).cell(
			    std::size_t(result.confusion[t][p]));
			csv.end_row();
		}
	}
}

}  // namespace pbit
