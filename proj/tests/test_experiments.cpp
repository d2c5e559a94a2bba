#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "pbit/experiments.hpp"

using namespace pbit;

TEST_SUITE_BEGIN("experiments");

namespace {

// Reduced-scale configuration so command tests stay fast.
const char *kSmallConfig =
    "[sweep]\n"
    "repeats = 24\n"
    "[tuning]\n"
    "ensembles = 16\n"
    "rms_tolerance = 0.06\n"
    "eb_grid_kt = 0.0,1.0\n"
    "[sigmoid]\n"
    "points = 9\n"
    "repeats = 12\n"
    "duration_tau = 300\n"
    "[trace]\n"
    "eb_kt = 0.5,1.5\n"
    "rf_kohm = inf,100\n"
    "duration_ns = 2000\n"
    "[dbn]\n"
    "hidden = 24\n"
    "train_images = 600\n"
    "test_images = 200\n"
    "cd_epochs = 3\n"
    "readout_epochs = 20\n"
    "knee_levels_kt = 0.0,2.0\n"
    "[dataset]\n"
    "source = synthetic\n";

std::vector<std::vector<std::string>> parse_csv(const std::string &text)
{
	std::vector<std::vector<std::string>> rows;
	std::istringstream in(text);
	std::string line;
	while (std::getline(in, line)) {
		if (line.empty() || line[0] == '#') {
			continue;
		}
		std::vector<std::string> cells;
		std::istringstream cells_in(line);
		std::string cell;
		while (std::getline(cells_in, cell, ',')) {
			cells.push_back(cell);
		}
		rows.push_back(std::move(cells));
	}
	return rows;
}

std::string render(void (*command)(const ExperimentConfig &, std::ostream &),
                   const ExperimentConfig &cfg)
{
	std::ostringstream out;
	command(cfg, out);
	return out.str();
}

}  // namespace

TEST_CASE("synthetic dataset resolution is deterministic")
{
	ExperimentConfig cfg = parse_config(kSmallConfig);
	const ResolvedDataset a = resolve_dataset(cfg);
	const ResolvedDataset b = resolve_dataset(cfg);
	CHECK(a.source == "synthetic");
	CHECK(a.train.size() == 600);
	CHECK(a.test.size() == 200);
	CHECK(a.train.pixels == b.train.pixels);

	// The dataset does not move with the run seed.
	cfg.seed = 777;
	const ResolvedDataset c = resolve_dataset(cfg);
	CHECK(a.train.pixels == c.train.pixels);

	// Forcing mnist without files present is a data error.
	cfg.dataset.source = DatasetSource::Mnist;
	cfg.dataset.dir = "/nonexistent";
	CHECK_THROWS_AS(resolve_dataset(cfg), DataError);
}

TEST_CASE("sigmoid command matches the analytic activation")
{
	const ExperimentConfig cfg = parse_config(kSmallConfig);
	const std::string csv = render(run_sigmoid, cfg);
	CHECK(csv.rfind("# schema=sigmoid.v1", 0) == 0);
	CHECK(csv == render(run_sigmoid, cfg));  // byte-identical re-run

	const auto rows = parse_csv(csv);
	REQUIRE(rows.size() == 10);  // header + 9 points
	for (std::size_t i = 1; i < rows.size(); ++i) {
		const double analytic = std::stod(rows[i][1]);
		const double empirical = std::stod(rows[i][2]);
		const double stderr_est = std::stod(rows[i][3]);
		CHECK(std::abs(empirical - analytic) <=
		      3.0 * stderr_est + 2e-3);
	}
	// Midpoint row (9 points over [0, 0.8] -> index 4 is 0.4 V).
	CHECK(std::stod(rows[5][1]) == doctest::Approx(0.5));
}

TEST_CASE("trace command emits Arrhenius-consistent telegraph series")
{
	const ExperimentConfig cfg = parse_config(kSmallConfig);
	const std::string csv = render(run_trace, cfg);
	CHECK(csv.rfind("# schema=trace.v1", 0) == 0);
	CHECK(csv == render(run_trace, cfg));

	// Mean dwell per (eb, rf) group; the no-feedback groups must scale
	// like exp(delta eb), the 100 kOhm group must fluctuate ~exp(1.5)
	// faster than its no-feedback sibling.
	struct Group {
		int segments = 0;
	};
	std::map<std::pair<std::string, std::string>, Group> groups;
	for (const auto &row : parse_csv(csv)) {
		if (row[0] == "eb_kt") {
			continue;
		}
		groups[{row[0], row[1]}].segments++;
	}
	const double duration = cfg.trace.duration_ns;
	const auto mean_dwell = [&](const char *eb, const char *rf) {
		return duration / groups.at({eb, rf}).segments;
	};
	const double ratio = mean_dwell("1.5", "inf") / mean_dwell("0.5", "inf");
	CHECK(ratio == doctest::Approx(std::exp(1.0)).epsilon(0.30));

	const double speedup =
	    double(groups.at({"1.5", "100"}).segments) /
	    double(groups.at({"1.5", "inf"}).segments);
	CHECK(speedup == doctest::Approx(std::exp(1.5)).epsilon(0.35));
}

TEST_CASE("tune command emits a monotone window table")
{
	const ExperimentConfig cfg = parse_config(kSmallConfig);
	std::ostringstream out;
	run_tune(cfg, out);
	const auto rows = parse_csv(out.str());
	REQUIRE(rows.size() == 3);  // header + 2 levels
	CHECK(std::stod(rows[2][1]) > std::stod(rows[1][1]));

	// The CSV parses back for reuse by the energy command.
	const auto path =
	    (std::filesystem::temp_directory_path() / "pbit_tune.csv").string();
	std::ofstream(path) << out.str();
	const auto table = load_windows_csv(path);
	REQUIRE(table.size() == 2);
	CHECK(table[0].first == 0.0);
	CHECK(table[1].first == 1.0);
	CHECK(table[1].second == std::stod(rows[2][1]));
}

TEST_CASE("energy command")
{
	ExperimentConfig cfg = parse_config(kSmallConfig);
	cfg.energy.tolerance_levels_kt = {0.0, 1.0};

	// Windows supplied via a file to keep the test fast.
	const auto path =
	    (std::filesystem::temp_directory_path() / "pbit_windows.csv").string();
	std::ofstream(path) << "eb_kt,min_tau_s_ns\n0,2\n1,7.8\n";

	std::ostringstream out;
	run_energy(cfg, path, out);
	const std::string csv = out.str();
	std::ostringstream again;
	run_energy(cfg, path, again);
	CHECK(csv == again.str());

	const auto rows = parse_csv(csv);
	REQUIRE(rows.size() == 5);  // header + 2 temporal + 2 feedback

	// Zero-tolerance rows agree across mechanisms.
	CHECK(rows[1][0] == "0");
	CHECK(rows[3][0] == "0");
	CHECK(rows[1][4] == rows[3][4]);  // per-pbit energy
	CHECK(std::stod(rows[1][6]) == doctest::Approx(1.0));

	// Baseline per-pbit energy is the calibrated 22.4 pJ.
	CHECK(std::stod(rows[1][4]) == doctest::Approx(22.4).epsilon(1e-9));

	// Temporal overhead tracks the window ratio.
	const double overhead = std::stod(rows[2][6]);
	CHECK(overhead == doctest::Approx((0.6 + 7.8) / 2.6).epsilon(1e-9));

	// Missing level in the windows file is a data error.
	cfg.energy.tolerance_levels_kt = {0.0, 1.5};
	std::ostringstream sink;
	CHECK_THROWS_AS(run_energy(cfg, path, sink), DataError);
}

TEST_CASE("dbn train, eval and knee commands")
{
	ExperimentConfig cfg = parse_config(kSmallConfig);
	const auto model_path =
	    (std::filesystem::temp_directory_path() / "pbit_cmd.model").string();
	cfg.dbn.model_path = model_path;

	std::ostringstream log_a;
	run_dbn_train(cfg, model_path, log_a);
	CHECK(log_a.str().find("dataset=synthetic") != std::string::npos);

	// Re-training writes the identical model file.
	std::vector<char> first_bytes;
	{
		std::ifstream in(model_path, std::ios::binary);
		first_bytes.assign(std::istreambuf_iterator<char>(in), {});
	}
	std::ostringstream log_b;
	run_dbn_train(cfg, model_path, log_b);
	std::vector<char> second_bytes;
	{
		std::ifstream in(model_path, std::ios::binary);
		second_bytes.assign(std::istreambuf_iterator<char>(in), {});
	}
	CHECK(first_bytes == second_bytes);

	SUBCASE("eval emits the error rate and confusion matrix")
	{
		EvalOverrides overrides;
		overrides.eb_max_kt = 0.0;
		overrides.votes = 5;
		std::ostringstream out;
		run_dbn_eval(cfg, model_path, overrides, out);
		std::ostringstream again;
		run_dbn_eval(cfg, model_path, overrides, again);
		CHECK(out.str() == again.str());

		const auto rows = parse_csv(out.str());
		REQUIRE(rows.size() >= 2 + 100);
		CHECK(rows[1][0] == "error_rate");
		const double error = std::stod(rows[1][3]);
		CHECK(error >= 0.0);
		CHECK(error <= 1.0);
		std::size_t total = 0;
		for (std::size_t i = 3; i < rows.size(); ++i) {
			total += std::stoul(rows[i][3]);
		}
		CHECK(total == 200);
	}

	SUBCASE("knee requires the model, then degrades with variation")
	{
		std::ostringstream out;
		run_knee(cfg, out);
		const auto rows = parse_csv(out.str());
		REQUIRE(rows.size() == 3);
		const double low = std::stod(rows[1][1]);
		const double high = std::stod(rows[2][1]);
		CHECK(high > low);

		cfg.dbn.model_path = "/nonexistent/model";
		std::ostringstream sink;
		CHECK_THROWS_AS(run_knee(cfg, sink), DataError);
	}
}

TEST_SUITE_END();
