#include "pbit/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

namespace pbit {

namespace {

std::string trim(const std::string &s)
{
	const auto begin = s.find_first_not_of(" \t\r");
	if (begin == std::string::npos) {
		return "";
	}
	const auto end = s.find_last_not_of(" \t\r");
	return s.substr(begin, end - begin + 1);
}

using Section = std::map<std::string, std::string>;

std::map<std::string, Section> parse_sections(const std::string &text)
{
	std::map<std::string, Section> sections;
	std::istringstream in(text);
	std::string line;
	std::string current;
	int lineno = 0;
	while (std::getline(in, line)) {
		++lineno;
		const auto comment = line.find_first_of("#;");
		if (comment != std::string::npos) {
			line = line.substr(0, comment);
		}
		line = trim(line);
		if (line.empty()) {
			continue;
		}
		if (line.front() == '[') {
			if (line.back() != ']') {
				throw ConfigError("config line " + std::to_string(lineno) +
				                  ": malformed section header");
			}
			current = trim(line.substr(1, line.size() - 2));
			sections[current];
			continue;
		}
		const auto eq = line.find('=');
		if (eq == std::string::npos || current.empty()) {
			throw ConfigError("config line " + std::to_string(lineno) +
			                  ": expected key = value inside a section");
		}
		const std::string key = trim(line.substr(0, eq));
		const std::string value = trim(line.substr(eq + 1));
		if (key.empty()) {
			throw ConfigError("config line " + std::to_string(lineno) +
			                  ": empty key");
		}
		if (!sections[current].emplace(key, value).second) {
			throw ConfigError("config: duplicate key '" + key +
			                  "' in section [" + current + "]");
		}
	}
	return sections;
}

double to_double(const std::string &section, const std::string &key,
                 const std::string &value)
{
	if (value == "inf") {
		return kNoFeedback;
	}
	try {
		std::size_t used = 0;
		const double parsed = std::stod(value, &used);
		if (used != value.size()) {
			throw std::invalid_argument(value);
		}
		return parsed;
	}
	catch (const std::exception &) {
		throw ConfigError("config: [" + section + "] " + key +
		                  " is not a number: '" + value + "'");
	}
}

// Pulls typed values out of one section and complains about leftovers.
class SectionReader {
public:
	SectionReader(const std::string &name, const Section *section)
	    : name_(name)
	{
		if (section != nullptr) {
			pending_ = *section;
		}
	}

	~SectionReader() = default;

	void get(const std::string &key, double &out)
	{
		if (auto v = take(key)) {
			out = to_double(name_, key, *v);
		}
	}

	void get(const std::string &key, int &out)
	{
		if (auto v = take(key)) {
			const double d = to_double(name_, key, *v);
			if (d != std::floor(d)) {
				throw ConfigError("config: [" + name_ + "] " + key +
				                  " must be an integer");
			}
			out = static_cast<int>(d);
		}
	}

	void get(const std::string &key, std::uint64_t &out)
	{
		if (auto v = take(key)) {
			try {
				out = std::stoull(*v);
			}
			catch (const std::exception &) {
				throw ConfigError("config: [" + name_ + "] " + key +
				                  " is not an unsigned integer");
			}
		}
	}

	void get(const std::string &key, bool &out)
	{
		if (auto v = take(key)) {
			if (*v == "true" || *v == "1") {
				out = true;
			}
			else if (*v == "false" || *v == "0") {
				out = false;
			}
			else {
				throw ConfigError("config: [" + name_ + "] " + key +
				                  " must be true or false");
			}
		}
	}

	void get(const std::string &key, std::string &out)
	{
		if (auto v = take(key)) {
			out = *v;
		}
	}

	void get(const std::string &key, std::vector<double> &out)
	{
		if (auto v = take(key)) {
			std::vector<double> list;
			std::istringstream items(*v);
			std::string item;
			while (std::getline(items, item, ',')) {
				list.push_back(to_double(name_, key, trim(item)));
			}
			if (list.empty()) {
				throw ConfigError("config: [" + name_ + "] " + key +
				                  " must not be empty");
			}
			out = std::move(list);
		}
	}

	void finish() const
	{
		if (!pending_.empty()) {
			throw ConfigError("config: unknown key '" +
			                  pending_.begin()->first + "' in section [" +
			                  name_ + "]");
		}
	}

private:
	std::optional<std::string> take(const std::string &key)
	{
		auto it = pending_.find(key);
		if (it == pending_.end()) {
			return std::nullopt;
		}
		std::string value = it->second;
		pending_.erase(it);
		return value;
	}

	std::string name_;
	Section pending_;
};

const Section *find(const std::map<std::string, Section> &sections,
                    const std::string &name)
{
	auto it = sections.find(name);
	return it == sections.end() ? nullptr : &it->second;
}

}  // namespace

std::uint64_t fnv1a64(const std::string &text)
{
	std::uint64_t hash = 0xcbf29ce484222325ULL;
	for (unsigned char c : text) {
		hash ^= c;
		hash *= 0x100000001b3ULL;
	}
	return hash;
}

std::vector<int> ExperimentConfig::dbn_topology() const
{
	return {784, full_scale ? 200 : dbn.hidden, 10};
}

int ExperimentConfig::dbn_train_images() const
{
	return full_scale ? 60000 : dbn.train_images;
}

int ExperimentConfig::dbn_test_images() const
{
	return full_scale ? 10000 : dbn.test_images;
}

void ExperimentConfig::validate() const
{
	try {
		device.validate();
		baseline_policy.validate();
		sweep.validate();
		variation.validate();
	}
	catch (const std::invalid_argument &err) {
		throw ConfigError(std::string("config: ") + err.what());
	}
	if (tuning.rms_tolerance <= 0.0 || tuning.window_cap_ns <= 0.0 ||
	    tuning.ensembles < 1) {
		throw ConfigError("config: bad [tuning] values");
	}
	if (energy.power.p_static_uw <= 0.0 ||
	    energy.power.samples_per_inference <= 0.0) {
		throw ConfigError("config: [energy] calibration must be positive");
	}
	if (energy.compensation_target_kt < 0.0) {
		throw ConfigError("config: compensation target must be >= 0");
	}
	if (dbn.hidden < 1 || dbn.train_images < 1 || dbn.test_images < 1 ||
	    dbn.cd_epochs < 0 || dbn.readout_epochs < 1 || dbn.batch < 1 ||
	    dbn.votes < 1 || dbn.learning_rate <= 0.0 || dbn.hidden_gain <= 0.0) {
		throw ConfigError("config: bad [dbn] values");
	}
	if (sigmoid.points < 2 || sigmoid.repeats < 1 ||
	    sigmoid.duration_tau <= 0.0) {
		throw ConfigError("config: bad [sigmoid] values");
	}
	if (trace.duration_ns <= 0.0 || trace.eb_kt.empty()) {
		throw ConfigError("config: bad [trace] values");
	}
}

ExperimentConfig parse_config(const std::string &text)
{
	const auto sections = parse_sections(text);
	static const std::set<std::string> known = {
	    "run",    "device", "sampling", "sweep",     "tuning",  "trace",
	    "sigmoid", "energy", "variation", "geometry", "dbn",    "dataset"};
	for (const auto &[name, _] : sections) {
		if (known.find(name) == known.end()) {
			throw ConfigError("config: unknown section [" + name + "]");
		}
	}

	ExperimentConfig cfg;
	cfg.raw_text = text;
	cfg.config_hash = fnv1a64(text);

	{
		SectionReader run("run", find(sections, "run"));
		run.get("seed", cfg.seed);
		run.get("full_scale", cfg.full_scale);
		run.finish();
	}
	{
		SectionReader device("device", find(sections, "device"));
		device.get("tmr", cfg.device.tmr);
		device.get("g0_siemens", cfg.device.g0_siemens);
		device.get("beta", cfg.device.beta);
		device.get("vdd_volts", cfg.device.vdd_volts);
		device.get("eb_kt", cfg.device.eb_kt);
		device.get("tau0_ns", cfg.device.tau0_ns);
		device.get("v_slope_volts", cfg.device.v_slope_volts);
		device.get("rf_kohm", cfg.device.rf_kohm);
		device.get("r0_kohm", cfg.device.r0_kohm);
		device.finish();
	}
	{
		SectionReader sampling("sampling", find(sections, "sampling"));
		sampling.get("tau_s_ns", cfg.baseline_policy.tau_s_ns);
		sampling.get("settle_ns", cfg.baseline_policy.settle_ns);
		sampling.finish();
	}
	{
		SectionReader sweep("sweep", find(sections, "sweep"));
		sweep.get("v_start_volts", cfg.sweep.v_start_volts);
		sweep.get("v_end_volts", cfg.sweep.v_end_volts);
		sweep.get("v_step_volts", cfg.sweep.v_step_volts);
		sweep.get("repeats", cfg.sweep.repeats);
		sweep.finish();
	}
	{
		SectionReader tuning("tuning", find(sections, "tuning"));
		tuning.get("rms_tolerance", cfg.tuning.rms_tolerance);
		tuning.get("window_cap_ns", cfg.tuning.window_cap_ns);
		tuning.get("ensembles", cfg.tuning.ensembles);
		tuning.get("eb_grid_kt", cfg.tuning.eb_grid_kt);
		tuning.finish();
	}
	{
		SectionReader trace("trace", find(sections, "trace"));
		trace.get("eb_kt", cfg.trace.eb_kt);
		trace.get("rf_kohm", cfg.trace.rf_kohm);
		trace.get("duration_ns", cfg.trace.duration_ns);
		trace.finish();
	}
	{
		SectionReader sigmoid("sigmoid", find(sections, "sigmoid"));
		sigmoid.get("points", cfg.sigmoid.points);
		sigmoid.get("repeats", cfg.sigmoid.repeats);
		sigmoid.get("duration_tau", cfg.sigmoid.duration_tau);
		sigmoid.finish();
	}
	{
		SectionReader energy("energy", find(sections, "energy"));
		energy.get("p_static_uw", cfg.energy.power.p_static_uw);
		energy.get("samples_per_inference",
		           cfg.energy.power.samples_per_inference);
		energy.get("rf_table_kohm", cfg.energy.rf_table_kohm);
		energy.get("compensation_target_kt",
		           cfg.energy.compensation_target_kt);
		energy.get("tolerance_levels_kt", cfg.energy.tolerance_levels_kt);
		energy.finish();
	}
	{
		SectionReader variation("variation", find(sections, "variation"));
		std::string mode = cfg.variation.mode == VariationMode::Geometry
		                       ? "geometry"
		                       : "direct";
		variation.get("mode", mode);
		if (mode == "direct") {
			cfg.variation.mode = VariationMode::DirectBarrier;
		}
		else if (mode == "geometry") {
			cfg.variation.mode = VariationMode::Geometry;
		}
		else {
			throw ConfigError(
			    "config: [variation] mode must be direct or geometry");
		}
		variation.get("eb_max_kt", cfg.variation.eb_max_kt);
		variation.get("sigma_hk", cfg.variation.sigma_hk);
		variation.get("sigma_d", cfg.variation.sigma_d);
		variation.get("seed", cfg.variation.seed);
		variation.finish();
	}
	{
		SectionReader geometry("geometry", find(sections, "geometry"));
		auto &g = cfg.variation.nominal_geometry;
		geometry.get("hk_a_per_m", g.hk_a_per_m);
		geometry.get("ms_a_per_m", g.ms_a_per_m);
		geometry.get("d_nm", g.d_nm);
		geometry.get("tf_nm", g.tf_nm);
		geometry.get("temperature_k", g.temperature_k);
		geometry.finish();
	}
	{
		SectionReader dbn("dbn", find(sections, "dbn"));
		dbn.get("hidden", cfg.dbn.hidden);
		dbn.get("train_images", cfg.dbn.train_images);
		dbn.get("test_images", cfg.dbn.test_images);
		dbn.get("cd_epochs", cfg.dbn.cd_epochs);
		dbn.get("readout_epochs", cfg.dbn.readout_epochs);
		dbn.get("learning_rate", cfg.dbn.learning_rate);
		dbn.get("hidden_gain", cfg.dbn.hidden_gain);
		dbn.get("batch", cfg.dbn.batch);
		dbn.get("votes", cfg.dbn.votes);
		dbn.get("knee_levels_kt", cfg.dbn.knee_levels_kt);
		dbn.get("model_path", cfg.dbn.model_path);
		dbn.finish();
	}
	{
		SectionReader dataset("dataset", find(sections, "dataset"));
		std::string source = "auto";
		dataset.get("source", source);
		if (source == "auto") {
			cfg.dataset.source = DatasetSource::Auto;
		}
		else if (source == "mnist") {
			cfg.dataset.source = DatasetSource::Mnist;
		}
		else if (source == "synthetic") {
			cfg.dataset.source = DatasetSource::Synthetic;
		}
		else {
			throw ConfigError(
			    "config: [dataset] source must be auto, mnist or synthetic");
		}
		dataset.get("dir", cfg.dataset.dir);
		dataset.finish();
	}

	cfg.validate();
	return cfg;
}

ExperimentConfig load_config_file(const std::string &path)
{
	std::ifstream in(path);
	if (!in) {
		throw ConfigError("cannot open config file " + path);
	}
	std::ostringstream text;
	text << in.rdbuf();
	return parse_config(text.str());
}

std::string variation_to_ini(const VariationSpec &spec)
{
	std::ostringstream out;
	out.precision(17);
	out << "[variation]\n";
	out << "mode = "
	    << (spec.mode == VariationMode::Geometry ? "geometry" : "direct")
	    << "\n";
	out << "eb_max_kt = " << spec.eb_max_kt << "\n";
	out << "sigma_hk = " << spec.sigma_hk << "\n";
	out << "sigma_d = " << spec.sigma_d << "\n";
	out << "seed = " << spec.seed << "\n";
	out << "\n[geometry]\n";
	const auto &g = spec.nominal_geometry;
	out << "hk_a_per_m = " << g.hk_a_per_m << "\n";
	out << "ms_a_per_m = " << g.ms_a_per_m << "\n";
	out << "d_nm = " << g.d_nm << "\n";
	out << "tf_nm = " << g.tf_nm << "\n";
	out << "temperature_k = " << g.temperature_k << "\n";
	return out.str();
}

}  // namespace pbit
