#include "pbit/mitigation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace pbit {

namespace {

void require(bool ok, const char *what)
{
	if (!ok) {
		throw std::invalid_argument(std::string("pbit: ") + what);
	}
}

}  // namespace

void SamplingPolicy::validate() const
{
	require(tau_s_ns > 0.0, "tau_s_ns must be > 0");
	require(settle_ns >= 0.0, "settle_ns must be >= 0");
}

void SweepSpec::validate() const
{
	require(v_start_volts < v_end_volts, "sweep requires v_start < v_end");
	require(v_step_volts > 0.0, "sweep step must be > 0");
	require(repeats >= 1, "sweep repeats must be >= 1");
	const double span = v_end_volts - v_start_volts;
	const double steps = span / v_step_volts;
	require(std::abs(steps - std::round(steps)) < 1e-9 * std::max(1.0, steps),
	        "sweep step must divide the span");
}

int SweepSpec::points() const
{
	return static_cast<int>(
	           std::round((v_end_volts - v_start_volts) / v_step_volts)) +
	       1;
}

DistortionReport measure_activation_curve(const PbitParams &params,
                                          const SamplingPolicy &policy,
                                          const SweepSpec &sweep,
                                          std::uint64_t seed, int ensembles)
{
	params.validate();
	policy.validate();
	sweep.validate();
	require(ensembles >= 1, "ensembles must be >= 1");

	const int n = sweep.points();
	std::vector<double> ideal(n);
	for (int i = 0; i < n; ++i) {
		ideal[i] = input_bias_probability(params, sweep.v_at(i));
	}

	std::vector<double> grand(n, 0.0);
	std::vector<double> ensemble_mean(n);
	double sq_err = 0.0;
	double max_err = 0.0;
	for (int m = 0; m < ensembles; ++m) {
		std::fill(ensemble_mean.begin(), ensemble_mean.end(), 0.0);
		for (int r = 0; r < sweep.repeats; ++r) {
			Rng rng(derive_seed(seed, static_cast<std::uint64_t>(m),
			                    static_cast<std::uint64_t>(r)));
			// The sweep dwells at v_start before recording, so the
			// first step starts from its stationary distribution.
			MagState state = rng.bernoulli(ideal.front()) ? MagState::AP
			                                              : MagState::P;
			for (int i = 0; i < n; ++i) {
				ensemble_mean[i] +=
				    sample_hold(params, sweep.v_at(i), policy.settle_ns,
				                policy.tau_s_ns, state, rng);
			}
		}
		for (int i = 0; i < n; ++i) {
			ensemble_mean[i] /= sweep.repeats;
			const double err = ensemble_mean[i] - ideal[i];
			sq_err += err * err;
			max_err = std::max(max_err, std::abs(err));
			grand[i] += ensemble_mean[i];
		}
	}

	DistortionReport report;
	report.points.reserve(n);
	report.rms_error = std::sqrt(sq_err / (static_cast<double>(n) * ensembles));
	report.max_error = max_err;
	for (int i = 0; i < n; ++i) {
		grand[i] /= ensembles;
		report.points.push_back({sweep.v_at(i), grand[i], ideal[i]});
	}
	return report;
}

WindowCapExceeded::WindowCapExceeded(double cap)
    : std::runtime_error("pbit: sampling window cap of " +
                         std::to_string(cap) + " ns exceeded"),
      cap_ns(cap)
{
}

double tune_sampling_window(const PbitParams &params, const SweepSpec &sweep,
                            const WindowSearch &search, std::uint64_t seed)
{
	require(search.rms_tolerance > 0.0, "rms tolerance must be > 0");
	require(search.start_ns > 0.0 && search.cap_ns > search.start_ns,
	        "window search range is empty");

	const auto rms_at = [&](double tau_s) {
		SamplingPolicy policy{tau_s, search.settle_ns};
		return measure_activation_curve(params, policy, sweep, seed,
		                                search.ensembles)
		    .rms_error;
	};

	// Bracket by doubling, then bisect to ~0.5%.
	double lo = 0.0;
	double hi = search.start_ns;
	while (rms_at(hi) > search.rms_tolerance) {
		lo = hi;
		hi *= 2.0;
		if (hi > search.cap_ns) {
			throw WindowCapExceeded(search.cap_ns);
		}
	}
	while (hi - lo > 0.005 * hi) {
		const double mid = 0.5 * (lo + hi);
		if (rms_at(mid) <= search.rms_tolerance) {
			hi = mid;
		}
		else {
			lo = mid;
		}
	}
	return hi;
}

double compensating_resistor_kohm(double eb_max_kt, double target_eb_kt,
                                  double r0_kohm)
{
	require(target_eb_kt >= 0.0, "target barrier must be >= 0");
	require(r0_kohm > 0.0, "r0 must be > 0");
	if (target_eb_kt >= eb_max_kt) {
		return kNoFeedback;  // already within tolerance
	}
	return r0_kohm * eb_max_kt / (eb_max_kt - target_eb_kt);
}

double feedback_speedup(double eb_kt, double rf_kohm, double r0_kohm)
{
	const double eb_eff =
	    std::max(0.0, effective_barrier_kt(eb_kt, rf_kohm, r0_kohm));
	return fluctuation_timescale_ns(eb_kt, 1.0) /
	       fluctuation_timescale_ns(eb_eff, 1.0);
}

ResistorFit fit_resistor_table(const std::vector<double> &eb_levels_kt,
                               const std::vector<double> &rf_table_kohm)
{
	require(eb_levels_kt.size() == rf_table_kohm.size() &&
	            !eb_levels_kt.empty(),
	        "resistor table and barrier levels must match");
	double eb_min = eb_levels_kt.front();
	for (double eb : eb_levels_kt) {
		require(eb > 0.0, "barrier levels must be > 0");
		eb_min = std::min(eb_min, eb);
	}

	// SSE(target) with r0 profiled out in closed form. The model can only
	// produce resistances increasing with eb for negative targets, so the
	// grid spans well below zero; physically meaningful fits near the
	// boundary are reported as-is with their residuals.
	const auto sse_at = [&](double target, double &r0_out) {
		double num = 0.0;
		double den = 0.0;
		for (std::size_t i = 0; i < eb_levels_kt.size(); ++i) {
			const double w = eb_levels_kt[i] / (eb_levels_kt[i] - target);
			num += w * rf_table_kohm[i];
			den += w * w;
		}
		const double r0 = num / den;
		double sse = 0.0;
		for (std::size_t i = 0; i < eb_levels_kt.size(); ++i) {
			const double w = eb_levels_kt[i] / (eb_levels_kt[i] - target);
			const double res = r0 * w - rf_table_kohm[i];
			sse += res * res;
		}
		r0_out = r0;
		return sse;
	};

	const double t_lo = -30.0;
	const double t_hi = 0.9 * eb_min;
	const int grid = 6000;
	double best_t = t_lo;
	double best_r0 = 0.0;
	double best_sse = std::numeric_limits<double>::infinity();
	for (int k = 0; k <= grid; ++k) {
		const double t = t_lo + (t_hi - t_lo) * k / grid;
		double r0 = 0.0;
		const double sse = sse_at(t, r0);
		if (sse < best_sse) {
			best_sse = sse;
			best_t = t;
			best_r0 = r0;
		}
	}

	ResistorFit fit;
	fit.r0_kohm = best_r0;
	fit.target_kt = best_t;
	for (std::size_t i = 0; i < eb_levels_kt.size(); ++i) {
		const double model =
		    best_r0 * eb_levels_kt[i] / (eb_levels_kt[i] - best_t);
		fit.fitted_kohm.push_back(model);
		fit.residuals_kohm.push_back(model - rf_table_kohm[i]);
	}
	fit.rmse_kohm = std::sqrt(best_sse / eb_levels_kt.size());
	return fit;
}

void PowerModel::validate() const
{
	require(p_static_uw > 0.0, "p_static_uw must be > 0");
	require(samples_per_inference > 0.0, "samples_per_inference must be > 0");
}

EnergyReport pbit_energy(const SamplingPolicy &policy, const PbitParams &params,
                         const PowerModel &power)
{
	policy.validate();
	power.validate();

	const double active_ns =
	    (policy.settle_ns + policy.tau_s_ns) * power.samples_per_inference;
	// uW * ns = 1e-3 pJ
	const double static_pj = power.p_static_uw * active_ns * 1e-3;
	double feedback_pj = 0.0;
	if (params.rf_kohm != kNoFeedback) {
		const double p_feedback_uw =
		    1e3 * params.vdd_volts * params.vdd_volts / params.rf_kohm;
		feedback_pj = p_feedback_uw * active_ns * 1e-3;
	}

	EnergyReport report;
	report.static_pj = static_pj;
	report.feedback_pj = feedback_pj;
	report.per_pbit_pj = static_pj + feedback_pj;
	report.network_pj = report.per_pbit_pj;
	report.overhead_vs_baseline = report.per_pbit_pj / static_pj;
	return report;
}

EnergyReport dbn_energy(const std::vector<int> &topology,
                        const PbitParams &params, const PowerModel &power,
                        const SamplingPolicy &policy, double rf_kohm,
                        const SamplingPolicy *baseline_policy)
{
	require(topology.size() >= 2, "topology needs at least two layers");
	std::size_t n_pbits = 0;
	for (std::size_t l = 1; l < topology.size(); ++l) {
		require(topology[l] > 0, "layer sizes must be > 0");
		n_pbits += static_cast<std::size_t>(topology[l]);
	}

	PbitParams device = params;
	device.rf_kohm = rf_kohm;
	EnergyReport per = pbit_energy(policy, device, power);

	EnergyReport report = per;
	report.network_pj = per.per_pbit_pj * static_cast<double>(n_pbits);
	report.static_pj = per.static_pj * static_cast<double>(n_pbits);
	report.feedback_pj = per.feedback_pj * static_cast<double>(n_pbits);
	if (baseline_policy != nullptr) {
		PbitParams bare = params;
		bare.rf_kohm = kNoFeedback;
		const EnergyReport base = pbit_energy(*baseline_policy, bare, power);
		report.overhead_vs_baseline =
		    per.per_pbit_pj / base.per_pbit_pj;
	}
	return report;
}

}  // namespace pbit
