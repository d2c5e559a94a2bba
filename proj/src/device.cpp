#include "pbit/device.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace pbit {

namespace {

constexpr double kMu0 = 1.25663706212e-6;  // vacuum permeability, H/m
constexpr double kBoltzmann = 1.380649e-23;  // J/K
constexpr double kPi = 3.14159265358979323846;

// Occupancy clamp so degenerate inputs (p = 0 or 1) keep finite dwells.
constexpr double kProbEpsilon = 1e-9;

void require(bool ok, const char *what)
{
	if (!ok) {
		throw std::invalid_argument(std::string("pbit: ") + what);
	}
}

}  // namespace

void PbitParams::validate() const
{
	require(tmr > 0.0, "tmr must be > 0");
	require(g0_siemens > 0.0, "g0_siemens must be > 0");
	require(beta >= 0.0, "beta must be >= 0");
	require(vdd_volts > 0.0, "vdd_volts must be > 0");
	require(eb_kt >= 0.0, "eb_kt must be >= 0");
	require(tau0_ns > 0.0, "tau0_ns must be > 0");
	require(v_slope_volts > 0.0, "v_slope_volts must be > 0");
	require(rf_kohm > 0.0, "rf_kohm must be > 0");
	require(r0_kohm > 0.0, "r0_kohm must be > 0");
}

void GeometrySpec::validate() const
{
	require(hk_a_per_m > 0.0, "hk_a_per_m must be > 0");
	require(ms_a_per_m > 0.0, "ms_a_per_m must be > 0");
	require(d_nm > 0.0, "d_nm must be > 0");
	require(tf_nm > 0.0, "tf_nm must be > 0");
	require(temperature_k > 0.0, "temperature_k must be > 0");
}

double mtj_conductance(const PbitParams &params, double m_z)
{
	return params.g0_siemens * (1.0 + m_z * params.tmr / (2.0 + params.tmr));
}

double drain_voltage(const PbitParams &params, double m_z)
{
	const double a = 2.0 + params.tmr;
	return params.vdd_volts * (a + params.tmr * m_z) /
	       (a * (1.0 + params.beta) + params.tmr * m_z);
}

int binary_output(const PbitParams &params, double m_z)
{
	return drain_voltage(params, m_z) < 0.5 * params.vdd_volts ? 1 : 0;
}

double energy_barrier_kt(const GeometrySpec &geom)
{
	const double d_m = geom.d_nm * 1e-9;
	const double tf_m = geom.tf_nm * 1e-9;
	const double volume = kPi * 0.25 * d_m * d_m * tf_m;
	const double barrier_j =
	    0.5 * kMu0 * geom.hk_a_per_m * geom.ms_a_per_m * volume;
	return barrier_j / (kBoltzmann * geom.temperature_k);
}

double fluctuation_timescale_ns(double eb_eff_kt, double tau0_ns)
{
	return tau0_ns * std::exp(eb_eff_kt);
}

double effective_barrier_kt(double eb_kt, double rf_kohm, double r0_kohm)
{
	if (rf_kohm == kNoFeedback) {
		return eb_kt;
	}
	return eb_kt * (1.0 - r0_kohm / rf_kohm);
}

double input_bias_probability(const PbitParams &params, double v_in_volts)
{
	const double z =
	    (v_in_volts - 0.5 * params.vdd_volts) / params.v_slope_volts;
	return 1.0 / (1.0 + std::exp(-z));
}

DwellMeans dwell_means(const PbitParams &params, double v_in_volts)
{
	const double p = std::clamp(input_bias_probability(params, v_in_volts),
	                            kProbEpsilon, 1.0 - kProbEpsilon);
	const double eb_eff = std::max(
	    0.0, effective_barrier_kt(params.eb_kt, params.rf_kohm, params.r0_kohm));
	const double tau = fluctuation_timescale_ns(eb_eff, params.tau0_ns);
	return DwellMeans{tau / (1.0 - p), tau / p};
}

TelegraphTrace simulate_trace_from(const PbitParams &params, double v_in_volts,
                                   double duration_ns, MagState initial,
                                   Rng &rng)
{
	if (duration_ns <= 0.0) {
		throw std::invalid_argument("pbit: trace duration must be > 0");
	}
	const DwellMeans means = dwell_means(params, v_in_volts);

	TelegraphTrace trace;
	trace.total_ns = duration_ns;
	MagState state = initial;
	double t = 0.0;
	for (;;) {
		const double mean =
		    output_bit(state) ? means.state1_ns : means.state0_ns;
		const double dwell = rng.exponential(mean);
		if (t + dwell >= duration_ns) {
			// Truncated final dwell; the state persists to the end.
			trace.segments.push_back({state, duration_ns - t});
			break;
		}
		trace.segments.push_back({state, dwell});
		t += dwell;
		state = flip(state);
	}
	return trace;
}

TelegraphTrace simulate_trace(const PbitParams &params, double v_in_volts,
                              double duration_ns, std::uint64_t seed)
{
	Rng rng(seed);
	const double p = input_bias_probability(params, v_in_volts);
	const MagState initial = rng.bernoulli(p) ? MagState::AP : MagState::P;
	TelegraphTrace trace =
	    simulate_trace_from(params, v_in_volts, duration_ns, initial, rng);
	trace.seed = seed;
	return trace;
}

double sample_hold(const PbitParams &params, double v_in_volts,
                   double settle_ns, double tau_s_ns, MagState &state,
                   Rng &rng)
{
	if (tau_s_ns <= 0.0 || settle_ns < 0.0) {
		throw std::invalid_argument("pbit: bad sampling interval");
	}
	const DwellMeans means = dwell_means(params, v_in_volts);
	const double t1 = settle_ns + tau_s_ns;

	double t = 0.0;
	double in_state1 = 0.0;
	while (t < t1) {
		const double mean =
		    output_bit(state) ? means.state1_ns : means.state0_ns;
		const double dwell = rng.exponential(mean);
		const double seg_end = std::min(t + dwell, t1);
		if (output_bit(state) && seg_end > settle_ns) {
			in_state1 += seg_end - std::max(t, settle_ns);
		}
		if (t + dwell >= t1) {
			break;  // hold expires mid-dwell; the state persists
		}
		t += dwell;
		state = flip(state);
	}
	return in_state1 / tau_s_ns;
}

double sample_window(const TelegraphTrace &trace, double t_start_ns,
                     double t_end_ns)
{
	if (!(t_end_ns > t_start_ns)) {
		throw std::invalid_argument("pbit: empty sampling window");
	}
	const double slack = 1e-9 * std::max(1.0, trace.total_ns);
	if (t_start_ns < -slack || t_end_ns > trace.total_ns + slack) {
		throw std::invalid_argument("pbit: sampling window outside trace");
	}

	double in_state1 = 0.0;
	double t = 0.0;
	for (const auto &seg : trace.segments) {
		const double seg_start = t;
		const double seg_end = t + seg.dwell_ns;
		if (seg_end > t_start_ns && seg_start < t_end_ns &&
		    output_bit(seg.state)) {
			in_state1 += std::min(seg_end, t_end_ns) -
			             std::max(seg_start, t_start_ns);
		}
		t = seg_end;
		if (seg_start >= t_end_ns) {
			break;
		}
	}
	return in_state1 / (t_end_ns - t_start_ns);
}

}  // namespace pbit
