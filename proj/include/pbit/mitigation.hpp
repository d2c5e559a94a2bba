#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "pbit/device.hpp"

// Variation-tolerance mechanisms. Temporal redundancy: sweep the input
// staircase-wise over the active region, measure the realized activation
// over a sampling window per step, and grow the window until the curve is
// undistorted. Feedback: size the feedback resistor so the effective
// barrier of the worst-case device is pulled down to a small target.

namespace pbit {

struct SamplingPolicy {
	double tau_s_ns = 2.0;   // sampling window per input
	double settle_ns = 0.0;  // discarded transient before the window

	void validate() const;
};

struct SweepSpec {
	double v_start_volts = 0.30;
	double v_end_volts = 0.50;
	double v_step_volts = 0.02;
	int repeats = 64;  // staircase passes averaged per measurement

	void validate() const;
	int points() const;
	double v_at(int i) const { return v_start_volts + i * v_step_volts; }
};

struct DistortionPoint {
	double v_in_volts;
	double empirical_p;
	double ideal_p;
};

// Measured activation curve against the ideal logistic. rms_error is the
// tuning metric: the root mean square of per-ensemble mean errors, so its
// expectation is pinned by `repeats` and does not wash out as more
// ensembles are averaged (ensembles only sharpen the estimate). max_error
// is the largest per-ensemble point error, so rms_error <= max_error.
struct DistortionReport {
	std::vector<DistortionPoint> points;
	double rms_error = 0.0;
	double max_error = 0.0;
};

// Staircase measurement of the activation: the input walks the sweep grid
// in one continuous run per pass; each step holds its voltage for
// settle + tau_s and the output is monitored over the trailing tau_s. The
// magnetization carries over between steps, which is what distorts the
// curve when the window is short against the fluctuation time scale.
DistortionReport measure_activation_curve(const PbitParams &params,
                                          const SamplingPolicy &policy,
                                          const SweepSpec &sweep,
                                          std::uint64_t seed,
                                          int ensembles = 1);

struct WindowCapExceeded : std::runtime_error {
	explicit WindowCapExceeded(double cap_ns);
	double cap_ns;
};

struct WindowSearch {
	double rms_tolerance = 0.05;
	double settle_ns = 0.0;
	double cap_ns = 1e4;       // give up beyond this window
	int ensembles = 1;         // averaging depth of the rms estimate
	double start_ns = 0.5;     // first window tried
};

// Minimal tau_s whose measured rms distortion is within tolerance:
// geometric doubling to bracket, then bisection. Deterministic given the
// seed (all evaluations share it). Throws WindowCapExceeded when even the
// cap window stays distorted.
double tune_sampling_window(const PbitParams &params, const SweepSpec &sweep,
                            const WindowSearch &search, std::uint64_t seed);

// Feedback resistor pulling the effective barrier of a device with barrier
// eb_max down to target_eb: R_f = r0 * eb_max / (eb_max - target_eb).
// Returns kNoFeedback when no compensation is needed.
double compensating_resistor_kohm(double eb_max_kt, double target_eb_kt,
                                  double r0_kohm);

// tau(no feedback) / tau(feedback), with the effective barrier clamped at
// zero as in the dwell dynamics.
double feedback_speedup(double eb_kt, double rf_kohm, double r0_kohm);

// Least-squares fit of R_f = r0 * eb / (eb - target) against a measured
// resistor-per-tolerance table; target is profiled over a bounded grid and
// r0 solved in closed form per candidate. Residuals are diagnostics.
struct ResistorFit {
	double r0_kohm = 0.0;
	double target_kt = 0.0;
	std::vector<double> fitted_kohm;
	std::vector<double> residuals_kohm;  // fitted - table
	double rmse_kohm = 0.0;
};

ResistorFit fit_resistor_table(const std::vector<double> &eb_levels_kt,
                               const std::vector<double> &rf_table_kohm);

struct PowerModel {
	double p_static_uw = 44.444444444444443;  // static draw while sampling
	double samples_per_inference = 193.84615384615384;  // calibration constant

	void validate() const;
};

struct EnergyReport {
	double per_pbit_pj = 0.0;
	double network_pj = 0.0;
	double overhead_vs_baseline = 1.0;  // ratio, 1.0 = no overhead
	double static_pj = 0.0;
	double feedback_pj = 0.0;
};

// Energy of one p-bit over an inference under the given sampling policy.
// The static term integrates p_static over samples_per_inference windows;
// the feedback term adds vdd^2/R_f over the same time when feedback is
// configured. Overhead is against the same policy without feedback.
EnergyReport pbit_energy(const SamplingPolicy &policy, const PbitParams &params,
                         const PowerModel &power);

// Network-level energy: every non-input neuron is a p-bit running the same
// policy and feedback configuration. When baseline_policy is given, the
// overhead ratio is taken against a feedback-free network run at that
// policy instead.
EnergyReport dbn_energy(const std::vector<int> &topology,
                        const PbitParams &params, const PowerModel &power,
                        const SamplingPolicy &policy, double rf_kohm,
                        const SamplingPolicy *baseline_policy = nullptr);

}  // namespace pbit
