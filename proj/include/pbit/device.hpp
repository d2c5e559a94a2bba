#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "pbit/rng.hpp"

// Behavioral model of a single MRAM p-bit neuron: a low-energy-barrier MTJ
// in series with an NMOS transistor, read out through an inverter. The free
// layer magnetization fluctuates thermally between the parallel (P) and
// anti-parallel (AP) states; the input voltage biases the stationary
// occupancy, and the energy barrier sets the fluctuation time scale.

namespace pbit {

// "No feedback resistor": open feedback path.
inline constexpr double kNoFeedback = std::numeric_limits<double>::infinity();

// Logistic slope of the activation, from pinning p = 0.05 at 0.3 V and
// p = 0.95 at 0.5 V (0.1 V / ln 19 ~= 34 mV).
inline const double kDefaultVSlope = 0.1 / std::log(19.0);

// Feedback strength constant sized so a 100 kOhm resistor fully tilts a
// 1.5 kT barrier (ln 5 / 1.5 per kOhm ratio).
inline const double kDefaultR0 = 100.0 * std::log(5.0) / 1.5;

struct PbitParams {
	double tmr = 1.0;           // tunneling magnetoresistance ratio, > 0
	double g0_siemens = 5e-5;   // average MTJ conductance (G_P + G_AP)/2
	double beta = 1.0;          // transistor-to-MTJ conductance ratio G_T/G_0
	double vdd_volts = 0.8;     // supply voltage
	double eb_kt = 0.0;         // energy barrier in units of kT
	double tau0_ns = 1.0;       // attempt time
	double v_slope_volts = kDefaultVSlope;
	double rf_kohm = kNoFeedback;  // feedback resistor; kNoFeedback = open
	double r0_kohm = kDefaultR0;   // feedback strength constant

	// Throws std::invalid_argument when a field is out of range.
	void validate() const;
};

// Free layer magnetization state. m_z(P) = +1, m_z(AP) = -1.
enum class MagState : std::uint8_t { P = 0, AP = 1 };

constexpr double mz(MagState s) noexcept
{
	return s == MagState::P ? +1.0 : -1.0;
}

constexpr MagState flip(MagState s) noexcept
{
	return s == MagState::P ? MagState::AP : MagState::P;
}

// Canonical digital read of the magnetization: the AP state (low MTJ
// conductance) pulls the drain low and the inverter emits 1. Valid for
// moderate beta; binary_output() evaluates the actual divider.
constexpr int output_bit(MagState s) noexcept
{
	return s == MagState::AP ? 1 : 0;
}

// One realized magnetization fluctuation: alternating dwell segments.
struct TelegraphTrace {
	struct Segment {
		MagState state;
		double dwell_ns;
	};

	std::vector<Segment> segments;
	double total_ns = 0.0;
	std::uint64_t seed = 0;

	MagState final_state() const { return segments.back().state; }
	std::size_t transitions() const
	{
		return segments.empty() ? 0 : segments.size() - 1;
	}
};

// Nanomagnet free-layer geometry, for computing the barrier from first
// principles.
struct GeometrySpec {
	double hk_a_per_m = 26229.185774710844;  // anisotropy field H_K
	double ms_a_per_m = 8.0e5;     // saturation magnetization M_S
	double d_nm = 20.0;            // free layer diameter
	double tf_nm = 1.0;            // free layer thickness
	double temperature_k = 300.0;

	void validate() const;
};

// MTJ conductance G_0 * [1 + m_z * TMR / (2 + TMR)].
double mtj_conductance(const PbitParams &params, double m_z);

// Drain node voltage of the MTJ/transistor divider,
// V_DD * [(2+TMR) + TMR*m_z] / [(2+TMR)(1+beta) + TMR*m_z].
double drain_voltage(const PbitParams &params, double m_z);

// Inverter output: 1 when the drain sits below V_DD/2, else 0.
int binary_output(const PbitParams &params, double m_z);

// Barrier height 1/2 * mu0 * H_K * M_S * V / (k_B T), in kT units.
double energy_barrier_kt(const GeometrySpec &geom);

// Arrhenius fluctuation time scale tau = tau0 * exp(E_B/kT). Accepts
// negative effective barriers (tau < tau0); callers that feed physical
// rates clamp the barrier at zero first.
double fluctuation_timescale_ns(double eb_eff_kt, double tau0_ns);

// Effective barrier under resistive feedback, E_B * (1 - R_0/R_f),
// unclamped. rf_kohm = kNoFeedback leaves the barrier untouched.
double effective_barrier_kt(double eb_kt, double rf_kohm, double r0_kohm);

// Stationary probability of the output being 1 for a given input voltage:
// logistic around V_DD/2 with slope v_slope.
double input_bias_probability(const PbitParams &params, double v_in_volts);

struct DwellMeans {
	double state1_ns;  // mean dwell with output 1 (AP)
	double state0_ns;  // mean dwell with output 0 (P)
};

// Per-state mean dwell times. Constructed so that the stationary occupancy
// of state 1 equals input_bias_probability and the harmonic combination
// (1/tau1 + 1/tau0)^-1 equals the Arrhenius time scale of the effective
// barrier (clamped at zero).
DwellMeans dwell_means(const PbitParams &params, double v_in_volts);

// Alternating-renewal telegraph simulation over `duration_ns`, starting
// from `initial` and drawing exponential dwells from `rng`. The final
// dwell is truncated at the duration. Continues the caller's stream, so
// consecutive calls model one uninterrupted fluctuation.
TelegraphTrace simulate_trace_from(const PbitParams &params, double v_in_volts,
                                   double duration_ns, MagState initial,
                                   Rng &rng);

// Same, but self-seeded: the initial state is drawn from the stationary
// distribution Bernoulli(p). Deterministic given the seed.
TelegraphTrace simulate_trace(const PbitParams &params, double v_in_volts,
                              double duration_ns, std::uint64_t seed);

// Fraction of [t_start, t_end] spent with output 1. Throws on an empty or
// out-of-range window.
double sample_window(const TelegraphTrace &trace, double t_start_ns,
                     double t_end_ns);

// One sampling interval of a continuously running p-bit: hold v_in for
// settle + tau_s starting from *state, return the time-in-1 fraction over
// the trailing tau_s, and leave *state at the magnetization occupied when
// the hold expires. Equivalent to simulate_trace_from + sample_window but
// without materializing segments; used for staircase sweeps and network
// inference where the state persists between evaluations.
double sample_hold(const PbitParams &params, double v_in_volts,
                   double settle_ns, double tau_s_ns, MagState &state,
                   Rng &rng);

}  // namespace pbit
