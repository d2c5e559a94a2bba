#include <doctest.h>

#include <cmath>
#include <thread>
#include <vector>

#include "pbit/device.hpp"
#include "pbit/rng.hpp"
#include "stat_oracles.hpp"

using namespace pbit;

TEST_SUITE_BEGIN("device");

TEST_CASE("mtj conductance follows the magnetization")
{
	PbitParams params;
	params.tmr = 1.0;
	params.g0_siemens = 1.0;

	CHECK(mtj_conductance(params, 0.0) == doctest::Approx(1.0));  // midpoint
	CHECK(mtj_conductance(params, -1.0) == doctest::Approx(2.0 / 3.0));

	// G(+1) = G_P and G(-1) = G_AP when (tmr, g0) are derived from a
	// (G_P, G_AP) pair.
	const double gp = 7.3e-5;
	const double gap = 3.1e-5;
	params.tmr = (gp - gap) / gap;
	params.g0_siemens = 0.5 * (gp + gap);
	CHECK(mtj_conductance(params, +1.0) == doctest::Approx(gp).epsilon(1e-12));
	CHECK(mtj_conductance(params, -1.0) == doctest::Approx(gap).epsilon(1e-12));
}

TEST_CASE("drain voltage equals the conductance divider")
{
	PbitParams params;

	SUBCASE("transistor off pins the drain to the supply")
	{
		params.beta = 0.0;
		CHECK(drain_voltage(params, +1.0) == doctest::Approx(params.vdd_volts));
		CHECK(drain_voltage(params, -1.0) == doctest::Approx(params.vdd_volts));
	}

	SUBCASE("strong transistor shorts the drain")
	{
		params.beta = 1e9;
		CHECK(drain_voltage(params, +1.0) < 1e-6);
	}

	SUBCASE("closed form matches the divider over random parameters")
	{
		Rng rng(20240811);
		for (int i = 0; i < 1000; ++i) {
			params.tmr = rng.uniform(0.05, 6.0);
			params.beta = rng.uniform(0.01, 10.0);
			params.g0_siemens = rng.uniform(1e-6, 1e-3);
			const double m_z = rng.bernoulli(0.5) ? 1.0 : -1.0;

			const double g_mtj = mtj_conductance(params, m_z);
			const double divider = params.vdd_volts * g_mtj /
			                       (g_mtj + params.beta * params.g0_siemens);
			const double closed = drain_voltage(params, m_z);
			CHECK(std::abs(closed - divider) <= 1e-12 * std::abs(divider));
		}
	}
}

TEST_CASE("binary output inverts the drain around vdd/2")
{
	PbitParams params;

	params.beta = 0.0;
	CHECK(binary_output(params, -1.0) == 0);  // drain = vdd

	params.beta = 1.0;
	params.tmr = 1.0;
	// AP: drain/vdd = 2/5 < 1/2; P: 4/7 > 1/2.
	CHECK(binary_output(params, -1.0) == 1);
	CHECK(binary_output(params, +1.0) == 0);
	CHECK(output_bit(MagState::AP) == 1);
	CHECK(output_bit(MagState::P) == 0);

	// For TMR = 1 the divider separates the states whenever
	// beta is inside (2/3, 4/3).
	for (double beta : {0.70, 1.0, 1.30}) {
		params.beta = beta;
		CHECK(binary_output(params, -1.0) == 1);
		CHECK(binary_output(params, +1.0) == 0);
	}
	params.beta = 0.5;  // below the separating range: both states read 0
	CHECK(binary_output(params, -1.0) == 0);
}

TEST_CASE("energy barrier from geometry")
{
	GeometrySpec geom;  // defaults are calibrated to 1 kT at 300 K

	CHECK(energy_barrier_kt(geom) == doctest::Approx(1.0).epsilon(1e-6));

	SUBCASE("vanishing diameter removes the barrier")
	{
		GeometrySpec flat = geom;
		flat.d_nm = 0.0;
		CHECK(energy_barrier_kt(flat) == 0.0);
	}

	SUBCASE("scaling laws")
	{
		GeometrySpec wide = geom;
		wide.d_nm *= 2.0;
		CHECK(energy_barrier_kt(wide) ==
		      doctest::Approx(4.0 * energy_barrier_kt(geom)).epsilon(1e-12));

		GeometrySpec strong = geom;
		strong.hk_a_per_m *= 2.0;
		CHECK(energy_barrier_kt(strong) ==
		      doctest::Approx(2.0 * energy_barrier_kt(geom)).epsilon(1e-12));

		GeometrySpec root2 = geom;
		root2.d_nm *= std::sqrt(2.0);
		CHECK(energy_barrier_kt(root2) == doctest::Approx(2.0).epsilon(1e-6));
	}
}

TEST_CASE("fluctuation time scale is Arrhenius")
{
	CHECK(fluctuation_timescale_ns(0.0, 1.0) == doctest::Approx(1.0));
	CHECK(fluctuation_timescale_ns(1.5, 1.0) ==
	      doctest::Approx(4.4816890703).epsilon(1e-9));
	CHECK(fluctuation_timescale_ns(2.0, 3.0) /
	          fluctuation_timescale_ns(0.5, 3.0) ==
	      doctest::Approx(std::exp(1.5)).epsilon(1e-12));
}

TEST_CASE("effective barrier under feedback")
{
	CHECK(effective_barrier_kt(1.7, kNoFeedback, 107.3) == 1.7);
	CHECK(effective_barrier_kt(1.7, 107.3, 107.3) ==
	      doctest::Approx(0.0).epsilon(1e-12));

	// Composition with the Arrhenius law: tau(eff)/tau(eb) = exp(-eb*r0/rf),
	// on the unclamped value.
	Rng rng(7);
	for (int i = 0; i < 200; ++i) {
		const double eb = rng.uniform(0.0, 3.0);
		const double rf = rng.uniform(20.0, 400.0);
		const double r0 = rng.uniform(20.0, 400.0);
		const double ratio =
		    fluctuation_timescale_ns(effective_barrier_kt(eb, rf, r0), 1.0) /
		    fluctuation_timescale_ns(eb, 1.0);
		CHECK(ratio == doctest::Approx(std::exp(-eb * r0 / rf)).epsilon(1e-9));
	}
}

TEST_CASE("input bias probability is the logistic activation")
{
	PbitParams params;
	CHECK(input_bias_probability(params, 0.4) == 0.5);
	CHECK(input_bias_probability(params, 0.0) < 1e-4);
	CHECK(input_bias_probability(params, 0.8) > 1.0 - 1e-4);
	// v_slope calibration pins the active-region endpoints.
	CHECK(input_bias_probability(params, 0.3) ==
	      doctest::Approx(0.05).epsilon(1e-9));
	CHECK(input_bias_probability(params, 0.5) ==
	      doctest::Approx(0.95).epsilon(1e-9));

	double last = -1.0;
	for (double v = 0.0; v <= 0.8001; v += 0.01) {
		const double p = input_bias_probability(params, v);
		CHECK(p > last);
		last = p;
	}
}

TEST_CASE("dwell means satisfy the occupancy and harmonic identities")
{
	PbitParams params;

	SUBCASE("symmetric case")
	{
		params.tau0_ns = 2.0;
		const DwellMeans means = dwell_means(params, 0.4);
		CHECK(means.state1_ns == doctest::Approx(4.0));
		CHECK(means.state0_ns == doctest::Approx(4.0));
	}

	SUBCASE("p = 0.9")
	{
		const double v_in = 0.4 + params.v_slope_volts * std::log(9.0);
		const DwellMeans means = dwell_means(params, v_in);
		CHECK(means.state1_ns == doctest::Approx(10.0).epsilon(1e-9));
		CHECK(means.state0_ns == doctest::Approx(10.0 / 9.0).epsilon(1e-9));
	}

	SUBCASE("identities hold across the input range")
	{
		Rng rng(3);
		for (int i = 0; i < 200; ++i) {
			const double v_in = rng.uniform(0.05, 0.75);
			params.eb_kt = rng.uniform(0.0, 2.0);
			const double p = input_bias_probability(params, v_in);
			const double tau =
			    fluctuation_timescale_ns(params.eb_kt, params.tau0_ns);
			const DwellMeans means = dwell_means(params, v_in);

			const double occupancy =
			    means.state1_ns / (means.state1_ns + means.state0_ns);
			CHECK(occupancy == doctest::Approx(p).epsilon(1e-12));
			const double harmonic =
			    1.0 / (1.0 / means.state1_ns + 1.0 / means.state0_ns);
			CHECK(harmonic == doctest::Approx(tau).epsilon(1e-12));
		}
	}

	SUBCASE("degenerate inputs stay finite")
	{
		const DwellMeans means = dwell_means(params, 100.0);  // p -> 1
		CHECK(std::isfinite(means.state1_ns));
		CHECK(means.state0_ns > 0.0);
	}
}

TEST_CASE("telegraph traces")
{
	PbitParams params;

	SUBCASE("reproducible from the seed, also across threads")
	{
		const auto reference = simulate_trace(params, 0.45, 500.0, 42);
		std::vector<TelegraphTrace> copies(4);
		std::vector<std::thread> pool;
		for (auto &slot : copies) {
			pool.emplace_back([&] { slot = simulate_trace(params, 0.45, 500.0, 42); });
		}
		for (auto &t : pool) {
			t.join();
		}
		for (const auto &copy : copies) {
			REQUIRE(copy.segments.size() == reference.segments.size());
			for (std::size_t i = 0; i < copy.segments.size(); ++i) {
				CHECK(copy.segments[i].state == reference.segments[i].state);
				CHECK(copy.segments[i].dwell_ns ==
				      reference.segments[i].dwell_ns);
			}
		}
	}

	SUBCASE("segments alternate and sum to the duration")
	{
		const auto trace = simulate_trace(params, 0.42, 300.0, 9);
		double total = 0.0;
		for (std::size_t i = 0; i < trace.segments.size(); ++i) {
			CHECK(trace.segments[i].dwell_ns > 0.0);
			total += trace.segments[i].dwell_ns;
			if (i > 0) {
				CHECK(trace.segments[i].state !=
				      trace.segments[i - 1].state);
			}
		}
		CHECK(total == doctest::Approx(trace.total_ns).epsilon(1e-12));
	}

	SUBCASE("short traces are usually a single dwell")
	{
		params.eb_kt = 2.0;  // tau ~ 7.4 ns
		int single = 0;
		for (std::uint64_t seed = 0; seed < 200; ++seed) {
			if (simulate_trace(params, 0.4, 0.05, seed).segments.size() == 1) {
				++single;
			}
		}
		CHECK(single >= 190);
	}

	SUBCASE("long-run occupancy approaches the stationary probability")
	{
		params.eb_kt = 1.0;
		const double p = input_bias_probability(params, 0.43);
		const double tau = fluctuation_timescale_ns(1.0, 1.0);
		const double duration = 2e5 * tau;
		const auto trace = simulate_trace(params, 0.43, duration, 77);
		const double occupancy = sample_window(trace, 0.0, duration);
		const double sigma = std::sqrt(2.0 * p * (1 - p) * tau / duration);
		CHECK(std::abs(occupancy - p) < 3.0 * sigma + 1e-4);
	}

	SUBCASE("dwell distributions are exponential with the configured means")
	{
		const DwellMeans means = dwell_means(params, 0.44);
		const auto trace = simulate_trace(params, 0.44, 1.2e5, 4242);
		std::vector<double> dwell1;
		std::vector<double> dwell0;
		for (std::size_t i = 0; i + 1 < trace.segments.size(); ++i) {
			(output_bit(trace.segments[i].state) ? dwell1 : dwell0)
			    .push_back(trace.segments[i].dwell_ns);
		}
		REQUIRE(dwell1.size() > 10000);
		REQUIRE(dwell0.size() > 10000);
		dwell1.resize(10000);
		dwell0.resize(10000);
		const double p1 = oracle::ks_p_value(
		    oracle::ks_statistic_exponential(dwell1, means.state1_ns), 10000);
		const double p0 = oracle::ks_p_value(
		    oracle::ks_statistic_exponential(dwell0, means.state0_ns), 10000);
		CHECK(p1 > 0.01);
		CHECK(p0 > 0.01);
	}
}

TEST_CASE("sample_window")
{
	PbitParams params;
	const auto trace = simulate_trace(params, 0.4, 200.0, 5);

	SUBCASE("full coverage of one state-1 segment reads 1.0")
	{
		double t = 0.0;
		for (const auto &seg : trace.segments) {
			if (output_bit(seg.state) && seg.dwell_ns > 0.2) {
				const double frac =
				    sample_window(trace, t + 0.01, t + seg.dwell_ns - 0.01);
				CHECK(frac == doctest::Approx(1.0));
				break;
			}
			t += seg.dwell_ns;
		}
	}

	SUBCASE("two half windows average to the full window")
	{
		const double full = sample_window(trace, 20.0, 60.0);
		const double left = sample_window(trace, 20.0, 40.0);
		const double right = sample_window(trace, 40.0, 60.0);
		CHECK(0.5 * (left + right) == doctest::Approx(full).epsilon(1e-12));
	}

	SUBCASE("bad windows are rejected")
	{
		CHECK_THROWS_AS(sample_window(trace, 10.0, 10.0),
		                std::invalid_argument);
		CHECK_THROWS_AS(sample_window(trace, 50.0, 10.0),
		                std::invalid_argument);
		CHECK_THROWS_AS(sample_window(trace, 0.0, 201.0),
		                std::invalid_argument);
	}
}

TEST_CASE("sample_hold matches the trace-based computation")
{
	PbitParams params;
	params.eb_kt = 0.8;

	for (std::uint64_t seed = 1; seed <= 20; ++seed) {
		Rng rng_a(seed);
		Rng rng_b(seed);
		MagState state = seed % 2 ? MagState::P : MagState::AP;

		const double settle = 0.6;
		const double window = 3.0;
		MagState hold_state = state;
		const double direct = sample_hold(params, 0.37, settle, window,
		                                  hold_state, rng_a);
		const auto trace = simulate_trace_from(params, 0.37, settle + window,
		                                       state, rng_b);
		const double via_trace =
		    sample_window(trace, settle, settle + window);
		CHECK(direct == doctest::Approx(via_trace).epsilon(1e-12));
		CHECK(hold_state == trace.final_state());
	}
}

TEST_CASE("parameter validation")
{
	PbitParams params;
	CHECK_NOTHROW(params.validate());
	params.tmr = 0.0;
	CHECK_THROWS_AS(params.validate(), std::invalid_argument);

	GeometrySpec geom;
	geom.tf_nm = -1.0;
	CHECK_THROWS_AS(geom.validate(), std::invalid_argument);

	CHECK_THROWS_AS(simulate_trace(PbitParams{}, 0.4, 0.0, 1),
	                std::invalid_argument);
}

TEST_SUITE_END();
