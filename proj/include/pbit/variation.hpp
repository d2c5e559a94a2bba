#pragma once

#include <cstdint>
#include <vector>

#include "pbit/device.hpp"
#include "pbit/rng.hpp"

// Process variation: populations of p-bit devices whose energy barriers are
// perturbed either directly (uniform draw up to a maximum variation) or by
// perturbing the free-layer geometry and propagating through the barrier
// formula.

namespace pbit {

enum class VariationMode { DirectBarrier, Geometry };

struct VariationSpec {
	VariationMode mode = VariationMode::DirectBarrier;
	double eb_max_kt = 0.0;  // DirectBarrier: barriers drawn in [0, eb_max]
	double sigma_hk = 0.0;   // Geometry: fractional std-dev of H_K
	double sigma_d = 0.0;    // Geometry: fractional std-dev of the diameter
	GeometrySpec nominal_geometry{};
	std::uint64_t seed = 0;

	void validate() const;
};

struct DevicePopulation {
	std::vector<PbitParams> devices;
	VariationSpec spec;

	std::size_t size() const { return devices.size(); }
};

// Uniform barrier draw in [0, eb_max]. Requires DirectBarrier mode.
double draw_barrier(const VariationSpec &spec, Rng &rng);

// Gaussian fractional perturbation of H_K (linear effect) and diameter
// (quadratic effect), truncated at 0.1x nominal, propagated through the
// barrier formula. Requires Geometry mode.
double perturb_geometry(const VariationSpec &spec, Rng &rng);

// n copies of the template with per-device barriers drawn from the spec.
// Device i uses a counter-derived sub-seed, so the population is identical
// regardless of construction or iteration order.
DevicePopulation build_population(std::size_t n, const PbitParams &device_template,
                                  const VariationSpec &spec);

}  // namespace pbit
