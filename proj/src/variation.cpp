#include "pbit/variation.hpp"

#include <algorithm>
#include <stdexcept>

namespace pbit {

void VariationSpec::validate() const
{
	if (eb_max_kt < 0.0) {
		throw std::invalid_argument("pbit: eb_max_kt must be >= 0");
	}
	if (sigma_hk < 0.0 || sigma_d < 0.0) {
		throw std::invalid_argument("pbit: sigmas must be >= 0");
	}
	if (mode == VariationMode::Geometry) {
		nominal_geometry.validate();
	}
}

double draw_barrier(const VariationSpec &spec, Rng &rng)
{
	if (spec.mode != VariationMode::DirectBarrier) {
		throw std::logic_error("pbit: draw_barrier requires DirectBarrier mode");
	}
	return rng.uniform(0.0, spec.eb_max_kt);
}

double perturb_geometry(const VariationSpec &spec, Rng &rng)
{
	if (spec.mode != VariationMode::Geometry) {
		throw std::logic_error("pbit: perturb_geometry requires Geometry mode");
	}
	// Truncate at 0.1x nominal so draws stay physical.
	const double hk_factor = std::max(0.1, 1.0 + spec.sigma_hk * rng.normal());
	const double d_factor = std::max(0.1, 1.0 + spec.sigma_d * rng.normal());

	GeometrySpec g = spec.nominal_geometry;
	g.hk_a_per_m *= hk_factor;
	g.d_nm *= d_factor;
	return energy_barrier_kt(g);
}

DevicePopulation build_population(std::size_t n, const PbitParams &device_template,
                                  const VariationSpec &spec)
{
	if (n == 0) {
		throw std::invalid_argument("pbit: population size must be > 0");
	}
	spec.validate();
	device_template.validate();

	DevicePopulation population;
	population.spec = spec;
	population.devices.reserve(n);
	for (std::size_t i = 0; i < n; ++i) {
		Rng rng(derive_seed(spec.seed, static_cast<std::uint64_t>(i)));
		PbitParams device = device_template;
		device.eb_kt = spec.mode == VariationMode::DirectBarrier
		                   ? draw_barrier(spec, rng)
		                   : perturb_geometry(spec, rng);
		population.devices.push_back(device);
	}
	return population;
}

}  // namespace pbit
