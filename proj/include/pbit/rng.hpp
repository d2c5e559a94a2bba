#pragma once

#include <cmath>
#include <cstdint>

// Deterministic random number generation. All stochastic results in this
// project must be reproducible from (arguments, seed) alone, independent of
// platform, scheduling and thread count, so we use explicit generators with
// fully specified output streams instead of std:: distributions (whose
// algorithms are implementation-defined).

namespace pbit {

// One SplitMix64 step. Advances `state` and returns the next output.
inline std::uint64_t splitmix64_next(std::uint64_t &state) noexcept
{
	std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
	z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
	z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
	return z ^ (z >> 31);
}

// Counter-based sub-seed derivation: hashes (seed, counters...) into a new
// seed. Used to split one master seed into per-device / per-trial streams
// that are stable under reordering and parallel execution.
inline std::uint64_t derive_seed(std::uint64_t seed) noexcept
{
	std::uint64_t s = seed;
	return splitmix64_next(s);
}

template <typename... Rest>
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t counter,
                                 Rest... rest) noexcept
{
	std::uint64_t s = seed + 0x9e3779b97f4a7c15ULL * (counter + 1);
	std::uint64_t mixed = splitmix64_next(s) ^ (counter * 0xda942042e4dd58b5ULL);
	if constexpr (sizeof...(rest) == 0) {
		std::uint64_t t = mixed;
		return splitmix64_next(t);
	}
	else {
		return derive_seed(splitmix64_next(s) ^ mixed, rest...);
	}
}

// xoshiro256++ (Blackman & Vigna). Small, fast, and good enough for
// Monte Carlo work; seeded through SplitMix64 as recommended.
class Rng {
public:
	explicit Rng(std::uint64_t seed) noexcept
	{
		std::uint64_t sm = seed;
		for (auto &word : state_) {
			word = splitmix64_next(sm);
		}
	}

	std::uint64_t next() noexcept
	{
		const std::uint64_t result =
		    rotl(state_[0] + state_[3], 23) + state_[0];
		const std::uint64_t t = state_[1] << 17;
		state_[2] ^= state_[0];
		state_[3] ^= state_[1];
		state_[1] ^= state_[2];
		state_[0] ^= state_[3];
		state_[2] ^= t;
		state_[3] = rotl(state_[3], 45);
		return result;
	}

	// Uniform double in [0, 1), 53-bit resolution.
	double uniform01() noexcept
	{
		return static_cast<double>(next() >> 11) * 0x1.0p-53;
	}

	// Uniform double in (0, 1]; safe as a log() argument.
	double uniform_pos() noexcept
	{
		return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
	}

	double uniform(double lo, double hi) noexcept
	{
		return lo + (hi - lo) * uniform01();
	}

	bool bernoulli(double p) noexcept { return uniform01() < p; }

	// Exponentially distributed with the given mean.
	double exponential(double mean) noexcept
	{
		return -mean * std::log(uniform_pos());
	}

	// Standard normal via Box-Muller (two uniforms per call, no state).
	double normal() noexcept
	{
		const double u1 = uniform_pos();
		const double u2 = uniform01();
		return std::sqrt(-2.0 * std::log(u1)) *
		       std::cos(6.283185307179586476925286766559 * u2);
	}

private:
	static std::uint64_t rotl(std::uint64_t x, int k) noexcept
	{
		return (x << k) | (x >> (64 - k));
	}

	std::uint64_t state_[4];
};

}  // namespace pbit
