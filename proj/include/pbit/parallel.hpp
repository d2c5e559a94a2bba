#pragma once

#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace pbit {

// Runs fn(i) for i in [0, n) across worker threads. Each index is handled
// exactly once and workers only write to their own index's results, so the
// outcome is independent of the thread count and schedule.
template <typename Fn>
void parallel_for(std::size_t n, Fn &&fn, unsigned threads = 0)
{
	if (threads == 0) {
		threads = std::thread::hardware_concurrency();
	}
	if (threads <= 1 || n <= 1) {
		for (std::size_t i = 0; i < n; ++i) {
			fn(i);
		}
		return;
	}

	std::atomic<std::size_t> next{0};
	std::vector<std::thread> pool;
	pool.reserve(threads);
	for (unsigned t = 0; t < threads; ++t) {
		pool.emplace_back([&] {
			for (;;) {
				const std::size_t i = next.fetch_add(1);
				if (i >= n) {
					return;
				}
				fn(i);
			}
		});
	}
	for (auto &worker : pool) {
		worker.join();
	}
}

}  // namespace pbit
