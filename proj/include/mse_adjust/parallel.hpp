#ifndef MSE_ADJUST_PARALLEL_HPP_
#define MSE_ADJUST_PARALLEL_HPP_

#include <cstddef>
#include <functional>
#include <span>

namespace mse_adjust {

/// Worker count used when a call does not pass one explicitly. Initialised
/// from MSE_ADJUST_THREADS, falling back to the hardware concurrency.
std::size_t default_thread_count();
void set_default_thread_count(std::size_t threads);

/// Runs body(i) for i in [0, count). Results must be written to per-index
/// slots so the outcome does not depend on scheduling. If any call throws,
/// the exception from the lowest index is rethrown after all workers stop.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body,
                  std::size_t threads = 0);

/// Sum with a fixed binary tree shape, independent of thread count.
double pairwise_sum(std::span<const double> values);

}  // namespace mse_adjust

#endif  // MSE_ADJUST_PARALLEL_HPP_
