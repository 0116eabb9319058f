#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace hr {

/// How per-path contributions are summed.
enum class Reduction {
    /// Fixed path blocks, partial sums merged by a fixed binary tree.
    /// Bitwise reproducible for any thread count.
    pairwise,
    /// One accumulator in path order.
    sequential,
    /// Per-thread accumulators fed from a shared block queue; merge order
    /// depends on scheduling.
    dynamic,
};

struct AssemblyOptions {
    std::size_t threads = 1;
    Reduction reduction = Reduction::pairwise;
    /// Paths per block; 0 picks a size from N and the buffer length.
    std::size_t block_size = 0;
};

/// Accumulates the contributions of paths [first, last) into `buffer`.
using PathAccumulator = std::function<void(std::size_t first, std::size_t last, std::span<double> buffer)>;

/// Sums `accumulate` over all paths into a zero-initialized buffer of `buffer_len` values.
[[nodiscard]] std::vector<double> reduce_over_paths(std::size_t n_paths, std::size_t buffer_len,
                                                    const AssemblyOptions& options,
                                                    const PathAccumulator& accumulate);

/// Runs body(first, last) over disjoint path ranges on up to `threads` threads.
void parallel_for_paths(std::size_t n_paths, std::size_t threads,
                        const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace hr
