#include "hedgeratio/parallel.hpp"

#include "hedgeratio/simd.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

namespace hr {
namespace {

// Upper bound on the doubles held in block partials at once (64 MiB).
constexpr std::size_t kPartialBudget = std::size_t{1} << 23;
constexpr std::size_t kMinBlock = 1024;

std::size_t block_count(std::size_t n_paths, std::size_t buffer_len, std::size_t block_size) {
    if (block_size > 0) return (n_paths + block_size - 1) / block_size;
    const std::size_t by_paths = (n_paths + kMinBlock - 1) / kMinBlock;
    const std::size_t by_memory = std::max<std::size_t>(1, kPartialBudget / std::max<std::size_t>(1, buffer_len));
    return std::max<std::size_t>(1, std::min(by_paths, by_memory));
}

template <class Work>
void run_workers(std::size_t threads, Work&& work) {
    if (threads <= 1) {
        work(std::size_t{0});
        return;
    }
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            try {
                work(t);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        });
    }
    pool.clear();
    if (error) std::rethrow_exception(error);
}

}  // namespace

std::vector<double> reduce_over_paths(std::size_t n_paths, std::size_t buffer_len, const AssemblyOptions& options,
                                      const PathAccumulator& accumulate) {
    if (options.reduction == Reduction::sequential || n_paths == 0) {
        std::vector<double> out(buffer_len, 0.0);
        if (n_paths > 0) accumulate(0, n_paths, out);
        return out;
    }

    const std::size_t n_blocks = block_count(n_paths, buffer_len, options.block_size);
    const auto bounds = [&](std::size_t blk) {
        return std::pair{blk * n_paths / n_blocks, (blk + 1) * n_paths / n_blocks};
    };
    const std::size_t threads = std::clamp<std::size_t>(options.threads, 1, n_blocks);
    const auto& k = simd::active();
    std::atomic<std::size_t> next{0};

    if (options.reduction == Reduction::dynamic) {
        std::vector<std::vector<double>> partial(threads, std::vector<double>(buffer_len, 0.0));
        run_workers(threads, [&](std::size_t t) {
            for (std::size_t blk = next++; blk < n_blocks; blk = next++) {
                const auto [first, last] = bounds(blk);
                accumulate(first, last, partial[t]);
            }
        });
        for (std::size_t t = 1; t < threads; ++t) k.add(partial[t].data(), partial[0].data(), buffer_len);
        return std::move(partial[0]);
    }

    std::vector<std::vector<double>> partial(n_blocks);
    run_workers(threads, [&](std::size_t) {
        for (std::size_t blk = next++; blk < n_blocks; blk = next++) {
            partial[blk].assign(buffer_len, 0.0);
            const auto [first, last] = bounds(blk);
            accumulate(first, last, partial[blk]);
        }
    });
    for (std::size_t stride = 1; stride < n_blocks; stride *= 2) {
        for (std::size_t blk = 0; blk + stride < n_blocks; blk += 2 * stride) {
            k.add(partial[blk + stride].data(), partial[blk].data(), buffer_len);
            std::vector<double>().swap(partial[blk + stride]);
        }
    }
    return std::move(partial[0]);
}

void parallel_for_paths(std::size_t n_paths, std::size_t threads,
                        const std::function<void(std::size_t, std::size_t)>& body) {
    const std::size_t workers = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(1, n_paths));
    run_workers(workers, [&](std::size_t t) {
        const std::size_t first = t * n_paths / workers;
        const std::size_t last = (t + 1) * n_paths / workers;
        if (first < last) body(first, last);
    });
}

}  // namespace hr
