#ifndef GWRL_UTIL_PARALLEL_H_
#define GWRL_UTIL_PARALLEL_H_

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace gwrl {

/// Splits [0, n) into min(workers, n) contiguous chunks and runs
/// fn(chunk, begin, end) for each, on threads when there is more than one.
/// Returns the number of chunks. Callers reduce per-chunk results in chunk
/// order, which keeps the outcome a function of the worker count only.
template <typename Fn>
std::size_t ParallelChunks(std::size_t n, int workers, Fn&& fn) {
  const std::size_t chunks =
      std::max<std::size_t>(1, std::min<std::size_t>(std::max(workers, 1), n));
  if (chunks == 1) {
    fn(std::size_t{0}, std::size_t{0}, n);
    return 1;
  }
  std::vector<std::thread> threads;
  threads.reserve(chunks);
  for (std::size_t w = 0; w < chunks; ++w) {
    threads.emplace_back([&fn, w, n, chunks] { fn(w, n * w / chunks, n * (w + 1) / chunks); });
  }
  for (auto& t : threads) t.join();
  return chunks;
}

}  // namespace gwrl

#endif  // GWRL_UTIL_PARALLEL_H_
