#ifndef PHONEVAL_PARALLEL_HPP
#define PHONEVAL_PARALLEL_HPP

#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

namespace phoneval {

/// Number of workers to use for a request of `threads` (<= 0 means all
/// hardware threads).
inline int resolve_threads(int threads) {
  if (threads > 0) return threads;
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Splits [0, n) into at most `threads` contiguous chunks and runs
/// fn(chunk_index, begin, end) on each. The chunk layout depends only on n
/// and the thread count; callers that combine per-chunk results in chunk
/// order get schedule-independent output. The first exception is rethrown.
template <typename Fn>
void for_each_chunk(std::size_t n, int threads, Fn&& fn) {
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(resolve_threads(threads)),
                            std::max<std::size_t>(n, 1));
  if (workers <= 1) {
    fn(std::size_t{0}, std::size_t{0}, n);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = n * w / workers;
    const std::size_t end = n * (w + 1) / workers;
    pool.emplace_back([&, w, begin, end] {
      try {
        fn(w, begin, end);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

/// Number of chunks for_each_chunk will use.
inline std::size_t num_chunks(std::size_t n, int threads) {
  return std::min<std::size_t>(static_cast<std::size_t>(resolve_threads(threads)),
                               std::max<std::size_t>(n, 1));
}

}  // namespace phoneval

#endif  // PHONEVAL_PARALLEL_HPP
