#pragma once

#include <cstddef>
#include <exception>
#include <vector>

namespace pacb {

// Index chunking shared by the OpenMP kernels. The chunk count is fixed (not
// tied to the thread count) and per-chunk partial results are always combined
// in chunk order, so a kernel's output is identical for any number of threads
// and matches its serial reference bit for bit when the reference reduces in
// the same order.
inline constexpr std::size_t kParallelChunks = 256;

struct ChunkRange {
  std::size_t begin;
  std::size_t end;
};

inline ChunkRange chunk_range(std::size_t n, std::size_t chunk) {
  return {n * chunk / kParallelChunks, n * (chunk + 1) / kParallelChunks};
}

// Runs fn(chunk_index) over all chunks, in parallel when OpenMP is enabled.
// fn must only write to chunk-owned state. An exception thrown by fn must not
// escape the OpenMP region, so it is captured and rethrown afterwards (the
// lowest-index one when several chunks throw).
template <class Fn>
void parallel_chunks(Fn&& fn) {
  std::vector<std::exception_ptr> errors(kParallelChunks);
#pragma omp parallel for schedule(dynamic)
  for (long long c = 0; c < static_cast<long long>(kParallelChunks); ++c) {
    try {
      fn(static_cast<std::size_t>(c));
    } catch (...) {
      errors[c] = std::current_exception();
    }
  }
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// Runs fn(item_index) for i in [0, n), in parallel when OpenMP is enabled.
// Used for embarrassingly parallel loops whose items write to disjoint slots.
// Exceptions are captured and rethrown like parallel_chunks.
template <class Fn>
void parallel_items(std::size_t n, Fn&& fn) {
  std::vector<std::exception_ptr> errors(n);
#pragma omp parallel for schedule(dynamic, 16)
  for (long long i = 0; i < static_cast<long long>(n); ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace pacb
