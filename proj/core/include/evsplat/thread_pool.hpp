#pragma once

#include <cstddef>
#include <functional>

namespace evsplat {

int hardware_threads();

// Runs fn(job) for job in [0, n_jobs) on n_threads workers (0 = hardware
// concurrency, 1 = inline). Jobs are handed out through a shared counter, so
// which worker runs which job is scheduling-dependent; callers must write to
// disjoint outputs per job and reduce in job order afterwards if they want
// results independent of the thread count. Worker exceptions are rethrown
// on the calling thread.
void parallel_jobs(std::size_t n_jobs, int n_threads, const std::function<void(std::size_t)>& fn);

// Fixed-size chunking of [0, n): fn(chunk_index, begin, end). Chunk
// boundaries depend only on n and chunk_size, never on the thread count.
void parallel_chunks(std::size_t n, std::size_t chunk_size, int n_threads,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn);

std::size_t chunk_count(std::size_t n, std::size_t chunk_size);

}  // namespace evsplat
