#pragma once

#include <cstddef>
#include <functional>

namespace wfem {

/// Worker count for element loops; defaults to 1.
int thread_count();
void set_thread_count(int n);

/// Runs body(begin, end, chunk) over contiguous chunks of [0, n); chunk
/// indices are ordered so callers can merge per-chunk results in sequence.
void parallel_for(std::size_t n,
                  const std::function<void(std::size_t, std::size_t, int)>& body);

/// Number of chunks parallel_for will use for n items.
int chunk_count(std::size_t n);

} // namespace wfem
