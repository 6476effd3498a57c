#include "wfem/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

namespace wfem {

namespace {
std::atomic<int> g_threads{1};
}

int thread_count() { return g_threads.load(); }

void set_thread_count(int n) { g_threads.store(std::max(1, n)); }

int chunk_count(std::size_t n) {
  return static_cast<int>(std::min<std::size_t>(std::max<std::size_t>(n, 1), thread_count()));
}

void parallel_for(std::size_t n,
                  const std::function<void(std::size_t, std::size_t, int)>& body) {
  const int chunks = chunk_count(n);
  if (chunks == 1) {
    body(0, n, 0);
    return;
  }
  std::vector<std::thread> workers;
  std::exception_ptr error;
  std::vector<std::exception_ptr> errors(chunks);
  for (int c = 0; c < chunks; ++c) {
    const std::size_t begin = n * c / chunks;
    const std::size_t end = n * (c + 1) / chunks;
    workers.emplace_back([&, begin, end, c] {
      try {
        body(begin, end, c);
      } catch (...) {
        errors[c] = std::current_exception();
      }
    });
  }
  for (auto& t : workers)
    t.join();
  for (auto& e : errors)
    if (e)
      std::rethrow_exception(e);
}

} // namespace wfem
