#pragma once

// Fixed-chunk parallel loops. Work is always split into the same chunks and
// reduced in chunk order, so results do not depend on the worker count.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace srl {

// SRL_THREADS caps the worker count; default is all hardware threads.
inline unsigned worker_count() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("SRL_THREADS")) {
    try {
      long v = std::stol(env);
      if (v >= 1) return std::min<unsigned>(static_cast<unsigned>(v), hw);
    } catch (...) {
    }
  }
  return hw;
}

template <class F>
void parallel_for(std::size_t count, F&& body) {
  unsigned workers = std::min<std::size_t>(worker_count(), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto run = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(run);
  run();
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

// Pairwise (tree) sum of per-chunk partials.
inline double pairwise_sum(std::vector<double> parts) {
  if (parts.empty()) return 0.0;
  while (parts.size() > 1) {
    std::size_t half = (parts.size() + 1) / 2;
    for (std::size_t i = 0; i + half < parts.size(); ++i) parts[i] += parts[i + half];
    parts.resize(half);
  }
  return parts.front();
}

// Deterministic sum of term(i) for i in [0, count).
template <class F>
double deterministic_sum(std::size_t count, F&& term, std::size_t chunk = 4096) {
  std::size_t chunks = (count + chunk - 1) / chunk;
  std::vector<double> parts(chunks, 0.0);
  parallel_for(chunks, [&](std::size_t c) {
    double acc = 0.0;
    std::size_t end = std::min(count, (c + 1) * chunk);
    for (std::size_t i = c * chunk; i < end; ++i) acc += term(i);
    parts[c] = acc;
  });
  return pairwise_sum(std::move(parts));
}

}  // namespace srl
