#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace hgnn {

// Thrown when an argument violates an operation's preconditions.
struct InvalidInput : std::runtime_error {
  explicit InvalidInput(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown when a value lies outside its mathematical domain (e.g. a point
// outside the ball).
struct DomainError : std::runtime_error {
  explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

// Raised by file ingestion; carries one line per offending record.
struct IngestError : std::runtime_error {
  std::vector<std::string> offenders;
  IngestError(const std::string& msg, std::vector<std::string> offs)
      : std::runtime_error(msg), offenders(std::move(offs)) {}
};

// Raised when a gradient turns non-finite during optimization.
struct GradientError : std::runtime_error {
  explicit GradientError(const std::string& msg) : std::runtime_error(msg) {}
};

// FNV-1a 64-bit over a byte range. Used for data hashes in run manifests.
inline std::uint64_t fnv1a64(const void* data, std::size_t len,
                             std::uint64_t seed = 0xcbf29ce484222325ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

// Runs fn(i) for i in [0, n) over at most `workers` threads. Chunked by
// index so results written per-index are deterministic regardless of
// scheduling.
inline void parallel_for(std::size_t n, int workers,
                         const std::function<void(std::size_t)>& fn) {
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const std::size_t nthreads = std::min<std::size_t>(workers, n);
  std::vector<std::thread> pool;
  pool.reserve(nthreads);
  for (std::size_t t = 0; t < nthreads; ++t) {
    pool.emplace_back([&, t] {
      for (std::size_t i = t; i < n; i += nthreads) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace hgnn
