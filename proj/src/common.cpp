#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "fpfuse/error.hpp"
#include "fpfuse/parallel.hpp"
#include "fpfuse/types.hpp"

namespace fpfuse {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Io: return "io";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Schema: return "schema";
    case ErrorKind::Dimension: return "dimension";
    case ErrorKind::Precondition: return "precondition";
    case ErrorKind::Conflict: return "conflict";
    case ErrorKind::Version: return "version";
    case ErrorKind::Numeric: return "numeric";
  }
  return "unknown";
}

double distance(Position a, Position b) { return std::hypot(a.x - b.x, a.y - b.y); }

std::vector<Position> RadioMap::positions() const {
  std::vector<Position> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.position);
  return out;
}

void RadioMap::validate() const {
  const std::size_t d = dim();
  require(d >= 1, ErrorKind::Schema, "radio map has no channels");
  require(bounds.area() > 0.0, ErrorKind::Schema, "radio map bounds are degenerate");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    require(s.fingerprint.rss.size() == d, ErrorKind::Schema,
            "sample " + std::to_string(i) + " has " + std::to_string(s.fingerprint.rss.size()) +
                " channels, expected " + std::to_string(d));
    for (double v : s.fingerprint.rss)
      require(std::isfinite(v), ErrorKind::Schema, "sample " + std::to_string(i) + " has a non-finite RSS value");
    require(std::isfinite(s.position.x) && std::isfinite(s.position.y), ErrorKind::Schema,
            "sample " + std::to_string(i) + " has a non-finite position");
    require(bounds.contains(s.position), ErrorKind::Schema,
            "sample " + std::to_string(i) + " lies outside the floor bounds");
  }
}

std::size_t default_threads() {
  if (const char* env = std::getenv("FPFUSE_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<std::size_t>(v);
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : hc;
}

void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& body) {
  if (threads == 0) threads = default_threads();
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace fpfuse
