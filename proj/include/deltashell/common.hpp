#pragma once

// Shared plumbing: error types, compensated summation, deterministic
// parallel loops, config hashing and numeric text formatting.

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace deltashell {

// Invalid user input (bad config keys, malformed files, unusable geometry).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A solver failed to converge or produced an unusable result.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Neumaier compensated sum: the running error of a plain left-to-right sum
// would already exceed some of the 1e-12 bookkeeping bounds at ~1e4 terms.
class KahanSum {
 public:
  void add(double x) {
    double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double neumaier_sum(const std::vector<double>& v) {
  KahanSum s;
  for (double x : v) s.add(x);
  return s.value();
}

// Splits [0, n) into at most `threads` contiguous chunks and runs `fn(begin,
// end)` on each.  Chunk boundaries depend only on n and the chunk count, and
// every output element is written by exactly one chunk, so results are
// bitwise independent of the thread count as long as `fn` itself only writes
// to its own index range.
inline void parallel_for(std::size_t n, int threads,
                         const std::function<void(std::size_t, std::size_t)>& fn) {
  if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
  if (threads <= 0) threads = 1;
  std::size_t chunks = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
  if (chunks <= 1) {
    fn(0, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(chunks);
  std::size_t base = n / chunks, extra = n % chunks, begin = 0;
  for (std::size_t c = 0; c < chunks; ++c) {
    std::size_t len = base + (c < extra ? 1 : 0);
    pool.emplace_back(fn, begin, begin + len);
    begin += len;
  }
  for (auto& t : pool) t.join();
}

// FNV-1a, used to stamp output files with a digest of the run configuration.
inline std::uint64_t fnv1a(const std::string& data) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// printf-style helper; all numeric output funnels through here so files are
// formatted identically on every run.
inline std::string strfmt(const char* fmt, ...) {
  va_list ap;
  va_start(ap, fmt);
  char small[256];
  int n = std::vsnprintf(small, sizeof small, fmt, ap);
  va_end(ap);
  if (n < 0) return {};
  if (static_cast<std::size_t>(n) < sizeof small) return std::string(small, n);
  std::string big(static_cast<std::size_t>(n) + 1, '\0');
  va_start(ap, fmt);
  std::vsnprintf(big.data(), big.size(), fmt, ap);
  va_end(ap);
  big.resize(static_cast<std::size_t>(n));
  return big;
}

// Round-trippable double formatting for all data files.
inline std::string fmt_g17(double x) { return strfmt("%.17g", x); }

}  // namespace deltashell
