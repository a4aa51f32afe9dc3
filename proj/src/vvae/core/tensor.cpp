#include "vvae/core/tensor.hpp"

#include <atomic>
#include <sstream>

namespace vvae {

namespace {
std::atomic<std::int64_t> g_current{0};
std::atomic<std::int64_t> g_peak{0};
}  // namespace

namespace detail {
void account_alloc(std::int64_t bytes) {
  if (bytes == 0) return;
  const std::int64_t cur =
      g_current.fetch_add(bytes, std::memory_order_relaxed) + bytes;
  if (bytes > 0) {
    std::int64_t peak = g_peak.load(std::memory_order_relaxed);
    while (cur > peak &&
           !g_peak.compare_exchange_weak(peak, cur, std::memory_order_relaxed))
      ;
  }
}
}  // namespace detail

AllocStats alloc_stats() {
  return {g_current.load(std::memory_order_relaxed),
          g_peak.load(std::memory_order_relaxed)};
}

void reset_peak_alloc() {
  g_peak.store(g_current.load(std::memory_order_relaxed),
               std::memory_order_relaxed);
}

std::string shape_str(const std::vector<std::int64_t>& s) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) os << ',';
    os << s[i];
  }
  os << ')';
  return os.str();
}

}  // namespace vvae
