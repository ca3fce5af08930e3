#pragma once
// Process-wide worker-thread cap. The library is single-threaded by default
// (deterministic, benchmark-friendly); raising the cap lets independent
// pipeline stages (the two gradient-channel filter passes) run concurrently.

#include <algorithm>

namespace pls {

namespace detail {
inline int& thread_cap() {
  static int cap = 1;
  return cap;
}
}  // namespace detail

inline void set_max_threads(int n) { detail::thread_cap() = std::max(1, n); }

inline int max_threads() { return detail::thread_cap(); }

}  // namespace pls
