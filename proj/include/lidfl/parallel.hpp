#pragma once

#include <cstddef>
#include <exception>
#include <mutex>

#ifdef LIDFL_HAVE_OPENMP
#include <omp.h>
#endif

namespace lidfl {

/// Selects between the OpenMP kernel and the serial reference loop.
/// Both paths write into per-index slots, so results are identical.
enum class ExecPolicy { serial, parallel };

inline int hardware_threads() {
#ifdef LIDFL_HAVE_OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

/// Runs fn(i) for i in [0, n). Exceptions thrown by fn are captured and the
/// first one is rethrown after the loop.
template <typename Fn>
void parallel_for(std::size_t n, ExecPolicy policy, Fn&& fn) {
  if (policy == ExecPolicy::serial || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
#ifdef LIDFL_HAVE_OPENMP
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic)
  for (long long i = 0; i < count; ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
#else
  for (std::size_t i = 0; i < n; ++i) fn(i);
#endif
}

}  // namespace lidfl
