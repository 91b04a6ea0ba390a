#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace cqed {

enum class Execution { Serial, Parallel };

/// Default execution used by library entry points.
Execution default_execution();
int worker_count();

/// Evaluates f(i) for i in [0, n) and returns results in index order. Each
/// f(i) must depend only on i (seed per item), so serial and parallel runs
/// are identical.
template <class F>
auto run_ensemble(std::size_t n, Execution exec, F &&f) -> std::vector<decltype(f(std::size_t{}))> {
  std::vector<decltype(f(std::size_t{}))> out(n);
  if (exec == Execution::Parallel) {
    const long long count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 1)
    for (long long i = 0; i < count; ++i)
      out[static_cast<std::size_t>(i)] = f(static_cast<std::size_t>(i));
  } else {
    for (std::size_t i = 0; i < n; ++i)
      out[i] = f(i);
  }
  return out;
}

} // namespace cqed
