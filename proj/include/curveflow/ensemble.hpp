#pragma once

#include <cstddef>
#include <exception>
#include <vector>

#include <omp.h>

namespace curveflow::ensemble {

/// Worker count: explicit request if > 0, else CURVEFLOW_WORKERS, else the
/// OpenMP default.
int resolve_workers(int requested);

/// Results are stored by member index, so any reduction done afterwards in
/// index order is independent of the worker count.
template <class Result, class F>
std::vector<Result> map_members(std::size_t count, int workers, F&& f) {
  std::vector<Result> out(count);
  std::vector<std::exception_ptr> errors(count);
  const int threads = resolve_workers(workers);
  const auto n = static_cast<long long>(count);
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (long long i = 0; i < n; ++i) {
    try {
      out[static_cast<std::size_t>(i)] = f(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

template <class Result, class F>
std::vector<Result> map_members_serial(std::size_t count, F&& f) {
  std::vector<Result> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(f(i));
  return out;
}

}  // namespace curveflow::ensemble
