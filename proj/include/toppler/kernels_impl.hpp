#pragma once

#include <exception>
#include <mutex>

namespace toppler {

template <class T>
std::vector<T> replicas(std::uint64_t count, std::uint64_t seed, const std::function<T(std::uint64_t, Rng&)>& fn) {
  std::vector<T> out(count);
  std::exception_ptr error;
  std::mutex mu;
  const auto n = static_cast<std::int64_t>(count);
#pragma omp parallel for schedule(dynamic, 16) num_threads(configured_threads())
  for (std::int64_t i = 0; i < n; ++i) {
    try {
      Rng rng = substream(seed, static_cast<std::uint64_t>(i));
      out[i] = fn(static_cast<std::uint64_t>(i), rng);
    } catch (...) {
      std::lock_guard lock(mu);
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return out;
}

template <class T>
std::vector<T> replicas_reference(std::uint64_t count, std::uint64_t seed, const std::function<T(std::uint64_t, Rng&)>& fn) {
  std::vector<T> out;
  out.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    Rng rng = substream(seed, i);
    out.push_back(fn(i, rng));
  }
  return out;
}

}  // namespace toppler
