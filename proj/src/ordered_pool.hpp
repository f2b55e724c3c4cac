#pragma once

#include <algorithm>
#include <condition_variable>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

namespace pman::detail {

// Runs work(i) for i in [0, n) on a bounded pool and calls sink(i, result) on
// the calling thread in index order. After the first exception nothing new is
// claimed; results that precede the failing index are still delivered before
// the exception is rethrown.
template <typename Result>
void ordered_parallel_map(std::size_t n, unsigned workers,
                          const std::function<Result(std::size_t)>& work,
                          const std::function<void(std::size_t, Result&&)>& sink) {
  struct Slot {
    std::optional<Result> value;
    std::exception_ptr error;
    bool done = false;
  };
  std::vector<Slot> slots(n);
  std::mutex mu;
  std::condition_variable cv;
  std::size_t next = 0;
  bool stop = false;

  auto worker = [&] {
    for (;;) {
      std::size_t i;
      {
        std::lock_guard lock(mu);
        if (stop || next >= n) return;
        i = next++;
      }
      std::optional<Result> value;
      std::exception_ptr error;
      try {
        value.emplace(work(i));
      } catch (...) {
        error = std::current_exception();
      }
      {
        std::lock_guard lock(mu);
        slots[i].value = std::move(value);
        slots[i].error = error;
        slots[i].done = true;
        if (error) stop = true;
      }
      cv.notify_all();
    }
  };

  const unsigned count = static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(workers, n)));
  std::vector<std::jthread> pool;
  pool.reserve(count);
  for (unsigned t = 0; t < count; ++t) pool.emplace_back(worker);

  std::exception_ptr failure;
  for (std::size_t i = 0; i < n; ++i) {
    std::unique_lock lock(mu);
    cv.wait(lock, [&] { return slots[i].done || (stop && i >= next); });
    if (!slots[i].done || slots[i].error) {
      failure = slots[i].done ? slots[i].error : nullptr;
      break;
    }
    Result value = std::move(*slots[i].value);
    lock.unlock();
    sink(i, std::move(value));
  }

  if (!failure) {
    std::lock_guard lock(mu);
    for (const auto& s : slots) {
      if (s.error) {
        failure = s.error;
        break;
      }
    }
  }
  pool.clear();  // joins
  if (failure) std::rethrow_exception(failure);
}

}  // namespace pman::detail
