#pragma once

// Fork-join execution and timing hooks shared by the time-parallel drivers.

#include <functional>

namespace pebk {

/// Seconds since an arbitrary origin. Injected so tests can use fake time.
using Clock = std::function<double()>;

/// Monotonic wall clock.
Clock steady_clock();

enum class TimingMode {
  emulated,  // tasks run one after another, each timed on its own
  threaded,  // tasks run on worker threads
};

/// Worker count for threaded mode: PEBK_NUM_THREADS when set and positive,
/// otherwise the hardware concurrency (at least 1).
int default_thread_count();

/// Runs body(0..count-1), sequentially in emulated mode or on up to
/// `threads` workers otherwise. The first exception thrown by a task is
/// rethrown after all workers have joined.
void fork_join(int count, TimingMode mode, int threads, const std::function<void(int)>& body);

/// Elapsed clock time of fn(), minimum over `repeats` runs.
double time_min(const Clock& clock, int repeats, const std::function<void()>& fn);

}  // namespace pebk
