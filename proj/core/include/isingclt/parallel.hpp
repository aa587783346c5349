#pragma once

#include <cstddef>
#include <functional>

namespace isingclt {

/// Environment variable holding the worker count. Unset or invalid means 1.
inline constexpr const char* kThreadsEnvVar = "ISINGCLT_THREADS";

/// Current worker count: explicit override if set, else the environment variable.
std::size_t worker_count();

/// Overrides the worker count for this process (0 restores the environment value).
void set_worker_count(std::size_t workers);

/// Runs body(task) for task in [0, tasks) on up to worker_count() threads.
///
/// Tasks must write only to their own output slots; callers reduce the slots
/// in task order afterwards, which keeps results independent of the worker
/// count. The first exception thrown by any task is rethrown.
void parallel_for(std::size_t tasks, const std::function<void(std::size_t)>& body);

}  // namespace isingclt
