#pragma once

#include <functional>

namespace treesmooth {

/// Runs fn(0..count-1) on up to `threads` worker threads. Tasks must be
/// independent; output produced per index must not depend on scheduling.
/// threads <= 1 runs serially. The first exception thrown by any task is
/// rethrown after all workers join.
void parallel_for(int count, int threads, const std::function<void(int)>& fn);

}  // namespace treesmooth
