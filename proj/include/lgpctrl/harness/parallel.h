#pragma once

#include <functional>

namespace lgpctrl {
namespace harness {

/// Runs body(i) for i in [0, count) on up to `threads` workers (0 means the
/// hardware concurrency). Each index runs once; after an exception the
/// remaining indices are skipped and the first exception is rethrown.
void ParallelFor(int count, int threads, const std::function<void(int)>& body);

}  // namespace harness
}  // namespace lgpctrl
