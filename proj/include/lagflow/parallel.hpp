#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string_view>

namespace lagflow {

// Worker count derived from the LF_THREADS environment variable.
// Unset or 0 means hardware concurrency.
std::size_t thread_count();

// Runs fn(i) for i in [0, n). Chunks are distributed over thread_count()
// workers; each index is processed exactly once, so filling a preallocated
// array and reducing it sequentially afterwards is deterministic regardless
// of the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

// FNV-1a, used to fingerprint canonicalized config bytes.
std::uint64_t fnv1a(std::string_view bytes);

}  // namespace lagflow
