// parallel.hpp -- process-wide worker count and a chunked parallel loop

#pragma once

#include <cstddef>
#include <functional>

namespace smallbody {

/// Worker threads used by matrix/integral assembly. Default 1.
void set_thread_count(int n);
int thread_count();

/// Runs body(begin, end) over disjoint chunks of [0, n), on thread_count()
/// threads. With one thread the call is a plain loop on the caller's thread.
void parallel_chunks(std::size_t n,
                     const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace smallbody
