#include "coordnet/common.hpp"

#include <algorithm>
#include <atomic>

namespace coordnet {

namespace {
std::atomic<unsigned> g_threads{1};
}

void set_thread_count(unsigned n) { g_threads.store(std::max(1u, n)); }
unsigned thread_count() { return g_threads.load(); }

}  // namespace coordnet
