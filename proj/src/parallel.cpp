#include "nordheim/parallel.hpp"

#include <atomic>

namespace nordheim {

namespace {
std::atomic<unsigned> g_workers{1};
}

void set_worker_threads(unsigned n) { g_workers.store(n == 0 ? 1 : n); }

unsigned worker_threads() { return g_workers.load(); }

}  // namespace nordheim
