#include "ergo/parallel.hpp"

#include <algorithm>
#include <thread>

namespace ergo {

namespace {
int g_workers = std::max(1u, std::thread::hardware_concurrency());
}

int workers() { return g_workers; }

void set_workers(int n) { g_workers = n > 0 ? n : static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

}  // namespace ergo
