#include "slf/parallel.h"

#include <algorithm>

namespace slf {

namespace {
int g_thread_count = 1;
}

int thread_count() { return g_thread_count; }

void set_thread_count(int n) {
    if (n <= 0) {
        n = int(std::thread::hardware_concurrency());
        if (n <= 0) n = 1;
    }
    g_thread_count = std::max(1, n);
}

} // namespace slf
