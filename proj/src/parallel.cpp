#include "chromafix/parallel.hpp"

#include <atomic>

namespace chromafix {

namespace {
std::atomic<unsigned> g_thread_count{0};
}

void set_thread_count(unsigned count) noexcept
{
    g_thread_count.store(count);
}

unsigned thread_count() noexcept
{
    const unsigned requested = g_thread_count.load();
    if (requested != 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

}  // namespace chromafix
