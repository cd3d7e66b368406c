#include "reebpa/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace reebpa {

namespace {
std::atomic<int> g_workers{0};
}

int default_workers() {
  if (const int w = g_workers.load(); w > 0) return w;
  if (const char* env = std::getenv("REEBPA_WORKERS")) {
    try {
      const int w = std::stoi(env);
      if (w > 0) return w;
    } catch (const std::exception&) {
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void set_default_workers(int workers) { g_workers.store(workers > 0 ? workers : 0); }

}  // namespace reebpa
