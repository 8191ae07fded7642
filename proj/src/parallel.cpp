#include "geoshoot/parallel.hpp"

#include <cstdlib>
#include <string>

namespace geoshoot {

int default_thread_count() {
  if (const char* env = std::getenv("GEOSHOOT_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n >= 1) return n;
    } catch (const std::exception&) {
      // fall through to hardware default
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace geoshoot
