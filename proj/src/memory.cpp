#include "offroad/memory.hpp"

#include <fstream>
#include <string>

namespace offroad {

namespace {

long status_kb(const char* key) {
  std::ifstream in("/proc/self/status");
  std::string line;
  const std::string prefix = std::string(key) + ":";
  while (std::getline(in, line))
    if (line.compare(0, prefix.size(), prefix) == 0) return std::stol(line.substr(prefix.size()));
  return 0;
}

}  // namespace

long peak_rss_bytes() { return status_kb("VmHWM") * 1024; }
long current_rss_bytes() { return status_kb("VmRSS") * 1024; }

bool reset_peak_rss() {
  std::ofstream out("/proc/self/clear_refs");
  if (!out) return false;
  out << "5";
  return static_cast<bool>(out.flush());
}

}  // namespace offroad
