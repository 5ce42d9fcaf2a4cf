#include "lrsdl/errors.hpp"

#include <sstream>

namespace lrsdl::detail {

void throw_dimension(const std::string& what, long expected_rows, long expected_cols,
                     long rows, long cols) {
  std::ostringstream os;
  os << what << ": expected " << expected_rows << "x" << expected_cols << ", got " << rows
     << "x" << cols;
  throw DimensionError(os.str());
}

}  // namespace lrsdl::detail

#include <atomic>
#include <iostream>

namespace lrsdl {

namespace {
std::atomic<bool> g_warnings{true};
}

void warn(const std::string& message) {
  if (g_warnings.load(std::memory_order_relaxed)) std::clog << "warning: " << message << '\n';
}

void set_warnings_enabled(bool enabled) { g_warnings.store(enabled, std::memory_order_relaxed); }

}  // namespace lrsdl
