#include "gomsp/common.hpp"

#include <atomic>
#include <iostream>

namespace gomsp {

namespace {
std::atomic<bool> g_warnings_enabled{true};
}

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput: return "invalid-input";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Numerical: return "numerical";
    case ErrorKind::Infeasible: return "infeasible-slot";
    case ErrorKind::Config: return "config";
    case ErrorKind::EmptyRecord: return "empty-record";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

bool all_finite(const Vector& v) { return v.allFinite(); }
bool all_finite(const Matrix& m) { return m.allFinite(); }

void warn(const std::string& message) {
  if (g_warnings_enabled.load(std::memory_order_relaxed)) {
    std::cerr << "warning: " << message << '\n';
  }
}

void set_warnings_enabled(bool enabled) { g_warnings_enabled.store(enabled, std::memory_order_relaxed); }

}  // namespace gomsp
