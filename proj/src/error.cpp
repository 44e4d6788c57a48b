#include "detangle/error.hpp"

#include <atomic>
#include <iostream>

namespace detangle {

namespace {
std::atomic<bool> g_warnings_enabled{true};
}

const char* to_string(DataErrorKind kind) {
  switch (kind) {
    case DataErrorKind::kMalformedCsv: return "malformed_csv";
    case DataErrorKind::kHeaderMismatch: return "header_mismatch";
    case DataErrorKind::kSchemaInvalid: return "schema_invalid";
    case DataErrorKind::kLabelOutOfRange: return "label_out_of_range";
    case DataErrorKind::kNonFinite: return "non_finite";
  }
  return "unknown";
}

DataError::DataError(DataErrorKind kind, std::size_t row, std::string column, const std::string& what)
    : Error(std::string(to_string(kind)) + ": " + what), kind_(kind), row_(row), column_(std::move(column)) {}

TrainingError::TrainingError(int epoch, const std::string& what)
    : Error("training diverged at epoch " + std::to_string(epoch) + ": " + what), epoch_(epoch) {}

void warn(const std::string& message) {
  if (g_warnings_enabled.load(std::memory_order_relaxed)) std::cerr << "warning: " << message << '\n';
}

void set_warnings_enabled(bool enabled) { g_warnings_enabled.store(enabled, std::memory_order_relaxed); }

}  // namespace detangle
