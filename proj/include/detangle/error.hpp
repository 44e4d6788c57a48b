#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace detangle {

// Validation failures: bad input data, violated preconditions, degenerate
// configurations. The CLI maps these to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Filesystem failures. The CLI maps these to exit code 2.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class DataErrorKind {
  kMalformedCsv,
  kHeaderMismatch,
  kSchemaInvalid,
  kLabelOutOfRange,
  kNonFinite,
};

const char* to_string(DataErrorKind kind);

// Ingestion error naming the offending cell. `row` is the 1-based data row
// (header excluded), 0 when the error concerns the header or schema.
class DataError : public Error {
 public:
  DataError(DataErrorKind kind, std::size_t row, std::string column, const std::string& what);

  DataErrorKind kind() const { return kind_; }
  std::size_t row() const { return row_; }
  const std::string& column() const { return column_; }

 private:
  DataErrorKind kind_;
  std::size_t row_;
  std::string column_;
};

// Raised when probe training produces a non-finite loss.
class TrainingError : public Error {
 public:
  TrainingError(int epoch, const std::string& what);
  int epoch() const { return epoch_; }

 private:
  int epoch_;
};

// Non-fatal diagnostics go through here so tests can silence them.
void warn(const std::string& message);
void set_warnings_enabled(bool enabled);

}  // namespace detangle
