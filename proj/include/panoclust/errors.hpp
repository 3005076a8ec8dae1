#pragma once

#include <stdexcept>

namespace panoclust {

// One exception type per failure family so callers can match on the
// condition instead of parsing messages.
struct MalformedScanError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InvalidPointError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct LabelCountError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct EncodingOverflowError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DimensionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InvalidKernelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InvalidLabelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct PackingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace panoclust
