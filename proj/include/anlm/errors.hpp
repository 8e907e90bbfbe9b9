// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace anlm {

enum class ErrorCode {
  shape,
  length,
  out_of_range,
  out_of_vocabulary,
  empty_sequence,
  undefined_distribution,
  format,
  config,
  non_finite,
  io,
  // archive-specific failures, each distinguishable by callers
  bad_magic,
  version_mismatch,
  truncated,
  duplicate_name,
  missing_tensor,
};

std::string_view to_string(ErrorCode code);

/// Single exception type for the library; the code tells callers which
/// contract was violated and the message names the offending value.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace anlm
