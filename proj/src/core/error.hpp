// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 The adgate Authors

#ifndef ADGATE_CORE_ERROR_HPP
#define ADGATE_CORE_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace adgate {

enum class ErrorCode {
  InvalidArgument,
  EmptyLexicon,
  PhraseTooLong,
  InvalidThreshold,
  EmptyCorpus,
  DimensionMismatch,
  MalformedLine,
  AllMissingColumn,
  DegenerateColumn,
  NonPositiveInput,
  InvalidK,
  ShapeMismatch,
  EmptyImage,
  SingleClass,
  NoValidRecords,
  SchemaViolation,
  EmptyChannel,
  InvalidChannelList,
  Io,
  Format,
  NotFound,
  Conflict,
};

/// Stable identifier used in error documents ("EmptyLexicon", ...).
std::string_view error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string &message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace adgate

#endif  // ADGATE_CORE_ERROR_HPP
