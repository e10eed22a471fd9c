// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 The adgate Authors

#include "error.hpp"

namespace adgate {

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::EmptyLexicon: return "EmptyLexicon";
    case ErrorCode::PhraseTooLong: return "PhraseTooLong";
    case ErrorCode::InvalidThreshold: return "InvalidThreshold";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::MalformedLine: return "MalformedLine";
    case ErrorCode::AllMissingColumn: return "AllMissingColumn";
    case ErrorCode::DegenerateColumn: return "DegenerateColumn";
    case ErrorCode::NonPositiveInput: return "NonPositiveInput";
    case ErrorCode::InvalidK: return "InvalidK";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::EmptyImage: return "EmptyImage";
    case ErrorCode::SingleClass: return "SingleClass";
    case ErrorCode::NoValidRecords: return "NoValidRecords";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
    case ErrorCode::EmptyChannel: return "EmptyChannel";
    case ErrorCode::InvalidChannelList: return "InvalidChannelList";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Format: return "Format";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::Conflict: return "Conflict";
  }
  return "Unknown";
}

}  // namespace adgate
