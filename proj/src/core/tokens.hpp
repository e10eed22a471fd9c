// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 The adgate Authors

#ifndef ADGATE_CORE_TOKENS_HPP
#define ADGATE_CORE_TOKENS_HPP

#include <string>
#include <vector>

namespace adgate {

/// Ordered, normalized word tokens. Produced by textprep; consumed everywhere.
using Tokens = std::vector<std::string>;

}  // namespace adgate

#endif  // ADGATE_CORE_TOKENS_HPP
