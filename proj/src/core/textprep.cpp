// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 The adgate Authors

#include "textprep.hpp"

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include "error.hpp"

namespace adgate::bundled {
extern const std::string_view onix_stopwords;
}

namespace adgate::textprep {

namespace {

constexpr UChar32 kReplacement = 0xFFFD;
constexpr UChar32 kRightSingleQuote = 0x2019;

template <typename Fn>
void for_each_code_point(std::string_view s, Fn &&fn) {
  const auto *bytes = reinterpret_cast<const std::uint8_t *>(s.data());
  const auto length = static_cast<std::int32_t>(s.size());
  std::int32_t i = 0;
  while (i < length) {
    UChar32 c;
    U8_NEXT(bytes, i, length, c);
    fn(c < 0 ? kReplacement : c);
  }
}

void append_utf8(std::string &out, UChar32 c) {
  char buf[U8_MAX_LENGTH];
  std::int32_t len = 0;
  UBool error = false;
  U8_APPEND(reinterpret_cast<std::uint8_t *>(buf), len, U8_MAX_LENGTH, c, error);
  if (error) {
    append_utf8(out, kReplacement);
    return;
  }
  out.append(buf, static_cast<std::size_t>(len));
}

bool is_ascii_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

}  // namespace

std::string fold_case(std::string_view utf8) {
  std::string out;
  out.reserve(utf8.size());
  for_each_code_point(utf8, [&](UChar32 c) {
    if (c < 0x80) {
      out += static_cast<char>(c >= 'A' && c <= 'Z' ? c + ('a' - 'A') : c);
    } else {
      append_utf8(out, u_foldCase(c, U_FOLD_CASE_DEFAULT));
    }
  });
  return out;
}

std::string strip_special(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for_each_code_point(text, [&](UChar32 c) {
    if (c < 0x80) {
      const auto ch = static_cast<char>(c);
      if (ch >= 'A' && ch <= 'Z') {
        out += static_cast<char>(ch + ('a' - 'A'));
      } else if ((ch >= 'a' && ch <= 'z') || (ch >= '0' && ch <= '9') || ch == '\'') {
        out += ch;
      } else {
        out += ' ';
      }
      return;
    }
    if (c == kRightSingleQuote) {
      out += '\'';
    } else if (u_isUAlphabetic(c) || u_isdigit(c)) {
      append_utf8(out, u_foldCase(c, U_FOLD_CASE_DEFAULT));
    } else {
      out += ' ';
    }
  });
  return out;
}

Tokens tokenize(std::string_view text) {
  Tokens out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_ascii_space(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && !is_ascii_space(text[j])) ++j;
    if (j > i) out.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

StopwordList StopwordList::parse(std::string_view content, std::string origin) {
  StopwordList list;
  list.origin_ = std::move(origin);
  std::size_t pos = 0;
  while (pos <= content.size()) {
    auto end = content.find('\n', pos);
    if (end == std::string_view::npos) end = content.size();
    auto words = tokenize(content.substr(pos, end - pos));
    pos = end + 1;
    if (words.empty() || words.front().starts_with('#')) continue;
    for (const auto &w : words) list.words_.insert(fold_case(w));
  }
  return list;
}

const StopwordList &StopwordList::bundled() {
  static const StopwordList list = [] {
    auto l = parse(bundled::onix_stopwords, "Onix Text Retrieval Toolkit stop word list 1");
    if (l.size() == 0) throw Error(ErrorCode::Format, "bundled stopword list is empty");
    return l;
  }();
  return list;
}

Tokens remove_stopwords(std::span<const std::string> tokens, const StopwordList &stops) {
  Tokens out;
  out.reserve(tokens.size());
  for (const auto &t : tokens) {
    if (!stops.contains(t)) out.push_back(t);
  }
  return out;
}

Tokens prepare_text(std::string_view text, const StopwordList &stops) {
  Tokens out;
  for (auto &tok : tokenize(strip_special(text))) {
    if (stops.contains(tok)) continue;
    auto stemmed = stem(tok);
    if (stops.contains(stemmed)) continue;
    out.push_back(std::move(stemmed));
  }
  return out;
}

PreparedDocument prepare_document(std::string_view title, std::string_view subtitle,
                                  std::string_view description, const StopwordList &stops) {
  PreparedDocument doc;
  doc.fields[kTitle] = prepare_text(title, stops);
  doc.fields[kSubtitle] = prepare_text(subtitle, stops);
  doc.fields[kDescription] = prepare_text(description, stops);
  for (const auto &f : doc.fields) doc.merged.insert(doc.merged.end(), f.begin(), f.end());
  return doc;
}

std::string join(std::span<const std::string> tokens) {
  std::string out;
  for (const auto &t : tokens) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

}  // namespace adgate::textprep
