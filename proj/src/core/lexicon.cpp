// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 The adgate Authors

#include "lexicon.hpp"

#include <algorithm>
#include <deque>
#include <set>

#include "error.hpp"
#include "textprep.hpp"

namespace adgate::lexicon {

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

std::string join(const Tokens &tokens) {
  std::string out;
  for (const auto &t : tokens) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// OffensiveLexicon

OffensiveLexicon OffensiveLexicon::from_phrases(std::vector<Tokens> phrases,
                                                std::size_t source_line_count) {
  OffensiveLexicon lex;
  lex.source_line_count_ = source_line_count;
  std::set<Tokens> seen;
  for (auto &phrase : phrases) {
    std::erase_if(phrase, [](const std::string &t) { return t.empty(); });
    if (phrase.empty()) continue;
    if (phrase.size() > kMaxPhraseTokens) {
      throw Error(ErrorCode::PhraseTooLong,
                  "phrase '" + join(phrase) + "' has " + std::to_string(phrase.size()) +
                      " tokens; at most " + std::to_string(kMaxPhraseTokens) + " allowed");
    }
    if (seen.insert(phrase).second) lex.phrases_.push_back(std::move(phrase));
  }
  if (lex.phrases_.empty()) throw Error(ErrorCode::EmptyLexicon, "lexicon contains no phrases");
  lex.matcher_ = std::make_shared<const PhraseMatcher>(lex.phrases_);
  return lex;
}

std::string OffensiveLexicon::phrase_text(std::size_t phrase_id) const {
  return join(phrases_.at(phrase_id));
}

bool OffensiveLexicon::contains(const Tokens &phrase) const {
  return std::find(phrases_.begin(), phrases_.end(), phrase) != phrases_.end();
}

std::string OffensiveLexicon::to_text() const {
  std::string out;
  for (const auto &p : phrases_) {
    out += join(p);
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// PhraseMatcher

PhraseMatcher::PhraseMatcher(const std::vector<Tokens> &phrases) {
  std::set<std::string, std::less<>> vocab;
  for (const auto &p : phrases) vocab.insert(p.begin(), p.end());
  std::uint32_t next_id = 0;
  for (const auto &t : vocab) symbols_.emplace_back(t, next_id++);

  nodes_.emplace_back();
  for (std::size_t id = 0; id < phrases.size(); ++id) {
    std::uint32_t cur = 0;
    for (const auto &tok : phrases[id]) {
      const auto sym = static_cast<std::uint32_t>(symbol(tok));
      auto found = child(cur, sym);
      if (found < 0) {
        const auto fresh = static_cast<std::uint32_t>(nodes_.size());
        Node n;
        n.depth = nodes_[cur].depth + 1;
        nodes_.push_back(std::move(n));
        auto &edges = nodes_[cur].next;
        edges.insert(std::lower_bound(edges.begin(), edges.end(), std::make_pair(sym, 0u)),
                     {sym, fresh});
        found = fresh;
      }
      cur = static_cast<std::uint32_t>(found);
    }
    nodes_[cur].phrase = static_cast<std::int64_t>(id);
  }

  // Breadth-first construction of failure and dictionary-suffix links.
  std::deque<std::uint32_t> queue;
  for (const auto &[sym, to] : nodes_[0].next) {
    nodes_[to].fail = 0;
    queue.push_back(to);
  }
  while (!queue.empty()) {
    const auto u = queue.front();
    queue.pop_front();
    for (const auto &[sym, v] : nodes_[u].next) {
      auto f = nodes_[u].fail;
      std::int64_t target = -1;
      while (true) {
        target = child(f, sym);
        if (target >= 0 || f == 0) break;
        f = nodes_[f].fail;
      }
      const auto fail = (target >= 0 && static_cast<std::uint32_t>(target) != v)
                            ? static_cast<std::uint32_t>(target)
                            : 0u;
      nodes_[v].fail = fail;
      nodes_[v].dict = nodes_[fail].phrase >= 0 ? fail : nodes_[fail].dict;
      queue.push_back(v);
    }
  }
}

std::int64_t PhraseMatcher::symbol(std::string_view token) const {
  auto it = std::lower_bound(symbols_.begin(), symbols_.end(), token,
                             [](const auto &entry, std::string_view t) { return entry.first < t; });
  if (it == symbols_.end() || it->first != token) return -1;
  return it->second;
}

std::int64_t PhraseMatcher::child(std::uint32_t node, std::uint32_t sym) const {
  const auto &edges = nodes_[node].next;
  auto it = std::lower_bound(edges.begin(), edges.end(), std::make_pair(sym, 0u),
                             [](const auto &a, const auto &b) { return a.first < b.first; });
  if (it == edges.end() || it->first != sym) return -1;
  return it->second;
}

MatchSet PhraseMatcher::find_all(std::span<const std::string> tokens) const {
  MatchSet out;
  std::uint32_t state = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto sym = symbol(tokens[i]);
    if (sym < 0) {
      state = 0;
      continue;
    }
    while (true) {
      const auto next = child(state, static_cast<std::uint32_t>(sym));
      if (next >= 0) {
        state = static_cast<std::uint32_t>(next);
        break;
      }
      if (state == 0) break;
      state = nodes_[state].fail;
    }
    for (auto n = state; n != 0; n = nodes_[n].dict) {
      const auto &node = nodes_[n];
      if (node.phrase >= 0) {
        out.push_back({i + 1 - node.depth, node.depth, static_cast<std::size_t>(node.phrase)});
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Free functions

OffensiveLexicon parse_lexicon(std::string_view content) {
  std::vector<Tokens> phrases;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < content.size()) {
    auto end = content.find('\n', pos);
    if (end == std::string_view::npos) end = content.size();
    auto line = content.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;

    Tokens phrase;
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && is_space(line[i])) ++i;
      std::size_t j = i;
      while (j < line.size() && !is_space(line[j])) ++j;
      if (j > i) phrase.push_back(textprep::fold_case(line.substr(i, j - i)));
      i = j;
    }
    if (phrase.empty() || phrase.front().starts_with('#')) continue;
    if (phrase.size() > kMaxPhraseTokens) {
      throw Error(ErrorCode::PhraseTooLong,
                  "line " + std::to_string(line_no) + ": phrase has " +
                      std::to_string(phrase.size()) + " tokens; at most " +
                      std::to_string(kMaxPhraseTokens) + " allowed");
    }
    phrases.push_back(std::move(phrase));
  }
  return OffensiveLexicon::from_phrases(std::move(phrases), line_no);
}

MatchSet match_phrases(std::span<const std::string> tokens, const OffensiveLexicon &lex) {
  return lex.matcher().find_all(tokens);
}

Coverage offensiveness_ratio(std::span<const std::string> tokens, const OffensiveLexicon &lex) {
  Coverage c;
  c.total = tokens.size();
  if (tokens.empty()) {
    c.insufficient_text = true;
    return c;
  }
  std::vector<bool> covered(tokens.size(), false);
  for (const auto &m : match_phrases(tokens, lex)) {
    std::fill_n(covered.begin() + static_cast<std::ptrdiff_t>(m.start), m.length, true);
  }
  c.covered = static_cast<std::size_t>(std::count(covered.begin(), covered.end(), true));
  c.ratio = static_cast<double>(c.covered) / static_cast<double>(c.total);
  return c;
}

Label label(double ratio, double threshold, bool insufficient_text) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw Error(ErrorCode::InvalidThreshold,
                "threshold " + std::to_string(threshold) + " outside [0, 1]");
  }
  if (!(ratio >= 0.0 && ratio <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "ratio " + std::to_string(ratio) + " outside [0, 1]");
  }
  Label l;
  l.ratio = ratio;
  l.insufficient_text = insufficient_text;
  l.value = (!insufficient_text && ratio > threshold) ? Verdict::Offensive : Verdict::NonOffensive;
  return l;
}

std::string_view verdict_name(Verdict v) noexcept {
  return v == Verdict::Offensive ? "offensive" : "non_offensive";
}

}  // namespace adgate::lexicon
