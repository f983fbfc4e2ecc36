// Copyright 2026 The spanparse Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SPANPARSE_TREEBANK_HPP_
#define SPANPARSE_TREEBANK_HPP_

// Bracketed parse trees: reading, writing, normalization, and the span and
// word-position label sets used by the decoder, the trainer and evaluation.

#include <algorithm>
#include <cctype>
#include <compare>
#include <cstddef>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "spanparse/error.hpp"

namespace spanparse {

inline constexpr std::string_view kUnkTag = "UNK";
inline constexpr std::string_view kEdited = "EDITED";
inline constexpr std::string_view kIntj = "INTJ";
inline constexpr std::string_view kPrn = "PRN";

struct Token {
  std::string surface;
  std::size_t index = 0;
  std::string tag;

  bool operator==(const Token&) const = default;
};

// A node is either a preterminal (token set, no children) or an internal
// constituent with one or more children.
struct ParseTree {
  std::string label;
  std::vector<ParseTree> children;
  std::optional<Token> token;

  static ParseTree preterminal(std::string tag, std::string word, std::size_t index = 0) {
    ParseTree t;
    t.label = tag;
    t.token = Token{std::move(word), index, std::move(tag)};
    return t;
  }

  static ParseTree internal(std::string label, std::vector<ParseTree> children) {
    ParseTree t;
    t.label = std::move(label);
    t.children = std::move(children);
    return t;
  }

  bool is_preterminal() const { return token.has_value(); }

  bool operator==(const ParseTree&) const = default;
};

struct LabeledSpan {
  std::size_t i = 0;
  std::size_t j = 0;
  std::string label;

  auto operator<=>(const LabeledSpan&) const = default;
  bool operator==(const LabeledSpan&) const = default;
};

struct DisfluencySets {
  std::set<std::size_t> edited;  // W_E
  std::set<std::size_t> intj;    // W_I
  std::set<std::size_t> prn;     // W_P
  std::set<std::size_t> eip;     // W_EIP
};

enum class Provenance { kGold, kSilver };

inline std::string_view to_string(Provenance p) {
  return p == Provenance::kGold ? "gold" : "silver";
}

struct CorpusEntry {
  std::vector<std::string> sentence;
  ParseTree tree;
};

struct Corpus {
  std::vector<CorpusEntry> entries;
  Provenance provenance = Provenance::kGold;

  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }
};

// ---------------------------------------------------------------------------
// Label helpers

// Splits a composite unary-chain label "S+VP" into its components.
inline std::vector<std::string> label_components(std::string_view label) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t plus = label.find('+', start);
    if (plus == std::string_view::npos) {
      parts.emplace_back(label.substr(start));
      break;
    }
    parts.emplace_back(label.substr(start, plus - start));
    start = plus + 1;
  }
  return parts;
}

inline bool label_has_component(std::string_view label, std::string_view component) {
  for (const auto& part : label_components(label)) {
    if (part == component) return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Traversal

namespace detail {

template <class Fn>
void for_each_leaf(const ParseTree& t, Fn&& fn) {
  if (t.is_preterminal()) {
    fn(*t.token);
    return;
  }
  for (const auto& c : t.children) for_each_leaf(c, fn);
}

inline void renumber(ParseTree& t, std::size_t& next) {
  if (t.is_preterminal()) {
    t.token->index = next++;
    return;
  }
  for (auto& c : t.children) renumber(c, next);
}

inline std::size_t count_leaves(const ParseTree& t) {
  if (t.is_preterminal()) return 1;
  std::size_t n = 0;
  for (const auto& c : t.children) n += count_leaves(c);
  return n;
}

}  // namespace detail

inline std::size_t num_tokens(const ParseTree& t) { return detail::count_leaves(t); }

inline std::vector<std::string> words(const ParseTree& t) {
  std::vector<std::string> out;
  detail::for_each_leaf(t, [&](const Token& tok) { out.push_back(tok.surface); });
  return out;
}

inline std::vector<Token> tokens(const ParseTree& t) {
  std::vector<Token> out;
  detail::for_each_leaf(t, [&](const Token& tok) { out.push_back(tok); });
  return out;
}

// Reassigns token indices 0..n-1 left to right.
inline void renumber_tokens(ParseTree& t) {
  std::size_t next = 0;
  detail::renumber(t, next);
}

// Checks the structural invariants; throws DataError on violation.
inline void validate(const ParseTree& t) {
  struct Walker {
    std::size_t next = 0;
    void walk(const ParseTree& node, bool root) {
      if (node.label.empty()) throw DataError("tree node with empty label");
      if (node.is_preterminal()) {
        if (root) throw DataError("tree root is a preterminal");
        if (!node.children.empty()) throw DataError("preterminal with children");
        if (node.token->surface.empty()) throw DataError("empty token surface");
        if (node.token->tag != node.label) throw DataError("preterminal tag/label mismatch");
        if (node.token->index != next) {
          throw DataError("token index " + std::to_string(node.token->index) +
                          " out of order, expected " + std::to_string(next));
        }
        ++next;
        return;
      }
      if (node.children.empty()) throw DataError("internal node '" + node.label + "' has no children");
      for (const auto& c : node.children) walk(c, false);
    }
  } w;
  w.walk(t, true);
}

// ---------------------------------------------------------------------------
// Reading and writing

namespace detail {

class BracketReader {
 public:
  explicit BracketReader(std::string_view text) : text_(text) {}

  ParseTree read() {
    check_balance();
    skip_ws();
    if (pos_ >= text_.size()) throw TreeSyntaxError("empty input", pos_);
    if (text_[pos_] != '(') throw TreeSyntaxError("expected '('", pos_);
    ParseTree t = node();
    skip_ws();
    if (pos_ < text_.size()) throw TreeSyntaxError("trailing content after tree", pos_);
    if (t.is_preterminal()) throw TreeSyntaxError("tree root is a preterminal", 0);
    renumber_tokens(t);
    return t;
  }

 private:
  static bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

  // Balance is checked up front so that an unclosed tree is reported as
  // such rather than as whatever structural problem precedes the end.
  void check_balance() const {
    long depth = 0;
    for (std::size_t k = 0; k < text_.size(); ++k) {
      if (text_[k] == '(') {
        ++depth;
      } else if (text_[k] == ')') {
        if (--depth < 0) throw TreeSyntaxError("unbalanced ')'", k);
      }
    }
    if (depth > 0) throw TreeSyntaxError("unbalanced parentheses, missing ')'", text_.size());
  }

  void skip_ws() {
    while (pos_ < text_.size() && is_space(text_[pos_])) ++pos_;
  }

  std::string atom() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && !is_space(text_[pos_]) && text_[pos_] != '(' &&
           text_[pos_] != ')') {
      ++pos_;
    }
    return std::string(text_.substr(start, pos_ - start));
  }

  ParseTree node() {
    const std::size_t open = pos_;
    ++pos_;  // '('
    skip_ws();
    std::string label = atom();
    skip_ws();
    if (text_[pos_] == ')') throw TreeSyntaxError("empty constituent", open);
    if (text_[pos_] != '(') {
      const std::size_t word_at = pos_;
      std::string word = atom();
      skip_ws();
      if (text_[pos_] != ')') throw TreeSyntaxError("bare token at internal position", word_at);
      ++pos_;
      if (label.empty()) throw TreeSyntaxError("preterminal without a tag", open);
      return ParseTree::preterminal(label, std::move(word));
    }
    std::vector<ParseTree> children;
    while (true) {
      skip_ws();
      if (text_[pos_] == ')') {
        ++pos_;
        break;
      }
      if (text_[pos_] != '(') throw TreeSyntaxError("bare token at internal position", pos_);
      children.push_back(node());
    }
    if (label.empty()) {
      // Treebank-style "( (S ...) )" wrapper.
      if (children.size() != 1) throw TreeSyntaxError("constituent without a label", open);
      return std::move(children.front());
    }
    return ParseTree::internal(std::move(label), std::move(children));
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

inline void write_tree(const ParseTree& t, std::string& out) {
  out += '(';
  out += t.label;
  if (t.is_preterminal()) {
    out += ' ';
    out += t.token->surface;
  } else {
    for (const auto& c : t.children) {
      out += ' ';
      write_tree(c, out);
    }
  }
  out += ')';
}

}  // namespace detail

// Parses one bracketed tree such as "(S (NP (UNK a)) (VP (UNK b)))".
// Throws TreeSyntaxError carrying the character offset of the problem.
inline ParseTree parse_bracketed(std::string_view text) {
  return detail::BracketReader(text).read();
}

inline std::string serialize(const ParseTree& t) {
  std::string out;
  detail::write_tree(t, out);
  return out;
}

// ---------------------------------------------------------------------------
// Normalization

struct NormalizeOptions {
  std::set<std::string> punctuation_tags = {".", ",", "?", "!", ":", "``", "''"};
  std::string partial_word_tag = "XX";
};

namespace detail {

inline bool prune(ParseTree& t, const NormalizeOptions& opts) {
  if (t.is_preterminal()) {
    const Token& tok = *t.token;
    const bool partial = tok.tag == opts.partial_word_tag ||
                         (!tok.surface.empty() && tok.surface.back() == '-');
    if (partial || opts.punctuation_tags.count(tok.tag) > 0) return false;
    t.label = std::string(kUnkTag);
    t.token->tag = std::string(kUnkTag);
    return true;
  }
  std::vector<ParseTree> kept;
  kept.reserve(t.children.size());
  for (auto& c : t.children) {
    if (prune(c, opts)) kept.push_back(std::move(c));
  }
  t.children = std::move(kept);
  return !t.children.empty();
}

}  // namespace detail

// Removes partial words and punctuation, prunes emptied constituents and
// rewrites every preterminal tag to UNK. Returns nullopt when nothing is
// left of the sentence.
inline std::optional<ParseTree> normalize(ParseTree tree, const NormalizeOptions& opts = {}) {
  if (!detail::prune(tree, opts)) return std::nullopt;
  if (tree.is_preterminal()) return std::nullopt;
  renumber_tokens(tree);
  return tree;
}

// ---------------------------------------------------------------------------
// Span and word-position sets

namespace detail {

inline std::size_t collect_spans(const ParseTree& node, std::size_t start,
                                 std::vector<LabeledSpan>& out) {
  if (node.is_preterminal()) return start + 1;
  // Follow the unary chain of internal nodes down from here.
  const ParseTree* cur = &node;
  std::string label = cur->label;
  while (cur->children.size() == 1 && !cur->children.front().is_preterminal()) {
    cur = &cur->children.front();
    label += '+';
    label += cur->label;
  }
  const std::size_t slot = out.size();
  out.push_back(LabeledSpan{start, start, std::move(label)});
  std::size_t end = start;
  for (const auto& c : cur->children) end = collect_spans(c, end, out);
  out[slot].j = end;
  return end;
}

inline void collect_disfluency(const ParseTree& node, bool in_e, bool in_i, bool in_p,
                               std::size_t& pos, DisfluencySets& sets) {
  if (node.is_preterminal()) {
    if (in_e) sets.edited.insert(pos);
    if (in_i) sets.intj.insert(pos);
    if (in_p) sets.prn.insert(pos);
    if (in_e || in_i || in_p) sets.eip.insert(pos);
    ++pos;
    return;
  }
  in_e = in_e || label_has_component(node.label, kEdited);
  in_i = in_i || label_has_component(node.label, kIntj);
  in_p = in_p || label_has_component(node.label, kPrn);
  for (const auto& c : node.children) collect_disfluency(c, in_e, in_i, in_p, pos, sets);
}

}  // namespace detail

// One span per maximal unary chain of internal nodes, labels joined with '+'
// top-down. Preterminals are not spans. Sorted.
inline std::vector<LabeledSpan> labeled_spans(const ParseTree& tree) {
  std::vector<LabeledSpan> out;
  detail::collect_spans(tree, 0, out);
  std::sort(out.begin(), out.end());
  return out;
}

inline DisfluencySets disfluency_sets(const ParseTree& tree) {
  DisfluencySets sets;
  std::size_t pos = 0;
  detail::collect_disfluency(tree, false, false, false, pos, sets);
  return sets;
}

// ---------------------------------------------------------------------------
// Files: one tree per line / one space-tokenized sentence per line.

inline std::vector<std::string> split_whitespace(std::string_view line) {
  std::vector<std::string> out;
  std::size_t k = 0;
  while (k < line.size()) {
    while (k < line.size() && std::isspace(static_cast<unsigned char>(line[k]))) ++k;
    const std::size_t start = k;
    while (k < line.size() && !std::isspace(static_cast<unsigned char>(line[k]))) ++k;
    if (k > start) out.emplace_back(line.substr(start, k - start));
  }
  return out;
}

struct ReadStats {
  std::size_t lines = 0;
  std::size_t skipped_empty = 0;  // emptied by normalization
};

inline Corpus read_corpus(const std::string& path, Provenance provenance, bool apply_normalize,
                          ReadStats* stats = nullptr, const NormalizeOptions& opts = {}) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus file '" + path + "'");
  Corpus corpus;
  corpus.provenance = provenance;
  ReadStats local;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ++local.lines;
    ParseTree tree;
    try {
      tree = parse_bracketed(line);
    } catch (const TreeSyntaxError& e) {
      throw DataError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    if (apply_normalize) {
      auto normalized = normalize(std::move(tree), opts);
      if (!normalized) {
        ++local.skipped_empty;
        continue;
      }
      tree = std::move(*normalized);
    }
    corpus.entries.push_back(CorpusEntry{words(tree), std::move(tree)});
  }
  if (stats) *stats = local;
  return corpus;
}

inline void write_corpus(const std::string& path, const Corpus& corpus) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write corpus file '" + path + "'");
  for (const auto& e : corpus.entries) out << serialize(e.tree) << '\n';
  if (!out) throw DataError("write failed for '" + path + "'");
}

// Reads a sentence file. Blank lines come back as empty sentences so that
// line alignment with sidecar files is preserved.
inline std::vector<std::vector<std::string>> read_sentences(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open sentence file '" + path + "'");
  std::vector<std::vector<std::string>> out;
  std::string line;
  while (std::getline(in, line)) out.push_back(split_whitespace(line));
  return out;
}

inline void write_sentences(const std::string& path,
                            const std::vector<std::vector<std::string>>& sentences) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write sentence file '" + path + "'");
  for (const auto& s : sentences) {
    for (std::size_t k = 0; k < s.size(); ++k) out << (k ? " " : "") << s[k];
    out << '\n';
  }
}

}  // namespace spanparse

#endif  // SPANPARSE_TREEBANK_HPP_
