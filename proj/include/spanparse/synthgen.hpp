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

#ifndef SPANPARSE_SYNTHGEN_HPP_
#define SPANPARSE_SYNTHGEN_HPP_

// Synthetic treebank generator: fluent trees from a weighted grammar, then
// repetitions, corrections and restarts injected under EDITED nodes with
// optional filled pauses (INTJ) and discourse markers (PRN).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "spanparse/error.hpp"
#include "spanparse/eval.hpp"
#include "spanparse/grammars.hpp"
#include "spanparse/rng.hpp"
#include "spanparse/treebank.hpp"

namespace spanparse {

struct Production {
  std::string lhs;
  std::vector<std::string> rhs;
  double weight = 1.0;
  std::size_t line = 0;
};

// Text format, one directive per line ('#' starts a comment):
//   start SYMBOL
//   rule WEIGHT LHS -> RHS...
//   lex TAG word...
class Grammar {
 public:
  static Grammar parse(std::string_view text) {
    Grammar g;
    std::size_t lineno = 0;
    std::size_t start_line = 0;
    std::istringstream in{std::string(text)};
    std::string line;
    std::map<std::string, std::size_t> lex_line;
    while (std::getline(in, line)) {
      ++lineno;
      if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
      const auto f = split_whitespace(line);
      if (f.empty()) continue;
      if (f[0] == "start") {
        if (f.size() != 2) throw GrammarError("expected 'start SYMBOL'", lineno);
        if (!g.start_.empty()) throw GrammarError("duplicate start directive", lineno);
        g.start_ = f[1];
        start_line = lineno;
      } else if (f[0] == "rule") {
        if (f.size() < 5 || f[3] != "->") throw GrammarError("expected 'rule WEIGHT LHS -> RHS...'", lineno);
        char* end = nullptr;
        const double w = std::strtod(f[1].c_str(), &end);
        if (end != f[1].c_str() + f[1].size() || !std::isfinite(w) || w <= 0) {
          throw GrammarError("weight must be a positive number, got '" + f[1] + "'", lineno);
        }
        check_symbol(f[2], lineno);
        Production p{f[2], std::vector<std::string>(f.begin() + 4, f.end()), w, lineno};
        for (const auto& s : p.rhs) check_symbol(s, lineno);
        for (auto idx : g.by_lhs_[p.lhs]) {
          if (g.productions_[idx].rhs == p.rhs) throw GrammarError("duplicate production for " + p.lhs, lineno);
        }
        g.by_lhs_[p.lhs].push_back(g.productions_.size());
        g.productions_.push_back(std::move(p));
      } else if (f[0] == "lex") {
        if (f.size() < 3) throw GrammarError("expected 'lex TAG word...'", lineno);
        check_symbol(f[1], lineno);
        auto& words = g.lexicon_[f[1]];
        lex_line.emplace(f[1], lineno);
        for (std::size_t k = 2; k < f.size(); ++k) {
          if (std::find(words.begin(), words.end(), f[k]) != words.end()) {
            throw GrammarError("duplicate word '" + f[k] + "' for " + f[1], lineno);
          }
          words.push_back(f[k]);
        }
      } else {
        throw GrammarError("unknown directive '" + f[0] + "'", lineno);
      }
    }
    if (g.start_.empty()) throw GrammarError("missing start directive", lineno == 0 ? 1 : lineno);
    for (const auto& [tag, line_of_tag] : lex_line) {
      if (g.by_lhs_.count(tag)) throw GrammarError(tag + " is both a lexical tag and a nonterminal", line_of_tag);
    }
    if (!g.by_lhs_.count(g.start_)) throw GrammarError("start symbol " + g.start_ + " has no rules", start_line);
    for (const auto& p : g.productions_) {
      for (const auto& s : p.rhs) {
        if (!g.by_lhs_.count(s) && !g.lexicon_.count(s)) throw GrammarError("undefined symbol " + s, p.line);
      }
    }
    g.check_productive();
    return g;
  }

  static Grammar from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open grammar file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
  }

  static const Grammar& conversational() {
    static const Grammar g = parse(kConversationalGrammar);
    return g;
  }

  static const Grammar& written() {
    static const Grammar g = parse(kWrittenGrammar);
    return g;
  }

  const std::string& start() const { return start_; }
  const std::vector<Production>& productions() const { return productions_; }
  bool is_nonterminal(const std::string& s) const { return by_lhs_.count(s) > 0; }
  bool is_tag(const std::string& s) const { return lexicon_.count(s) > 0; }

  const std::vector<std::size_t>& rules_for(const std::string& lhs) const { return by_lhs_.at(lhs); }

  const std::vector<std::string>& lexicon(const std::string& tag) const {
    auto it = lexicon_.find(tag);
    if (it == lexicon_.end()) throw DataError("no lexicon for tag " + tag);
    return it->second;
  }

  std::vector<std::string> nonterminals() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : by_lhs_) out.push_back(k);
    return out;
  }

  std::vector<std::string> tags() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : lexicon_) out.push_back(k);
    return out;
  }

  std::size_t lexicon_size() const {
    std::set<std::string> all;
    for (const auto& [k, v] : lexicon_) all.insert(v.begin(), v.end());
    return all.size();
  }

 private:
  static void check_symbol(const std::string& s, std::size_t line) {
    if (s == kEdited || s == kIntj || s == kPrn) throw GrammarError(s + " is reserved for disfluency nodes", line);
    if (s.find_first_of("+()") != std::string::npos) throw GrammarError("invalid symbol '" + s + "'", line);
  }

  void check_productive() const {
    std::set<std::string> productive;
    bool changed = true;
    while (changed) {
      changed = false;
      for (const auto& p : productions_) {
        if (productive.count(p.lhs)) continue;
        const bool ok = std::all_of(p.rhs.begin(), p.rhs.end(),
                                    [&](const std::string& s) { return lexicon_.count(s) || productive.count(s); });
        if (ok) {
          productive.insert(p.lhs);
          changed = true;
        }
      }
    }
    for (const auto& p : productions_) {
      if (!productive.count(p.lhs)) throw GrammarError(p.lhs + " cannot derive a finite sentence", p.line);
    }
  }

  std::string start_;
  std::vector<Production> productions_;
  std::map<std::string, std::vector<std::size_t>> by_lhs_;
  std::map<std::string, std::vector<std::string>> lexicon_;
};

struct GenerateOptions {
  std::size_t max_length = 40;
  std::size_t max_tries = 1000;
};

namespace detail {

inline constexpr std::size_t kMaxDepth = 500;

// Returns false once the sentence exceeds the length cap or depth guard.
inline bool expand(const Grammar& g, const std::string& symbol, Rng& rng, std::size_t& length,
                   std::size_t max_length, std::size_t depth, ParseTree& out) {
  if (depth > kMaxDepth) return false;
  if (g.is_tag(symbol)) {
    const auto& words = g.lexicon(symbol);
    out = ParseTree::preterminal(symbol, words[rng.below(words.size())]);
    return ++length <= max_length;
  }
  const auto& rules = g.rules_for(symbol);
  std::vector<double> weights;
  weights.reserve(rules.size());
  for (auto r : rules) weights.push_back(g.productions()[r].weight);
  const auto& p = g.productions()[rules[rng.categorical(weights)]];
  out = ParseTree::internal(symbol, {});
  out.children.resize(p.rhs.size());
  for (std::size_t k = 0; k < p.rhs.size(); ++k) {
    if (!expand(g, p.rhs[k], rng, length, max_length, depth + 1, out.children[k])) return false;
  }
  return true;
}

}  // namespace detail

// One tree over at most max_length tokens, by rejection.
inline ParseTree sample_fluent(const Grammar& g, Rng& rng, const GenerateOptions& opts = {}) {
  for (std::size_t attempt = 0; attempt < opts.max_tries; ++attempt) {
    ParseTree t;
    std::size_t length = 0;
    if (detail::expand(g, g.start(), rng, length, opts.max_length, 0, t)) {
      if (t.is_preterminal()) t = ParseTree::internal(g.start(), {std::move(t)});
      renumber_tokens(t);
      return t;
    }
  }
  throw DataError("grammar produced no sentence within " + std::to_string(opts.max_length) + " tokens after " +
                  std::to_string(opts.max_tries) + " attempts");
}

inline std::vector<ParseTree> generate_fluent(const Grammar& g, Rng& rng, std::size_t count,
                                              const GenerateOptions& opts = {}) {
  std::vector<ParseTree> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) out.push_back(sample_fluent(g, rng, opts));
  return out;
}

// ---------------------------------------------------------------------------
// Disfluency injection

struct DisfluencyConfig {
  double disfluent_prob = 0.33;
  // Repetition, Correction, Restart.
  std::array<double, 3> mixture = {0.57, 0.34, 0.09};
  double filler_prob = 0.3;            // INTJ inside the interregnum
  double marker_prob = 0.15;           // PRN inside the interregnum
  double standalone_filler_prob = 0.1;  // INTJ elsewhere in the sentence
  std::vector<std::string> fillers = {"uh", "um"};
  std::vector<std::string> markers = {"i mean", "you know"};
  // Relative weights of reparandum lengths 1, 2, ...
  std::vector<double> length_weights = {0.5, 0.25, 0.15, 0.1};
  double substitution_rate = 0.5;
  std::size_t max_restart_tries = 20;

  std::size_t max_reparandum() const { return length_weights.size(); }

  void validate() const {
    auto prob = [](double p, const char* name) {
      if (!(p >= 0 && p <= 1)) throw UsageError(std::string(name) + " must be in [0,1]");
    };
    prob(disfluent_prob, "disfluent_prob");
    prob(filler_prob, "filler_prob");
    prob(marker_prob, "marker_prob");
    prob(standalone_filler_prob, "standalone_filler_prob");
    prob(substitution_rate, "substitution_rate");
    double total = 0;
    for (double w : mixture) {
      prob(w, "mixture weight");
      total += w;
    }
    if (std::abs(total - 1.0) > 1e-9) throw UsageError("mixture weights must sum to 1");
    if (length_weights.empty()) throw UsageError("length_weights must not be empty");
    for (double w : length_weights) {
      if (!(w >= 0) || !std::isfinite(w)) throw UsageError("length weights must be non-negative");
    }
    if (length_weights[0] <= 0) throw UsageError("length weight for 1 token must be positive");
    if ((filler_prob > 0 || standalone_filler_prob > 0) && fillers.empty()) throw UsageError("no fillers");
    if (marker_prob > 0 && markers.empty()) throw UsageError("no discourse markers");
    for (const auto& m : markers) {
      if (split_whitespace(m).empty()) throw UsageError("empty discourse marker");
    }
  }
};

struct AnnotatedEntry {
  ParseTree tree;
  std::vector<TypedRegion> regions;
  std::vector<std::string> fluent;
  bool fallback = false;  // the drawn type could not be realized; tree left fluent
};

namespace detail {

inline std::size_t cover(const ParseTree& node, std::size_t start, std::size_t a, std::size_t b,
                         std::vector<ParseTree>& out) {
  const std::size_t w = num_tokens(node);
  if (start >= a && start + w <= b) {
    out.push_back(node);
  } else if (start < b && start + w > a) {
    std::size_t pos = start;
    for (const auto& c : node.children) pos += cover(c, pos, a, b, out);
  }
  return w;
}

inline bool insert_before(ParseTree& node, std::size_t start, std::size_t s, std::vector<ParseTree>& nodes) {
  std::size_t pos = start;
  for (std::size_t k = 0; k < node.children.size(); ++k) {
    const std::size_t w = num_tokens(node.children[k]);
    if (pos == s) {
      node.children.insert(node.children.begin() + static_cast<std::ptrdiff_t>(k), nodes.begin(), nodes.end());
      return true;
    }
    if (s < pos + w) return insert_before(node.children[k], pos, s, nodes);
    pos += w;
  }
  return false;
}

inline void collect_internal(const ParseTree& node, std::size_t start,
                             std::vector<std::pair<std::size_t, std::size_t>>& out) {
  if (node.is_preterminal()) return;
  out.emplace_back(start, num_tokens(node));
  std::size_t pos = start;
  for (const auto& c : node.children) {
    collect_internal(c, pos, out);
    pos += num_tokens(c);
  }
}

inline void collect_preterminals(ParseTree& node, std::vector<ParseTree*>& out) {
  if (node.is_preterminal()) {
    out.push_back(&node);
    return;
  }
  for (auto& c : node.children) collect_preterminals(c, out);
}

inline std::size_t draw_length(const DisfluencyConfig& cfg, std::size_t limit, Rng& rng) {
  std::vector<double> w(cfg.length_weights.begin(),
                        cfg.length_weights.begin() + static_cast<std::ptrdiff_t>(std::min(limit, cfg.max_reparandum())));
  return 1 + rng.categorical(w);
}

inline ParseTree filler_node(const std::string& word) {
  return ParseTree::internal(std::string(kIntj), {ParseTree::preterminal("UH", word)});
}

inline ParseTree marker_node(const std::string& phrase) {
  const auto w = split_whitespace(phrase);
  if (w.size() == 1) return ParseTree::internal(std::string(kPrn), {ParseTree::preterminal("UH", w[0])});
  std::vector<ParseTree> verb;
  for (std::size_t k = 1; k < w.size(); ++k) verb.push_back(ParseTree::preterminal("VBP", w[k]));
  return ParseTree::internal(
      std::string(kPrn),
      {ParseTree::internal("S", {ParseTree::internal("NP", {ParseTree::preterminal("PRP", w[0])}),
                                 ParseTree::internal("VP", std::move(verb))})});
}

}  // namespace detail

// Copies of the maximal subtrees covering tokens [s, s + len).
inline std::vector<ParseTree> reparandum_copy(const ParseTree& tree, std::size_t s, std::size_t len) {
  if (len == 0 || s + len > num_tokens(tree)) throw UsageError("reparandum out of range");
  std::vector<ParseTree> out;
  detail::cover(tree, 0, s, s + len, out);
  return out;
}

inline ParseTree make_edited(std::vector<ParseTree> children) {
  return ParseTree::internal(std::string(kEdited), std::move(children));
}

// Inserts the EDITED node followed by the interregnum before the highest
// constituent that starts at token s.
inline ParseTree insert_disfluency(ParseTree tree, std::size_t s, ParseTree edited,
                                   std::vector<ParseTree> interregnum = {}) {
  if (tree.is_preterminal() || s >= num_tokens(tree)) throw UsageError("insertion point out of range");
  std::vector<ParseTree> nodes;
  nodes.push_back(std::move(edited));
  for (auto& n : interregnum) nodes.push_back(std::move(n));
  detail::insert_before(tree, 0, s, nodes);
  renumber_tokens(tree);
  return tree;
}

// Outermost EDITED regions of tree, all given the same type.
inline std::vector<TypedRegion> edited_regions(const ParseTree& tree, DisfluencyType type) {
  auto regions = classify_regions(tree);
  for (auto& r : regions) r.type = type;
  return regions;
}

namespace detail {

inline std::vector<ParseTree> draw_interregnum(const DisfluencyConfig& cfg, Rng& rng) {
  std::vector<ParseTree> out;
  if (rng.bernoulli(cfg.filler_prob)) out.push_back(filler_node(cfg.fillers[rng.below(cfg.fillers.size())]));
  if (rng.bernoulli(cfg.marker_prob)) out.push_back(marker_node(cfg.markers[rng.below(cfg.markers.size())]));
  return out;
}

inline std::optional<ParseTree> realize(const Grammar& g, const ParseTree& fluent, DisfluencyType type,
                                        const DisfluencyConfig& cfg, const GenerateOptions& gen, Rng& rng) {
  const auto w = words(fluent);
  if (type == DisfluencyType::kRestart) {
    for (std::size_t attempt = 0; attempt < cfg.max_restart_tries; ++attempt) {
      const ParseTree other = sample_fluent(g, rng, gen);
      const auto ow = words(other);
      if (ow.size() < 2) continue;
      const std::size_t len = draw_length(cfg, ow.size() - 1, rng);
      bool aligned = false;
      for (std::size_t k = 0; k < len && k < w.size(); ++k) aligned = aligned || ow[k] == w[k];
      if (aligned) continue;
      return insert_disfluency(fluent, 0, make_edited(reparandum_copy(other, 0, len)), draw_interregnum(cfg, rng));
    }
    return std::nullopt;
  }
  std::vector<std::pair<std::size_t, std::size_t>> sites;
  collect_internal(fluent, 0, sites);
  const auto [s, width] = sites[rng.below(sites.size())];
  const std::size_t len = draw_length(cfg, width, rng);
  ParseTree edited = make_edited(reparandum_copy(fluent, s, len));
  if (type == DisfluencyType::kCorrection) {
    std::vector<ParseTree*> leaves;
    collect_preterminals(edited, leaves);
    std::vector<std::size_t> candidates, chosen;
    for (std::size_t k = 0; k < leaves.size(); ++k) {
      if (g.is_tag(leaves[k]->label) && g.lexicon(leaves[k]->label).size() > 1) candidates.push_back(k);
    }
    if (candidates.empty()) return std::nullopt;
    for (auto k : candidates) {
      if (rng.bernoulli(cfg.substitution_rate)) chosen.push_back(k);
    }
    if (chosen.empty()) chosen.push_back(candidates[rng.below(candidates.size())]);
    // Keep one token in place so that the repair still lines up.
    if (chosen.size() == leaves.size() && leaves.size() > 1) chosen.erase(chosen.begin() + rng.below(chosen.size()));
    for (auto k : chosen) {
      const auto& lex = g.lexicon(leaves[k]->label);
      std::string word;
      do {
        word = lex[rng.below(lex.size())];
      } while (word == leaves[k]->token->surface);
      leaves[k]->token->surface = word;
    }
  }
  return insert_disfluency(fluent, s, std::move(edited), draw_interregnum(cfg, rng));
}

inline void add_standalone_filler(ParseTree& tree, const DisfluencyConfig& cfg, Rng& rng) {
  const std::size_t at = rng.below(tree.children.size() + 1);
  tree.children.insert(tree.children.begin() + static_cast<std::ptrdiff_t>(at),
                       filler_node(cfg.fillers[rng.below(cfg.fillers.size())]));
  renumber_tokens(tree);
}

}  // namespace detail

// Injects one disfluency of the given type (the caller decides whether to).
inline AnnotatedEntry inject_typed(const Grammar& g, const ParseTree& fluent, DisfluencyType type,
                                   const DisfluencyConfig& cfg, Rng& rng, const GenerateOptions& gen = {}) {
  AnnotatedEntry e;
  e.fluent = words(fluent);
  auto tree = detail::realize(g, fluent, type, cfg, gen, rng);
  if (tree) {
    e.tree = std::move(*tree);
    e.regions = edited_regions(e.tree, type);
  } else {
    e.tree = fluent;
    e.fallback = true;
  }
  return e;
}

inline AnnotatedEntry inject_disfluency(const Grammar& g, const ParseTree& fluent, const DisfluencyConfig& cfg,
                                        Rng& rng, const GenerateOptions& gen = {}) {
  AnnotatedEntry e;
  if (rng.bernoulli(cfg.disfluent_prob)) {
    const auto type = kAllDisfluencyTypes[rng.categorical({cfg.mixture.begin(), cfg.mixture.end()})];
    e = inject_typed(g, fluent, type, cfg, rng, gen);
  } else {
    e.tree = fluent;
    e.fluent = words(fluent);
  }
  if (rng.bernoulli(cfg.standalone_filler_prob)) {
    detail::add_standalone_filler(e.tree, cfg, rng);
    if (!e.regions.empty()) e.regions = edited_regions(e.tree, e.regions.front().type);
  }
  return e;
}

// Fluent tree, optional disfluency, tags rewritten to UNK.
inline std::vector<AnnotatedEntry> generate_annotated(const Grammar& g, const DisfluencyConfig& cfg, Rng& rng,
                                                      std::size_t count, const GenerateOptions& gen = {}) {
  cfg.validate();
  std::vector<AnnotatedEntry> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    auto e = inject_disfluency(g, sample_fluent(g, rng, gen), cfg, rng, gen);
    e.tree = *normalize(std::move(e.tree));
    out.push_back(std::move(e));
  }
  return out;
}

struct CorpusStats {
  std::size_t sentences = 0;
  std::size_t words = 0;
  std::size_t edited_words = 0;
  std::size_t eip_words = 0;
  std::size_t disfluent_sentences = 0;
  std::size_t fallbacks = 0;
  std::array<std::size_t, 3> type_counts{};

  void add(const AnnotatedEntry& e) {
    const auto d = disfluency_sets(e.tree);
    ++sentences;
    words += num_tokens(e.tree);
    edited_words += d.edited.size();
    eip_words += d.eip.size();
    disfluent_sentences += !e.regions.empty();
    fallbacks += e.fallback;
    for (const auto& r : e.regions) ++type_counts[static_cast<std::size_t>(r.type)];
  }

  double edited_rate() const { return words ? static_cast<double>(edited_words) / static_cast<double>(words) : 0.0; }
};

struct CorpusSizes {
  std::size_t train = 2000;
  std::size_t dev = 500;
  std::size_t test = 500;
  std::size_t unlabeled = 20000;
};

struct EmitConfig {
  CorpusSizes sizes;
  DisfluencyConfig disfluency;
  GenerateOptions generate;
  std::uint64_t seed = 1;
};

struct EmitResult {
  std::map<std::string, CorpusStats> stats;  // keyed by split name
  std::vector<std::filesystem::path> files;
};

// Writes train/dev/test .trees with .types sidecars and unlabeled.txt. When
// unlabeled_grammar is given the unlabeled text is drawn fluent from it
// instead of from the gold distribution.
inline EmitResult emit_corpora(const Grammar& g, const EmitConfig& cfg, const std::filesystem::path& out_dir,
                               const Grammar* unlabeled_grammar = nullptr) {
  cfg.disfluency.validate();
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw DataError("cannot create '" + out_dir.string() + "': " + ec.message());
  EmitResult result;
  const std::array<std::pair<const char*, std::size_t>, 3> splits = {
      {{"train", cfg.sizes.train}, {"dev", cfg.sizes.dev}, {"test", cfg.sizes.test}}};
  for (std::size_t k = 0; k < splits.size(); ++k) {
    Rng rng(derive_seed(cfg.seed, k));
    const auto entries = generate_annotated(g, cfg.disfluency, rng, splits[k].second, cfg.generate);
    Corpus corpus;
    TypeAnnotations types;
    auto& stats = result.stats[splits[k].first];
    for (const auto& e : entries) {
      corpus.entries.push_back(CorpusEntry{words(e.tree), e.tree});
      types.push_back(e.regions);
      stats.add(e);
    }
    const auto trees = out_dir / (std::string(splits[k].first) + ".trees");
    const auto sidecar = out_dir / (std::string(splits[k].first) + ".types");
    write_corpus(trees.string(), corpus);
    write_type_annotations(sidecar.string(), types);
    result.files.push_back(trees);
    result.files.push_back(sidecar);
  }
  Rng rng(derive_seed(cfg.seed, splits.size()));
  std::vector<std::vector<std::string>> sentences;
  auto& stats = result.stats["unlabeled"];
  if (unlabeled_grammar) {
    for (auto& t : generate_fluent(*unlabeled_grammar, rng, cfg.sizes.unlabeled, cfg.generate)) {
      AnnotatedEntry e{t, {}, words(t)};
      stats.add(e);
      sentences.push_back(std::move(e.fluent));
    }
  } else {
    for (const auto& e : generate_annotated(g, cfg.disfluency, rng, cfg.sizes.unlabeled, cfg.generate)) {
      stats.add(e);
      sentences.push_back(words(e.tree));
    }
  }
  const auto unlabeled = out_dir / "unlabeled.txt";
  write_sentences(unlabeled.string(), sentences);
  result.files.push_back(unlabeled);
  return result;
}

}  // namespace spanparse

#endif  // SPANPARSE_SYNTHGEN_HPP_
