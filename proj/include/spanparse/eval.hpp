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

#ifndef SPANPARSE_EVAL_HPP_
#define SPANPARSE_EVAL_HPP_

// Span-level and word-level precision/recall/f-score with EDITED and
// EDITED+INTJ+PRN filters, micro-averaged over a corpus, plus a breakdown of
// EDITED word f-score by disfluency type.

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "spanparse/error.hpp"
#include "spanparse/treebank.hpp"

namespace spanparse {

enum class DisfluencyType { kRepetition, kCorrection, kRestart };

inline constexpr std::array<DisfluencyType, 3> kAllDisfluencyTypes = {
    DisfluencyType::kRepetition, DisfluencyType::kCorrection, DisfluencyType::kRestart};

inline std::string_view to_string(DisfluencyType t) {
  switch (t) {
    case DisfluencyType::kRepetition: return "Repetition";
    case DisfluencyType::kCorrection: return "Correction";
    case DisfluencyType::kRestart: return "Restart";
  }
  return "?";
}

inline DisfluencyType parse_disfluency_type(std::string_view s) {
  for (auto t : kAllDisfluencyTypes) {
    if (to_string(t) == s) return t;
  }
  throw DataError("unknown disfluency type '" + std::string(s) + "'");
}

struct CategoryRecord {
  std::string category;
  std::size_t matched = 0;
  std::size_t predicted = 0;
  std::size_t gold = 0;
  double precision = 0.0;
  double recall = 0.0;
  double fscore = 0.0;
  bool precision_undefined = false;  // no predictions: precision reported as 0
  bool recall_undefined = false;     // no gold items: recall reported as 0
};

inline CategoryRecord make_record(std::string category, std::size_t matched, std::size_t predicted,
                                  std::size_t gold) {
  CategoryRecord r{std::move(category), matched, predicted, gold};
  r.precision_undefined = predicted == 0;
  r.recall_undefined = gold == 0;
  r.precision = predicted ? static_cast<double>(matched) / static_cast<double>(predicted) : 0.0;
  r.recall = gold ? static_cast<double>(matched) / static_cast<double>(gold) : 0.0;
  r.fscore = (r.precision + r.recall) > 0 ? 2 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  return r;
}

enum class SpanFilter { kAll, kEdited, kEip };
enum class WordCategory { kEdited, kEip };

namespace detail {

inline void check_aligned(std::span<const ParseTree> gold, std::span<const ParseTree> pred) {
  if (gold.size() != pred.size()) {
    throw DataError("corpus misalignment: " + std::to_string(gold.size()) + " gold vs " +
                    std::to_string(pred.size()) + " predicted trees");
  }
  for (std::size_t k = 0; k < gold.size(); ++k) {
    if (num_tokens(gold[k]) != num_tokens(pred[k])) {
      throw DataError("sentence " + std::to_string(k) + ": gold has " + std::to_string(num_tokens(gold[k])) +
                      " tokens, prediction has " + std::to_string(num_tokens(pred[k])));
    }
  }
}

inline bool keep_span(const LabeledSpan& s, SpanFilter f) {
  switch (f) {
    case SpanFilter::kAll: return true;
    case SpanFilter::kEdited: return label_has_component(s.label, kEdited);
    case SpanFilter::kEip:
      return label_has_component(s.label, kEdited) || label_has_component(s.label, kIntj) ||
             label_has_component(s.label, kPrn);
  }
  return false;
}

inline std::string_view span_category(SpanFilter f) {
  switch (f) {
    case SpanFilter::kAll: return "S";
    case SpanFilter::kEdited: return "S_E";
    case SpanFilter::kEip: return "S_EIP";
  }
  return "?";
}

inline const std::set<std::size_t>& word_set(const DisfluencySets& s, WordCategory c) {
  return c == WordCategory::kEdited ? s.edited : s.eip;
}

inline std::size_t intersection_size(const std::set<std::size_t>& a, const std::set<std::size_t>& b) {
  std::size_t n = 0;
  for (auto x : a) n += b.count(x);
  return n;
}

}  // namespace detail

// Multiset matching of (i, j, label) per sentence, summed over the corpus.
inline CategoryRecord span_prf(std::span<const ParseTree> gold, std::span<const ParseTree> pred,
                               SpanFilter filter) {
  detail::check_aligned(gold, pred);
  std::size_t matched = 0, n_pred = 0, n_gold = 0;
  for (std::size_t k = 0; k < gold.size(); ++k) {
    std::map<LabeledSpan, std::size_t> g;
    for (auto& s : labeled_spans(gold[k])) {
      if (detail::keep_span(s, filter)) {
        ++g[s];
        ++n_gold;
      }
    }
    for (auto& s : labeled_spans(pred[k])) {
      if (!detail::keep_span(s, filter)) continue;
      ++n_pred;
      auto it = g.find(s);
      if (it != g.end() && it->second > 0) {
        --it->second;
        ++matched;
      }
    }
  }
  return make_record(std::string(detail::span_category(filter)), matched, n_pred, n_gold);
}

inline CategoryRecord word_prf(std::span<const ParseTree> gold, std::span<const ParseTree> pred,
                               WordCategory category) {
  detail::check_aligned(gold, pred);
  std::size_t matched = 0, n_pred = 0, n_gold = 0;
  for (std::size_t k = 0; k < gold.size(); ++k) {
    const auto gs = disfluency_sets(gold[k]);
    const auto ps = disfluency_sets(pred[k]);
    const auto& g = detail::word_set(gs, category);
    const auto& p = detail::word_set(ps, category);
    n_gold += g.size();
    n_pred += p.size();
    matched += detail::intersection_size(g, p);
  }
  return make_record(category == WordCategory::kEdited ? "W_E" : "W_EIP", matched, n_pred, n_gold);
}

// ---------------------------------------------------------------------------
// Disfluency typology

struct TypedRegion {
  std::size_t i = 0;
  std::size_t j = 0;
  DisfluencyType type = DisfluencyType::kCorrection;

  bool operator==(const TypedRegion&) const = default;
};

// One list of EDITED regions per sentence.
using TypeAnnotations = std::vector<std::vector<TypedRegion>>;

namespace detail {

inline std::string lowercase(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace detail

// Repetition when the next |reparandum| fluent tokens after any interregnum
// copy the reparandum; Restart when nothing follows or no position of the
// following tokens lines up with the reparandum; Correction otherwise.
inline DisfluencyType classify_disfluency(const ParseTree& tree, const LabeledSpan& edited_span) {
  bool found = false;
  for (const auto& s : labeled_spans(tree)) {
    if (s.i == edited_span.i && s.j == edited_span.j && label_has_component(s.label, kEdited)) found = true;
  }
  if (!found) {
    throw DataError("span (" + std::to_string(edited_span.i) + "," + std::to_string(edited_span.j) +
                    ") is not an EDITED constituent");
  }
  const auto w = words(tree);
  const auto sets = disfluency_sets(tree);
  std::vector<std::string> reparandum;
  for (std::size_t k = edited_span.i; k < edited_span.j; ++k) reparandum.push_back(detail::lowercase(w[k]));

  std::size_t pos = edited_span.j;
  while (pos < w.size() && (sets.intj.count(pos) || sets.prn.count(pos))) ++pos;
  std::vector<std::string> repair;
  for (; pos < w.size() && repair.size() < reparandum.size(); ++pos) {
    if (!sets.eip.count(pos)) repair.push_back(detail::lowercase(w[pos]));
  }
  if (repair.empty()) return DisfluencyType::kRestart;
  if (repair == reparandum) return DisfluencyType::kRepetition;
  for (std::size_t k = 0; k < repair.size(); ++k) {
    if (repair[k] == reparandum[k]) return DisfluencyType::kCorrection;
  }
  return DisfluencyType::kRestart;
}

// Outermost EDITED spans of a tree, typed by classify_disfluency.
inline std::vector<TypedRegion> classify_regions(const ParseTree& tree) {
  std::vector<TypedRegion> out;
  for (const auto& s : labeled_spans(tree)) {
    if (!label_has_component(s.label, kEdited)) continue;
    bool nested = false;
    for (const auto& r : out) nested = nested || (r.i <= s.i && s.j <= r.j);
    if (!nested) out.push_back(TypedRegion{s.i, s.j, classify_disfluency(tree, s)});
  }
  return out;
}

// F(W_E) with gold and predicted positions restricted to the gold EDITED
// regions of each type. Annotations, when given, override the heuristic.
inline std::vector<CategoryRecord> typology_report(std::span<const ParseTree> gold,
                                                   std::span<const ParseTree> pred,
                                                   const TypeAnnotations* annotations = nullptr) {
  detail::check_aligned(gold, pred);
  if (annotations && annotations->size() != gold.size()) {
    throw DataError("type annotations cover " + std::to_string(annotations->size()) + " sentences, corpus has " +
                    std::to_string(gold.size()));
  }
  std::array<std::size_t, 3> matched{}, n_pred{}, n_gold{};
  for (std::size_t k = 0; k < gold.size(); ++k) {
    const auto regions = annotations ? (*annotations)[k] : classify_regions(gold[k]);
    const auto gs = disfluency_sets(gold[k]);
    const auto ps = disfluency_sets(pred[k]);
    for (const auto& r : regions) {
      const auto t = static_cast<std::size_t>(r.type);
      for (std::size_t pos = r.i; pos < r.j; ++pos) {
        const bool g = gs.edited.count(pos) > 0;
        const bool p = ps.edited.count(pos) > 0;
        n_gold[t] += g;
        n_pred[t] += p;
        matched[t] += g && p;
      }
    }
  }
  std::vector<CategoryRecord> out;
  for (auto t : kAllDisfluencyTypes) {
    const auto k = static_cast<std::size_t>(t);
    out.push_back(make_record("W_E[" + std::string(to_string(t)) + "]", matched[k], n_pred[k], n_gold[k]));
  }
  return out;
}

// Sidecar format: "<sentence index>\t<i>-<j>:<Type> ..." one line per sentence.
inline void write_type_annotations(const std::string& path, const TypeAnnotations& a) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  for (std::size_t k = 0; k < a.size(); ++k) {
    out << k << '\t';
    for (std::size_t r = 0; r < a[k].size(); ++r) {
      out << (r ? " " : "") << a[k][r].i << '-' << a[k][r].j << ':' << to_string(a[k][r].type);
    }
    out << '\n';
  }
}

inline TypeAnnotations read_type_annotations(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  TypeAnnotations out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw DataError(path + ":" + std::to_string(lineno) + ": missing tab");
    std::vector<TypedRegion> regions;
    for (const auto& item : split_whitespace(std::string_view(line).substr(tab + 1))) {
      unsigned long i = 0, j = 0;
      char type[32] = {0};
      if (std::sscanf(item.c_str(), "%lu-%lu:%31s", &i, &j, type) != 3 || i >= j) {
        throw DataError(path + ":" + std::to_string(lineno) + ": bad region '" + item + "'");
      }
      regions.push_back(TypedRegion{i, j, parse_disfluency_type(type)});
    }
    out.push_back(std::move(regions));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Reports

struct EvalReport {
  std::size_t sentences = 0;
  CategoryRecord s, s_e, s_eip, w_e, w_eip;
  std::vector<CategoryRecord> typology;

  std::vector<const CategoryRecord*> records() const {
    std::vector<const CategoryRecord*> out = {&s, &s_e, &s_eip, &w_e, &w_eip};
    for (const auto& r : typology) out.push_back(&r);
    return out;
  }
};

inline EvalReport evaluate(std::span<const ParseTree> gold, std::span<const ParseTree> pred,
                           const TypeAnnotations* annotations = nullptr) {
  EvalReport r;
  r.sentences = gold.size();
  r.s = span_prf(gold, pred, SpanFilter::kAll);
  r.s_e = span_prf(gold, pred, SpanFilter::kEdited);
  r.s_eip = span_prf(gold, pred, SpanFilter::kEip);
  r.w_e = word_prf(gold, pred, WordCategory::kEdited);
  r.w_eip = word_prf(gold, pred, WordCategory::kEip);
  r.typology = typology_report(gold, pred, annotations);
  return r;
}

inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

inline std::string record_line(const CategoryRecord& r) {
  std::ostringstream os;
  os << "category=" << r.category << " matched=" << r.matched << " predicted=" << r.predicted
     << " gold=" << r.gold << " P=" << format_number(r.precision) << " R=" << format_number(r.recall)
     << " F=" << format_number(r.fscore);
  if (r.precision_undefined) os << " P_undefined=1";
  if (r.recall_undefined) os << " R_undefined=1";
  return os.str();
}

// Machine-readable key=value records, one per line.
inline std::string report_records(const EvalReport& r) {
  std::string out = "sentences=" + std::to_string(r.sentences) + "\n";
  for (const auto* rec : r.records()) out += record_line(*rec) + "\n";
  return out;
}

inline std::string report_table(const EvalReport& r) {
  std::string out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-16s %8s %9s %8s %8s %8s %8s\n", "category", "matched", "predicted", "gold",
                "P", "R", "F");
  out += buf;
  for (const auto* rec : r.records()) {
    std::snprintf(buf, sizeof buf, "%-16s %8zu %9zu %8zu %8.4f %8.4f %8.4f%s\n", rec->category.c_str(),
                  rec->matched, rec->predicted, rec->gold, rec->precision, rec->recall, rec->fscore,
                  rec->precision_undefined ? "  (P undefined)" : "");
    out += buf;
  }
  return out;
}

inline std::vector<ParseTree> trees_of(const Corpus& c) {
  std::vector<ParseTree> out;
  out.reserve(c.size());
  for (const auto& e : c.entries) out.push_back(e.tree);
  return out;
}

}  // namespace spanparse

#endif  // SPANPARSE_EVAL_HPP_
