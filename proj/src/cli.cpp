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

#include "spanparse/cli.hpp"

#include <openssl/evp.h>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "spanparse/checkpoint.hpp"
#include "spanparse/error.hpp"
#include "spanparse/eval.hpp"
#include "spanparse/pipeline.hpp"
#include "spanparse/synthgen.hpp"
#include "spanparse/treebank.hpp"

namespace spanparse::cli {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Utilities

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "' for hashing");
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw Error(ErrorKind::kData, "sha256 init failed");
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md, &len);
  std::string hex;
  char two[3];
  for (unsigned int k = 0; k < len; ++k) {
    std::snprintf(two, sizeof two, "%02x", md[k]);
    hex += two;
  }
  return hex;
}

// First free path among base, base-1, base-2, ...; created before returning.
inline fs::path unique_run_dir(const fs::path& base) {
  fs::path candidate = base;
  for (std::size_t k = 1; fs::exists(candidate); ++k) candidate = fs::path(base.string() + "-" + std::to_string(k));
  std::error_code ec;
  fs::create_directories(candidate, ec);
  if (ec) throw DataError("cannot create run directory '" + candidate.string() + "': " + ec.message());
  return candidate;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw DataError("write failed for '" + path.string() + "'");
}

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

inline std::string join_list(const std::vector<std::string>& v) {
  std::string out;
  for (std::size_t k = 0; k < v.size(); ++k) out += (k ? "," : "") + v[k];
  return out;
}

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Options and settings

enum class OptionKind { kValue, kFlag, kList };

struct OptionSpec {
  std::string key;  // flag name without dashes; also the config-file key
  std::string default_value;
  std::string help;
  OptionKind kind = OptionKind::kValue;
  bool input_file = false;  // digested into the manifest
};

class Settings {
 public:
  Settings() = default;
  explicit Settings(std::map<std::string, std::string> values) : values_(std::move(values)) {}

  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
  bool has(const std::string& key) const {
    auto it = values_.find(key);
    return it != values_.end() && !it->second.empty();
  }
  const std::string& str(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw UsageError("unknown setting '" + key + "'");
    return it->second;
  }
  const std::string& required(const std::string& key) const {
    if (!has(key)) throw UsageError("--" + key + " is required");
    return str(key);
  }
  double real(const std::string& key) const {
    const auto& s = required(key);
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size()) throw UsageError("--" + key + ": not a number: '" + s + "'");
    return v;
  }
  std::uint64_t u64(const std::string& key) const {
    const auto& s = required(key);
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
      if (!s.empty() && s[0] != '-') v = std::stoull(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size()) throw UsageError("--" + key + ": not a non-negative integer: '" + s + "'");
    return v;
  }
  std::size_t count(const std::string& key) const { return static_cast<std::size_t>(u64(key)); }
  bool flag(const std::string& key) const {
    const auto& s = str(key);
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s.empty() || s == "false" || s == "0" || s == "no") return false;
    throw UsageError("--" + key + ": expected true or false, got '" + s + "'");
  }
  std::vector<std::string> list(const std::string& key) const { return split_list(str(key)); }
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

// key=value lines; '#' starts a comment. Keys must be known to the subcommand.
inline std::map<std::string, std::string> read_config_file(const std::string& path,
                                                           const std::vector<OptionSpec>& specs) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file '" + path + "'");
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t lineno = 0;
  auto trim = [](std::string s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return std::string();
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError(path + ":" + std::to_string(lineno) + ": expected key=value");
    }
    std::string key = trim(line.substr(0, eq));
    if (key.rfind("--", 0) == 0) key.erase(0, 2);
    bool known = false;
    for (const auto& s : specs) known = known || s.key == key;
    if (!known || key == "config") {
      throw UsageError(path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Subcommand catalogue

namespace detail {

inline std::vector<OptionSpec> common_options(const std::string& out_default) {
  return {
      {"config", "", "key=value settings file (command-line flags take precedence)", OptionKind::kValue, true},
      {"out", out_default, "run directory; an existing one is never reused (suffix -1, -2, ...)"},
      {"seed", "1", "random seed"},
      {"workers", std::to_string(default_workers()), "worker threads"},
  };
}

inline std::vector<OptionSpec> training_options() {
  const TrainConfig tc;
  const auto& e = tc.encoder;
  const auto& o = tc.optimizer;
  return {
      {"gold", "", "gold training treebank", OptionKind::kValue, true},
      {"dev", "", "dev treebank for model selection", OptionKind::kValue, true},
      {"seeds", "1", "number of seeds (seed, seed+1, ...); metrics are averaged"},
      {"batch-size", std::to_string(tc.batch_size), "sentences per step"},
      {"epochs", std::to_string(tc.epochs), "training epochs over the gold corpus"},
      {"lr", format_real(o.learning_rate), "base learning rate"},
      {"warmup", std::to_string(o.warmup_steps), "linear warmup steps"},
      {"patience", std::to_string(o.decay_patience), "dev evaluations without improvement before halving the rate"},
      {"clip", format_real(o.clip_norm), "gradient-norm clip (0 disables)"},
      {"dropout", format_real(tc.dropout), "dropout rate"},
      {"oov-prob", format_real(tc.oov_prob), "probability of replacing a singleton word by <unk>"},
      {"d-model", std::to_string(e.d_model), "encoder width"},
      {"n-layers", std::to_string(e.n_layers), "attention layers"},
      {"n-heads", std::to_string(e.n_heads), "attention heads"},
      {"d-ff", std::to_string(e.d_ff), "feed-forward width"},
      {"d-span", std::to_string(e.d_span), "span classifier hidden width"},
      {"eval-every", std::to_string(tc.eval_every), "epochs between dev evaluations"},
      {"checkpoint-every", std::to_string(tc.checkpoint_every), "epochs between periodic checkpoints (0 = none)"},
      {"external-gold", "", "external vectors aligned with --gold", OptionKind::kValue, true},
      {"external-dev", "", "external vectors aligned with --dev", OptionKind::kValue, true},
  };
}

inline std::vector<OptionSpec> concat(std::vector<OptionSpec> a, const std::vector<OptionSpec>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace detail

struct SubcommandSpec {
  std::string name;
  std::string help;
  std::vector<OptionSpec> options;
};

inline const std::vector<SubcommandSpec>& subcommands() {
  using detail::common_options;
  using detail::concat;
  using detail::training_options;
  static const std::vector<SubcommandSpec> specs = [] {
    const DisfluencyConfig dc;
    const CorpusSizes sz;
    const GenerateOptions go;
    std::vector<SubcommandSpec> s;
    s.push_back({"gen-data", "generate synthetic gold corpora and unlabeled text",
                 concat(common_options("data/synthetic"),
                        {{"grammar", "", "grammar file (default: built-in conversational grammar)", OptionKind::kValue, true},
                         {"unlabeled-grammar", "", "grammar for fluent unlabeled text", OptionKind::kValue, true},
                         {"ood", "false", "draw unlabeled text from the built-in written grammar", OptionKind::kFlag},
                         {"train-size", std::to_string(sz.train), "gold training trees"},
                         {"dev-size", std::to_string(sz.dev), "gold dev trees"},
                         {"test-size", std::to_string(sz.test), "gold test trees"},
                         {"unlabeled-size", std::to_string(sz.unlabeled), "unlabeled sentences"},
                         {"disfluent-prob", format_real(dc.disfluent_prob), "probability that a sentence is disfluent"},
                         {"max-length", std::to_string(go.max_length), "maximum fluent sentence length"}})});
    s.push_back({"train", "train a parser on gold (optionally mixed with silver) trees",
                 concat(concat(common_options("runs/train"), training_options()),
                        {{"silver", "", "silver treebank mixed into each batch", OptionKind::kValue, true},
                         {"p", "0", "fraction of each batch drawn from silver"},
                         {"external-silver", "", "external vectors aligned with --silver", OptionKind::kValue, true}})});
    s.push_back({"self-train", "train a baseline, parse unlabeled text, retrain on gold + silver",
                 concat(concat(common_options("runs/self-train"), training_options()),
                        {{"unlabeled", "", "unlabeled sentences, one per line", OptionKind::kValue, true},
                         {"p", "0.4", "fraction of each batch drawn from silver"},
                         {"external-unlabeled", "", "external vectors aligned with --unlabeled", OptionKind::kValue,
                          true}})});
    s.push_back({"sweep-p", "self-training over a range of silver proportions",
                 concat(concat(common_options("runs/sweep-p"), training_options()),
                        {{"unlabeled", "", "unlabeled sentences, one per line", OptionKind::kValue, true},
                         {"values", "0.1..0.9", "proportions: 'a..b' with --step, or a comma list"},
                         {"step", "0.1", "step for an 'a..b' range"},
                         {"external-unlabeled", "", "external vectors aligned with --unlabeled", OptionKind::kValue,
                          true}})});
    s.push_back({"parse", "parse sentences with one checkpoint",
                 concat(common_options("runs/parse"),
                        {{"checkpoint", "", "model checkpoint", OptionKind::kValue, true},
                         {"input", "", "sentences, one per line", OptionKind::kValue, true},
                         {"gold", "", "treebank to parse and score against (instead of --input)", OptionKind::kValue,
                          true},
                         {"external", "", "external vectors aligned with the input", OptionKind::kValue, true}})});
    s.push_back({"ensemble-parse", "parse with span-score averaging over several checkpoints",
                 concat(common_options("runs/ensemble-parse"),
                        {{"members", "", "member checkpoint (repeat the flag)", OptionKind::kList, true},
                         {"input", "", "sentences, one per line", OptionKind::kValue, true},
                         {"gold", "", "treebank to parse and score against (instead of --input)", OptionKind::kValue,
                          true},
                         {"select", "none", "member selection: none, members-first or ensemble-first"},
                         {"size", "4", "ensemble size kept by selection"},
                         {"dev", "", "dev treebank used for selection", OptionKind::kValue, true},
                         {"external", "", "external vectors aligned with the input", OptionKind::kValue, true},
                         {"external-dev", "", "external vectors aligned with --dev", OptionKind::kValue, true}})});
    s.push_back({"eval", "score predicted trees against gold trees",
                 concat(common_options("runs/eval"),
                        {{"gold", "", "gold treebank", OptionKind::kValue, true},
                         {"pred", "", "predicted treebank", OptionKind::kValue, true},
                         {"types", "", "disfluency type sidecar for the gold trees", OptionKind::kValue, true}})});
    s.push_back({"typology-report", "word-level EDITED scores broken down by disfluency type",
                 concat(common_options("runs/typology-report"),
                        {{"gold", "", "gold treebank", OptionKind::kValue, true},
                         {"pred", "", "predicted treebank", OptionKind::kValue, true},
                         {"types", "", "type sidecar (default: classify gold regions)", OptionKind::kValue, true}})});
    return s;
  }();
  return specs;
}

inline const SubcommandSpec& find_subcommand(const std::string& name) {
  for (const auto& s : subcommands()) {
    if (s.name == name) return s;
  }
  throw UsageError("unknown subcommand '" + name + "'");
}

// ---------------------------------------------------------------------------
// Run context

class Run {
 public:
  Run(const SubcommandSpec& spec, Settings settings, std::ostream& out, std::ostream& err)
      : spec_(spec), settings_(std::move(settings)), out_(out), err_(err) {}

  const Settings& settings() const { return settings_; }
  const fs::path& dir() const { return dir_; }
  std::ostream& out() { return out_; }
  std::ostream& err() { return err_; }

  std::vector<std::uint64_t> seeds() const {
    const auto base = settings_.u64("seed");
    std::size_t k = 1;
    for (const auto& o : spec_.options) {
      if (o.key == "seeds") k = settings_.count("seeds");
    }
    if (k == 0) throw UsageError("--seeds must be >= 1");
    std::vector<std::uint64_t> v;
    for (std::size_t s = 0; s < k; ++s) v.push_back(base + s);
    return v;
  }

  // Creates the run directory and writes manifest.json and config.txt.
  void start(const std::vector<std::string>& argv) {
    json inputs = json::object();
    for (const auto& o : spec_.options) {
      if (!o.input_file || !settings_.has(o.key)) continue;
      json entries = json::array();
      for (const auto& path : o.kind == OptionKind::kList ? settings_.list(o.key)
                                                          : std::vector<std::string>{settings_.str(o.key)}) {
        if (!fs::is_regular_file(path)) throw DataError("--" + o.key + ": no such file '" + path + "'");
        entries.push_back({{"path", path}, {"sha256", sha256_file(path)}});
      }
      inputs[o.key] = o.kind == OptionKind::kList ? entries : entries[0];
    }
    const auto seed_list = seeds();
    dir_ = unique_run_dir(settings_.required("out"));
    json m;
    m["subcommand"] = spec_.name;
    m["tool_version"] = kToolVersion;
    m["config"] = settings_.values();
    m["seeds"] = seed_list;
    m["inputs"] = inputs;
    m["argv"] = argv;
    m["run_dir"] = dir_.string();
    m["started_at"] = utc_timestamp();
    write_text(dir_ / "manifest.json", m.dump(2) + "\n");
    out_ << "run_dir=" << dir_.string() << "\n";

    std::string cfg = header();
    for (const auto& [k, v] : settings_.values()) {
      if (k != "out") cfg += k + "=" + v + "\n";
    }
    write_text(dir_ / "config.txt", cfg);
  }

  // One-line artifact header naming the subcommand, seeds and p.
  std::string header() const {
    std::string h = "# subcommand=" + spec_.name + " seed=" + settings_.str("seed");
    for (const auto& o : spec_.options) {
      if (o.key == "seeds") h += " seeds=" + settings_.str("seeds");
      if (o.key == "p") h += " p=" + settings_.str("p");
    }
    return h + "\n";
  }

 private:
  const SubcommandSpec& spec_;
  Settings settings_;
  std::ostream& out_;
  std::ostream& err_;
  fs::path dir_;
};

// ---------------------------------------------------------------------------
// Shared helpers for subcommands

namespace detail {

inline std::optional<ExternalVectors> maybe_external(const Settings& s, const std::string& key) {
  if (!s.has(key)) return std::nullopt;
  return read_external_vectors(s.str(key));
}

inline std::size_t external_width(const ExternalVectors& v) {
  for (const auto& m : v) {
    if (m.rows() > 0) return static_cast<std::size_t>(m.cols());
  }
  return 0;
}

inline TrainConfig train_config(const Settings& s, double p, std::uint64_t seed, std::size_t d_external) {
  TrainConfig tc;
  tc.batch_size = s.count("batch-size");
  tc.epochs = s.count("epochs");
  tc.silver_proportion = p;
  tc.seed = seed;
  tc.dropout = s.real("dropout");
  tc.oov_prob = s.real("oov-prob");
  tc.eval_every = s.count("eval-every");
  tc.checkpoint_every = s.count("checkpoint-every");
  tc.workers = s.count("workers");
  tc.optimizer.learning_rate = s.real("lr");
  tc.optimizer.warmup_steps = s.count("warmup");
  tc.optimizer.decay_patience = s.count("patience");
  tc.optimizer.clip_norm = s.real("clip");
  tc.encoder.d_model = s.count("d-model");
  tc.encoder.n_layers = s.count("n-layers");
  tc.encoder.n_heads = s.count("n-heads");
  tc.encoder.d_ff = s.count("d-ff");
  tc.encoder.d_span = s.count("d-span");
  tc.encoder.d_external = d_external;
  tc.validate();
  return tc;
}

inline json prf_json(const CategoryRecord& r) {
  return {{"P", r.precision}, {"R", r.recall}, {"F", r.fscore}};
}

inline json report_json(const EvalReport& r) {
  json j = json::object();
  for (const auto* rec : r.records()) j[rec->category] = prf_json(*rec);
  return j;
}

// Appends JSON lines to metrics.log and progress lines to err.
class MetricsLog {
 public:
  MetricsLog(const fs::path& path, std::ostream& err) : out_(path, std::ios::binary | std::ios::app), err_(err) {
    if (!out_) throw DataError("cannot write '" + path.string() + "'");
  }

  TrainCallbacks callbacks(const std::string& model, std::uint64_t seed, double p, const fs::path& ckpt_dir,
                           const std::string& ckpt_prefix) {
    TrainCallbacks cb;
    cb.on_epoch = [this, model, seed, p](const EpochRecord& r) {
      json j;
      j["model"] = model;
      j["seed"] = seed;
      j["p"] = p;
      j["epoch"] = r.epoch;
      j["steps"] = r.steps;
      j["train_loss"] = r.train_loss;
      j["lr"] = r.learning_rate;
      if (r.dev) j["dev"] = report_json(*r.dev);
      j["best"] = r.best;
      out_ << j.dump() << "\n";
      out_.flush();
      err_ << model << " seed=" << seed << " epoch=" << r.epoch << " loss=" << format_number(r.train_loss);
      if (r.dev) {
        err_ << " dev_F(S)=" << format_number(r.dev->s.fscore) << " dev_F(S_E)=" << format_number(r.dev->s_e.fscore)
             << " dev_F(W_E)=" << format_number(r.dev->w_e.fscore);
      }
      err_ << "\n";
    };
    cb.on_checkpoint = [=](const EpochRecord& r, const ModelParams<float>& params) {
      fs::create_directories(ckpt_dir);
      save_checkpoint((ckpt_dir / (ckpt_prefix + "epoch-" + std::to_string(r.epoch) + ".ckpt")).string(), params,
                      {{"model", model}, {"seed", seed}, {"p", p}, {"epoch", r.epoch}});
    };
    return cb;
  }

 private:
  std::ofstream out_;
  std::ostream& err_;
};

inline std::string prefixed_records(const std::string& prefix, const EvalReport& r) {
  std::string out;
  for (const auto* rec : r.records()) out += prefix + record_line(*rec) + "\n";
  return out;
}

inline std::string mean_lines(const std::string& prefix, const std::vector<MetricMean>& means) {
  std::string out;
  for (const auto& m : means) {
    out += prefix + "category=" + m.category + " P=" + format_number(m.precision) + " R=" + format_number(m.recall) +
           " F=" + format_number(m.fscore) + "\n";
  }
  return out;
}

inline std::string signed_number(double v) { return (v >= 0 ? "+" : "") + format_number(v); }

inline std::string seed_suffix(std::uint64_t seed, std::size_t n_seeds) {
  return n_seeds > 1 ? "-seed" + std::to_string(seed) : "";
}

inline std::optional<Corpus> maybe_corpus(const Settings& s, const std::string& key, Provenance prov) {
  if (!s.has(key)) return std::nullopt;
  return read_corpus(s.str(key), prov, true);
}

inline Corpus required_corpus(const Settings& s, const std::string& key) {
  Corpus c = read_corpus(s.required(key), Provenance::kGold, true);
  if (c.entries.empty()) throw DataError("--" + key + ": no trees in '" + s.str(key) + "'");
  return c;
}

// Input sentences from --input or from the leaves of --gold (exactly one).
struct ParseInput {
  std::vector<std::vector<std::string>> sentences;
  std::optional<Corpus> gold;
};

inline ParseInput parse_input(const Settings& s) {
  if (s.has("input") == s.has("gold")) throw UsageError("give exactly one of --input and --gold");
  ParseInput in;
  if (s.has("input")) {
    in.sentences = read_sentences(s.str("input"));
  } else {
    in.gold = required_corpus(s, "gold");
    in.sentences = sentences_of(*in.gold);
  }
  return in;
}

inline std::vector<double> parse_values(const Settings& s) {
  const std::string v = s.required("values");
  std::vector<double> out;
  auto number = [](const std::string& t) {
    std::size_t used = 0;
    double x = 0;
    try {
      x = std::stod(t, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != t.size()) throw UsageError("--values: not a number: '" + t + "'");
    return x;
  };
  if (const auto dots = v.find(".."); dots != std::string::npos) {
    const double a = number(v.substr(0, dots));
    const double b = number(v.substr(dots + 2));
    const double step = s.real("step");
    if (!(step > 0)) throw UsageError("--step must be positive");
    // Integer stepping keeps 0.1..0.9 at exactly nine points.
    const auto n = static_cast<long>(std::floor((b - a) / step + 1e-9));
    if (n < 0) throw UsageError("--values: empty range '" + v + "'");
    for (long k = 0; k <= n; ++k) out.push_back(std::round((a + static_cast<double>(k) * step) * 1e9) / 1e9);
  } else {
    for (const auto& t : split_list(v)) out.push_back(number(t));
  }
  if (out.empty()) throw UsageError("--values: no proportions given");
  for (double p : out) {
    if (!(p >= 0 && p <= 1)) throw UsageError("--values: proportion " + format_real(p) + " outside [0,1]");
  }
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Subcommands

inline void cmd_gen_data(Run& run) {
  const auto& s = run.settings();
  if (s.flag("ood") && s.has("unlabeled-grammar")) throw UsageError("--ood conflicts with --unlabeled-grammar");
  const Grammar g = s.has("grammar") ? Grammar::from_file(s.str("grammar")) : Grammar::conversational();
  std::optional<Grammar> ug;
  if (s.has("unlabeled-grammar")) ug = Grammar::from_file(s.str("unlabeled-grammar"));
  if (s.flag("ood")) ug = Grammar::written();
  EmitConfig ec;
  ec.seed = s.u64("seed");
  ec.sizes = {s.count("train-size"), s.count("dev-size"), s.count("test-size"), s.count("unlabeled-size")};
  ec.disfluency.disfluent_prob = s.real("disfluent-prob");
  ec.generate.max_length = s.count("max-length");
  const auto result = emit_corpora(g, ec, run.dir(), ug ? &*ug : nullptr);
  std::string stats = run.header();
  for (const auto& [split, st] : result.stats) {
    stats += "split=" + split + " sentences=" + std::to_string(st.sentences) + " words=" + std::to_string(st.words) +
             " edited_words=" + std::to_string(st.edited_words) + " eip_words=" + std::to_string(st.eip_words) +
             " disfluent_sentences=" + std::to_string(st.disfluent_sentences) +
             " edited_rate=" + format_number(st.edited_rate()) + " fallbacks=" + std::to_string(st.fallbacks);
    for (auto t : kAllDisfluencyTypes) {
      stats += " " + std::string(to_string(t)) + "=" + std::to_string(st.type_counts[static_cast<std::size_t>(t)]);
    }
    stats += "\n";
  }
  write_text(run.dir() / "stats.txt", stats);
  run.out() << stats.substr(stats.find('\n') + 1);
}

inline void cmd_train(Run& run) {
  const auto& s = run.settings();
  const Corpus gold = detail::required_corpus(s, "gold");
  const auto dev = detail::maybe_corpus(s, "dev", Provenance::kGold);
  const double p = s.real("p");
  if (p > 0 && !s.has("silver")) throw UsageError("--p > 0 needs --silver");
  const auto silver = detail::maybe_corpus(s, "silver", Provenance::kSilver);
  const auto ext_gold = detail::maybe_external(s, "external-gold");
  const auto ext_dev = detail::maybe_external(s, "external-dev");
  const auto ext_silver = detail::maybe_external(s, "external-silver");
  const std::size_t d_ext = ext_gold ? detail::external_width(*ext_gold) : 0;
  const ExternalFeatures ext{ext_gold ? &*ext_gold : nullptr, ext_silver ? &*ext_silver : nullptr,
                             ext_dev ? &*ext_dev : nullptr};

  detail::MetricsLog log(run.dir() / "metrics.log", run.err());
  const auto seeds = run.seeds();
  std::vector<EvalReport> reports;
  std::string report = run.header();
  for (auto seed : seeds) {
    const TrainConfig tc = detail::train_config(s, p, seed, d_ext);
    const std::string suffix = detail::seed_suffix(seed, seeds.size());
    auto result = train(gold, silver ? &*silver : nullptr, dev ? &*dev : nullptr, tc,
                        log.callbacks("train", seed, p, run.dir() / "checkpoints", "model" + suffix + "-"), ext);
    save_checkpoint((run.dir() / ("model" + suffix + ".ckpt")).string(), result.params,
                    {{"model", "train"}, {"seed", seed}, {"p", p}, {"epoch", result.best_epoch}});
    report += "seed=" + std::to_string(seed) + " best_epoch=" + std::to_string(result.best_epoch) +
              " first_loss=" + format_number(result.history.front().train_loss) +
              " final_loss=" + format_number(result.history.back().train_loss) + "\n";
    if (dev) {
      reports.push_back(evaluate_params(result.params, *dev, tc.workers, nullptr, ext.dev));
      report += detail::prefixed_records("seed=" + std::to_string(seed) + " split=dev ", reports.back());
    }
  }
  if (dev) {
    const auto means = mean_report(reports);
    report += detail::mean_lines("mean split=dev ", means);
    run.out() << report_table(reports.size() == 1 ? reports.front() : reports.back());
  }
  write_text(run.dir() / "report.txt", report);
}

namespace detail {

struct SelfTrainSeed {
  SelfTrainResult result;
  EvalReport baseline_dev, self_trained_dev;
};

}  // namespace detail

inline void cmd_self_train(Run& run) {
  const auto& s = run.settings();
  const Corpus gold = detail::required_corpus(s, "gold");
  const Corpus dev = detail::required_corpus(s, "dev");
  const auto unlabeled = read_sentences(s.required("unlabeled"));
  const double p = s.real("p");
  const auto ext_gold = detail::maybe_external(s, "external-gold");
  const auto ext_dev = detail::maybe_external(s, "external-dev");
  const auto ext_unl = detail::maybe_external(s, "external-unlabeled");
  const std::size_t d_ext = ext_gold ? detail::external_width(*ext_gold) : 0;
  const ExternalFeatures ext{ext_gold ? &*ext_gold : nullptr, ext_unl ? &*ext_unl : nullptr,
                             ext_dev ? &*ext_dev : nullptr};

  detail::MetricsLog log(run.dir() / "metrics.log", run.err());
  const auto seeds = run.seeds();
  std::vector<EvalReport> base_reports, st_reports;
  std::string report = run.header();
  for (auto seed : seeds) {
    const std::string suffix = detail::seed_suffix(seed, seeds.size());
    const TrainConfig base = detail::train_config(s, 0.0, seed, d_ext);
    const TrainConfig st = detail::train_config(s, p, seed, d_ext);
    const auto r = self_train(gold, unlabeled, &dev, base, st,
                              log.callbacks("baseline", seed, 0.0, run.dir() / "checkpoints", "baseline" + suffix + "-"),
                              log.callbacks("self-trained", seed, p, run.dir() / "checkpoints", "model" + suffix + "-"),
                              ext);
    save_checkpoint((run.dir() / ("baseline" + suffix + ".ckpt")).string(), r.baseline.params,
                    {{"model", "baseline"}, {"seed", seed}, {"p", 0.0}, {"epoch", r.baseline.best_epoch}});
    save_checkpoint((run.dir() / ("model" + suffix + ".ckpt")).string(), r.self_trained.params,
                    {{"model", "self-trained"}, {"seed", seed}, {"p", p}, {"epoch", r.self_trained.best_epoch}});
    write_corpus((run.dir() / ("silver" + suffix + ".trees")).string(), r.silver);
    base_reports.push_back(evaluate_params(r.baseline.params, dev, base.workers, nullptr, ext.dev));
    st_reports.push_back(evaluate_params(r.self_trained.params, dev, st.workers, nullptr, ext.dev));
    const std::string tag = "seed=" + std::to_string(seed);
    report += tag + " silver_parsed=" + std::to_string(r.parse_stats.parsed) +
              " silver_skipped_empty=" + std::to_string(r.parse_stats.skipped_empty) + "\n";
    report += detail::prefixed_records(tag + " model=baseline split=dev ", base_reports.back());
    report += detail::prefixed_records(tag + " model=self-trained split=dev ", st_reports.back());
  }
  const auto base_mean = mean_report(base_reports);
  const auto st_mean = mean_report(st_reports);
  report += detail::mean_lines("mean model=baseline split=dev ", base_mean);
  report += detail::mean_lines("mean model=self-trained split=dev ", st_mean);
  for (std::size_t c = 0; c < base_mean.size(); ++c) {
    report += "delta split=dev category=" + base_mean[c].category +
              " F=" + detail::signed_number(st_mean[c].fscore - base_mean[c].fscore) + "\n";
  }
  write_text(run.dir() / "report.txt", report);
  for (std::size_t c = 0; c < base_mean.size(); ++c) {
    if (base_mean[c].category == "W_E" || base_mean[c].category == "S_E") {
      run.out() << "dev F(" << base_mean[c].category << ") baseline=" << format_number(base_mean[c].fscore)
                << " self-trained=" << format_number(st_mean[c].fscore)
                << " delta=" << detail::signed_number(st_mean[c].fscore - base_mean[c].fscore) << "\n";
    }
  }
}

inline void cmd_sweep_p(Run& run) {
  const auto& s = run.settings();
  const Corpus gold = detail::required_corpus(s, "gold");
  const Corpus dev = detail::required_corpus(s, "dev");
  const auto unlabeled = read_sentences(s.required("unlabeled"));
  const auto values = detail::parse_values(s);
  const auto ext_gold = detail::maybe_external(s, "external-gold");
  const auto ext_dev = detail::maybe_external(s, "external-dev");
  const auto ext_unl = detail::maybe_external(s, "external-unlabeled");
  const std::size_t d_ext = ext_gold ? detail::external_width(*ext_gold) : 0;

  detail::MetricsLog log(run.dir() / "metrics.log", run.err());
  const auto seeds = run.seeds();
  // per_p[v][seed index]
  std::vector<std::vector<EvalReport>> per_p(values.size());
  std::vector<EvalReport> baselines;
  std::string report = run.header();
  for (auto seed : seeds) {
    const std::string suffix = detail::seed_suffix(seed, seeds.size());
    const TrainConfig base = detail::train_config(s, 0.0, seed, d_ext);
    const ExternalFeatures base_ext{ext_gold ? &*ext_gold : nullptr, nullptr, ext_dev ? &*ext_dev : nullptr};
    const auto baseline = train(gold, nullptr, &dev, base,
                                log.callbacks("baseline", seed, 0.0, run.dir() / "checkpoints", "baseline" + suffix + "-"),
                                base_ext);
    save_checkpoint((run.dir() / ("baseline" + suffix + ".ckpt")).string(), baseline.params,
                    {{"model", "baseline"}, {"seed", seed}, {"p", 0.0}, {"epoch", baseline.best_epoch}});
    baselines.push_back(evaluate_params(baseline.params, dev, base.workers, nullptr, base_ext.dev));
    report += detail::prefixed_records("seed=" + std::to_string(seed) + " model=baseline split=dev ", baselines.back());
    ParseStats stats;
    ExternalVectors silver_ext;
    const Corpus silver = parse_corpus(baseline.params, unlabeled, base.workers, &stats, ext_unl ? &*ext_unl : nullptr,
                                       &silver_ext);
    write_corpus((run.dir() / ("silver" + suffix + ".trees")).string(), silver);
    const ExternalFeatures st_ext{base_ext.gold, ext_unl ? &silver_ext : nullptr, base_ext.dev};
    for (std::size_t v = 0; v < values.size(); ++v) {
      const TrainConfig st = detail::train_config(s, values[v], seed, d_ext);
      const std::string name = "p" + format_real(values[v]);
      const auto r = train(gold, &silver, &dev, st,
                           log.callbacks("self-trained", seed, values[v], run.dir() / "checkpoints",
                                         name + suffix + "-"),
                           st_ext);
      save_checkpoint((run.dir() / (name + suffix + ".ckpt")).string(), r.params,
                      {{"model", "self-trained"}, {"seed", seed}, {"p", values[v]}, {"epoch", r.best_epoch}});
      per_p[v].push_back(evaluate_params(r.params, dev, st.workers, nullptr, st_ext.dev));
      report += detail::prefixed_records("seed=" + std::to_string(seed) + " model=self-trained p=" +
                                             format_real(values[v]) + " split=dev ",
                                         per_p[v].back());
    }
  }
  const auto base_mean = mean_report(baselines);
  auto f_of = [](const std::vector<MetricMean>& m, const std::string& cat) {
    for (const auto& x : m) {
      if (x.category == cat) return x.fscore;
    }
    return 0.0;
  };
  std::string tsv = "p\tF(S_E)\tF(W_E)\tF(S)\tdelta_F(S_E)\n";
  for (std::size_t v = 0; v < values.size(); ++v) {
    const auto m = mean_report(per_p[v]);
    tsv += format_real(values[v]) + "\t" + format_number(f_of(m, "S_E")) + "\t" + format_number(f_of(m, "W_E")) +
           "\t" + format_number(f_of(m, "S")) + "\t" +
           detail::signed_number(f_of(m, "S_E") - f_of(base_mean, "S_E")) + "\n";
  }
  report += detail::mean_lines("mean model=baseline split=dev ", base_mean);
  write_text(run.dir() / "sweep.tsv", tsv);
  write_text(run.dir() / "report.txt", report);
  run.out() << "baseline F(S_E)=" << format_number(f_of(base_mean, "S_E")) << "\n" << tsv;
}

namespace detail {

inline void write_parse_outputs(Run& run, const std::vector<std::vector<std::string>>& sentences,
                                const std::vector<ParseTree>& trees, const std::optional<Corpus>& gold,
                                const std::string& extra_report) {
  Corpus out;
  out.provenance = Provenance::kSilver;
  std::size_t skipped = 0;
  for (std::size_t k = 0; k < sentences.size(); ++k) {
    if (sentences[k].empty()) {
      ++skipped;
      continue;
    }
    out.entries.push_back(CorpusEntry{sentences[k], trees[k]});
  }
  write_corpus((run.dir() / "parsed.trees").string(), out);
  std::string report = run.header() + "parsed=" + std::to_string(out.size()) +
                       " skipped_empty=" + std::to_string(skipped) + "\n" + extra_report;
  if (gold) {
    const auto r = evaluate(trees_of(*gold), trees_of(out));
    report += report_records(r);
    run.out() << report_table(r);
  }
  write_text(run.dir() / "report.txt", report);
  run.out() << "parsed=" << out.size() << " skipped_empty=" << skipped << "\n";
}

// Parses the non-empty sentences; empty ones get an empty placeholder tree.
template <class ParseOne>
std::vector<ParseTree> parse_nonempty(const std::vector<std::vector<std::string>>& sentences, std::size_t workers,
                                      ParseOne&& one) {
  std::vector<ParseTree> trees(sentences.size());
  spanparse::detail::parallel_for(sentences.size(), workers, [&](std::size_t k) {
    if (!sentences[k].empty()) trees[k] = one(k);
  });
  return trees;
}

}  // namespace detail

inline void cmd_parse(Run& run) {
  const auto& s = run.settings();
  const Checkpoint ck = load_checkpoint(s.required("checkpoint"));
  const auto in = detail::parse_input(s);
  const auto ext = detail::maybe_external(s, "external");
  if (ext && ext->size() != in.sentences.size()) {
    throw DataError("--external has " + std::to_string(ext->size()) + " blocks for " +
                    std::to_string(in.sentences.size()) + " sentences");
  }
  const auto trees = detail::parse_nonempty(in.sentences, s.count("workers"), [&](std::size_t k) {
    return parse_sentence(ck.params, in.sentences[k], ext ? &(*ext)[k] : nullptr);
  });
  detail::write_parse_outputs(run, in.sentences, trees, in.gold, "");
}

inline EnsembleSelection parse_selection(const std::string& s) {
  if (s == "none") return EnsembleSelection::kNone;
  if (s == "members-first") return EnsembleSelection::kMembersFirst;
  if (s == "ensemble-first") return EnsembleSelection::kEnsembleFirst;
  throw UsageError("--select must be none, members-first or ensemble-first, got '" + s + "'");
}

inline void cmd_ensemble_parse(Run& run) {
  const auto& s = run.settings();
  const auto paths = s.list("members");
  if (paths.empty()) throw UsageError("--members is required");
  std::vector<Checkpoint> members;
  for (const auto& p : paths) members.push_back(load_checkpoint(p));
  std::vector<const ModelParams<float>*> all;
  for (const auto& m : members) all.push_back(&m.params);
  check_ensemble(all);
  const auto how = parse_selection(s.str("select"));
  std::vector<std::size_t> chosen;
  if (how == EnsembleSelection::kNone) {
    for (std::size_t k = 0; k < all.size(); ++k) chosen.push_back(k);
  } else {
    if (!s.has("dev")) throw UsageError("--select " + s.str("select") + " needs --dev");
    if (s.has("external-dev")) throw UsageError("member selection does not support --external-dev");
    const Corpus dev = detail::required_corpus(s, "dev");
    chosen = select_members(all, dev, s.count("size"), how, s.count("workers"));
  }
  std::vector<const ModelParams<float>*> used;
  std::string extra;
  for (auto k : chosen) {
    used.push_back(all[k]);
    extra += "member=" + paths[k] + "\n";
  }
  const auto in = detail::parse_input(s);
  const auto ext = detail::maybe_external(s, "external");
  if (ext && ext->size() != in.sentences.size()) {
    throw DataError("--external has " + std::to_string(ext->size()) + " blocks for " +
                    std::to_string(in.sentences.size()) + " sentences");
  }
  const std::size_t workers = s.count("workers");
  const auto trees = detail::parse_nonempty(in.sentences, workers, [&](std::size_t k) {
    return ensemble_decode(used, in.sentences[k], ext ? &(*ext)[k] : nullptr);
  });
  if (in.gold) {
    // Single-member scores next to the ensemble for the ensemble-vs-single delta.
    const auto gold_trees = trees_of(*in.gold);
    const auto ens = evaluate(gold_trees, trees);
    double best_single = -1;
    for (std::size_t u = 0; u < used.size(); ++u) {
      const auto single = detail::parse_nonempty(in.sentences, workers, [&](std::size_t k) {
        return parse_sentence(*used[u], in.sentences[k],
                              ext && used[u]->config.d_external > 0 ? &(*ext)[k] : nullptr);
      });
      const auto r = evaluate(gold_trees, single);
      best_single = std::max(best_single, r.w_e.fscore);
      extra += detail::prefixed_records("member=" + paths[chosen[u]] + " ", r);
    }
    extra += "delta_vs_best_single category=W_E F=" + detail::signed_number(ens.w_e.fscore - best_single) + "\n";
  }
  detail::write_parse_outputs(run, in.sentences, trees, in.gold, extra);
}

inline void cmd_eval(Run& run) {
  const auto& s = run.settings();
  const Corpus gold = read_corpus(s.required("gold"), Provenance::kGold, true);
  const Corpus pred = read_corpus(s.required("pred"), Provenance::kSilver, true);
  std::optional<TypeAnnotations> types;
  if (s.has("types")) types = read_type_annotations(s.str("types"));
  const auto r = evaluate(trees_of(gold), trees_of(pred), types ? &*types : nullptr);
  write_text(run.dir() / "report.txt", run.header() + report_records(r));
  run.out() << report_table(r);
}

inline void cmd_typology_report(Run& run) {
  const auto& s = run.settings();
  const Corpus gold = read_corpus(s.required("gold"), Provenance::kGold, true);
  const Corpus pred = read_corpus(s.required("pred"), Provenance::kSilver, true);
  std::optional<TypeAnnotations> types;
  if (s.has("types")) types = read_type_annotations(s.str("types"));
  EvalReport r;
  r.sentences = gold.size();
  r.typology = typology_report(trees_of(gold), trees_of(pred), types ? &*types : nullptr);
  // Counts of gold regions per type, alongside the word-level scores.
  std::array<std::size_t, 3> regions{};
  if (types) {
    for (const auto& sent : *types) {
      for (const auto& t : sent) ++regions[static_cast<std::size_t>(t.type)];
    }
  } else {
    for (const auto& e : gold.entries) {
      for (const auto& t : classify_regions(e.tree)) ++regions[static_cast<std::size_t>(t.type)];
    }
  }
  std::string report = run.header() + "sentences=" + std::to_string(r.sentences) + "\n";
  std::string table;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-12s %8s %8s %8s %8s\n", "type", "regions", "words", "R", "F");
  table += buf;
  for (std::size_t k = 0; k < r.typology.size(); ++k) {
    const auto& rec = r.typology[k];
    report += "regions=" + std::to_string(regions[k]) + " " + record_line(rec) + "\n";
    std::snprintf(buf, sizeof buf, "%-12s %8zu %8zu %8.4f %8.4f\n",
                  std::string(to_string(kAllDisfluencyTypes[k])).c_str(), regions[k], rec.gold, rec.recall,
                  rec.fscore);
    table += buf;
  }
  write_text(run.dir() / "report.txt", report);
  run.out() << table;
}

// ---------------------------------------------------------------------------
// Entry point

inline void dispatch(Run& run, const std::string& name) {
  if (name == "gen-data") return cmd_gen_data(run);
  if (name == "train") return cmd_train(run);
  if (name == "self-train") return cmd_self_train(run);
  if (name == "sweep-p") return cmd_sweep_p(run);
  if (name == "parse") return cmd_parse(run);
  if (name == "ensemble-parse") return cmd_ensemble_parse(run);
  if (name == "eval") return cmd_eval(run);
  if (name == "typology-report") return cmd_typology_report(run);
  throw UsageError("unknown subcommand '" + name + "'");
}

// Runs a subcommand from fully resolved settings.
inline void execute(const SubcommandSpec& spec, Settings settings, const std::vector<std::string>& argv,
                    std::ostream& out, std::ostream& err) {
  Run run(spec, std::move(settings), out, err);
  run.start(argv);
  dispatch(run, spec.name);
}

// Re-executes a run from its manifest after checking the input digests.
inline void rerun(const std::string& manifest_path, const std::string& out_override,
                  const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  std::ifstream in(manifest_path);
  if (!in) throw DataError("cannot open manifest '" + manifest_path + "'");
  json m;
  try {
    m = json::parse(in);
  } catch (const json::exception& e) {
    throw DataError("malformed manifest '" + manifest_path + "': " + e.what());
  }
  if (!m.contains("subcommand") || !m.contains("config") || !m.contains("inputs")) {
    throw DataError("manifest '" + manifest_path + "' lacks subcommand, config or inputs");
  }
  const auto& spec = find_subcommand(m["subcommand"].get<std::string>());
  auto values = m["config"].get<std::map<std::string, std::string>>();
  for (const auto& [key, entry] : m["inputs"].items()) {
    const auto entries = entry.is_array() ? entry : json::array({entry});
    for (const auto& e : entries) {
      const auto path = e.at("path").get<std::string>();
      if (!fs::is_regular_file(path)) throw DataError("manifest input --" + key + ": missing file '" + path + "'");
      if (sha256_file(path) != e.at("sha256").get<std::string>()) {
        throw DataError("manifest input --" + key + ": '" + path + "' changed since the recorded run");
      }
    }
  }
  if (!out_override.empty()) values["out"] = out_override;
  execute(spec, Settings(std::move(values)), argv, out, err);
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args(argv, argv + argc);
  CLI::App app{"Span-based constituency parser with disfluency detection, self-training and ensembling"};
  app.name(argc > 0 ? fs::path(argv[0]).filename().string() : "spanparse");
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  // Raw flag storage: strings for values and flags, vectors for lists.
  struct Bound {
    const SubcommandSpec* spec;
    CLI::App* app;
    std::map<std::string, std::string> values;
    std::map<std::string, std::vector<std::string>> lists;
    std::map<std::string, CLI::Option*> options;
  };
  std::vector<std::unique_ptr<Bound>> bound;
  for (const auto& spec : subcommands()) {
    auto b = std::make_unique<Bound>();
    b->spec = &spec;
    b->app = app.add_subcommand(spec.name, spec.help);
    for (const auto& o : spec.options) {
      const std::string flag = "--" + o.key;
      std::string help = o.help;
      if (!o.default_value.empty() && o.kind != OptionKind::kFlag) help += " [default: " + o.default_value + "]";
      if (o.kind == OptionKind::kFlag) {
        b->options[o.key] = b->app->add_flag(flag, help);
      } else if (o.kind == OptionKind::kList) {
        b->options[o.key] = b->app->add_option(flag, b->lists[o.key], help);
      } else {
        b->options[o.key] = b->app->add_option(flag, b->values[o.key], help);
      }
    }
    bound.push_back(std::move(b));
  }
  std::string manifest_path, rerun_out;
  auto* rerun_app = app.add_subcommand("rerun", "repeat a run from its manifest.json");
  rerun_app->add_option("--manifest", manifest_path, "manifest.json of the run to repeat")->required();
  rerun_app->add_option("--out", rerun_out, "run directory (default: the recorded one, suffixed)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return static_cast<int>(ErrorKind::kUsage);
  }

  try {
    if (rerun_app->parsed()) {
      rerun(manifest_path, rerun_out, args, out, err);
      return 0;
    }
    for (auto& b : bound) {
      if (!b->app->parsed()) continue;
      std::map<std::string, std::string> file;
      if (b->options.at("config")->count() > 0) file = read_config_file(b->values.at("config"), b->spec->options);
      Settings settings;
      for (const auto& o : b->spec->options) {
        std::string v = o.default_value;
        if (auto it = file.find(o.key); it != file.end()) v = it->second;
        if (b->options.at(o.key)->count() > 0) {
          if (o.kind == OptionKind::kFlag) {
            v = "true";
          } else if (o.kind == OptionKind::kList) {
            v = join_list(b->lists.at(o.key));
          } else {
            v = b->values.at(o.key);
          }
        }
        settings.set(o.key, v);
      }
      execute(*b->spec, std::move(settings), args, out, err);
      return 0;
    }
    throw UsageError("no subcommand given");
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(ErrorKind::kData);
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace spanparse::cli
