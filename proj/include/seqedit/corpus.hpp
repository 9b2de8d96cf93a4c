#pragma once

#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "seqedit/errors.hpp"
#include "seqedit/metrics.hpp"
#include "seqedit/rng.hpp"
#include "seqedit/types.hpp"
#include "seqedit/vocab.hpp"

namespace seqedit {

struct TrainingSample {
  std::string uid;
  TokenSeq source;
  std::vector<TokenSeq> references;
  std::optional<int> src_level;
  std::optional<int> tgt_level;

  // Primary reference: the supervision target for oracles and roll-in.
  const TokenSeq& target() const { return references.front(); }
};

struct Corpus {
  std::vector<TrainingSample> samples;
  Vocabulary vocab;
};

// Pluggable tokenizer boundary; the default lowercases and splits on
// whitespace (subword segmentation is out of scope).
using Tokenizer = std::function<std::vector<std::string>(const std::string&)>;

inline std::vector<std::string> default_tokenizer(const std::string& text) {
  return metric_tokens(text);
}

namespace detail {

struct RawSample {
  std::vector<std::string> source;
  std::vector<std::vector<std::string>> targets;
  std::optional<int> src_level, tgt_level;
};

inline std::vector<RawSample> parse_jsonl(const std::string& path, const Tokenizer& tok) {
  std::ifstream in(path);
  if (!in) throw usage_error("cannot open " + path);
  std::vector<RawSample> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw parse_error(path + ":" + std::to_string(lineno) + ": bad json: " + e.what());
    }
    if (!obj.is_object() || !obj.contains("source") || !obj["source"].is_string())
      throw parse_error(path + ":" + std::to_string(lineno) + ": missing string field \"source\"");
    if (!obj.contains("target") || !obj["target"].is_array() || obj["target"].empty())
      throw parse_error(path + ":" + std::to_string(lineno) +
                        ": missing non-empty array field \"target\"");
    RawSample row;
    row.source = tok(obj["source"].get<std::string>());
    for (const auto& t : obj["target"]) {
      if (!t.is_string())
        throw parse_error(path + ":" + std::to_string(lineno) + ": target entries must be strings");
      row.targets.push_back(tok(t.get<std::string>()));
    }
    if (obj.contains("src_level")) row.src_level = obj["src_level"].get<int>();
    if (obj.contains("tgt_level")) row.tgt_level = obj["tgt_level"].get<int>();
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::string basename_of(const std::string& path) {
  auto pos = path.find_last_of("/\\");
  return pos == std::string::npos ? path : path.substr(pos + 1);
}

inline Corpus assemble(const std::string& path, std::vector<RawSample> rows, Vocabulary vocab,
                       bool grow_vocab) {
  Corpus corpus{.samples = {}, .vocab = std::move(vocab)};
  if (grow_vocab)
    for (const auto& row : rows) {
      for (const auto& w : row.source) corpus.vocab.add(w);
      for (const auto& t : row.targets)
        for (const auto& w : t) corpus.vocab.add(w);
    }
  const std::string base = basename_of(path);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    TrainingSample s;
    s.uid = base + ":" + std::to_string(i + 1);
    s.source = corpus.vocab.encode(rows[i].source);
    for (const auto& t : rows[i].targets) s.references.push_back(corpus.vocab.encode(t));
    s.src_level = rows[i].src_level;
    s.tgt_level = rows[i].tgt_level;
    corpus.samples.push_back(std::move(s));
  }
  return corpus;
}

}  // namespace detail

// Loads a JSONL corpus and builds its vocabulary: level-tag slots sized
// by the largest level seen, content tokens added in first-occurrence
// order (sources before targets, line by line).
inline Corpus load_jsonl(const std::string& path, const Tokenizer& tok = default_tokenizer) {
  auto rows = detail::parse_jsonl(path, tok);
  int max_level = -1;
  for (const auto& row : rows) {
    if (row.src_level) max_level = std::max(max_level, *row.src_level);
    if (row.tgt_level) max_level = std::max(max_level, *row.tgt_level);
  }
  return detail::assemble(path, std::move(rows), Vocabulary(max_level + 1), true);
}

// Loads against an existing (training) vocabulary; unseen tokens map to
// <unk> and the vocabulary is not grown.
inline Corpus load_jsonl(const std::string& path, const Vocabulary& vocab,
                         const Tokenizer& tok = default_tokenizer) {
  auto rows = detail::parse_jsonl(path, tok);
  return detail::assemble(path, std::move(rows), vocab, false);
}

inline void write_jsonl(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw usage_error("cannot write " + path);
  for (const auto& s : corpus.samples) {
    nlohmann::json obj;
    obj["source"] = corpus.vocab.decode(s.source);
    auto targets = nlohmann::json::array();
    for (const auto& r : s.references) targets.push_back(corpus.vocab.decode(r));
    obj["target"] = std::move(targets);
    if (s.src_level) obj["src_level"] = *s.src_level;
    if (s.tgt_level) obj["tgt_level"] = *s.tgt_level;
    out << obj.dump() << '\n';
  }
}

// Synthetic editing task. The vocabulary is partitioned into filler
// ("noise") words that the target drops, complex words with a 1:1
// simple counterpart, regular words, and one end marker. Targets are
// derived from sources by four rules, each applied at its own rate:
//   - delete-noise-token:  each filler occurrence dropped
//   - simplify-substitute: each complex occurrence replaced
//   - append-marker:       end marker appended (per sample)
//   - adjacent-swap:       one random adjacent pair swapped (per sample)
// Each sample draws its own complexity weight scaling the filler and
// complex-word densities, so the corpus mixes nearly-clean samples with
// heavily edited ones and spans a wide range of edit distances. The
// sample's src_level counts the rule classes that actually changed it;
// tgt_level is always 0.
struct SynthConfig {
  std::int32_t vocab_size = 50;
  std::int32_t min_len = 2;
  std::int32_t max_len = 12;
  std::int32_t num_samples = 1000;
  double delete_rate = 0.9;
  double substitute_rate = 0.9;
  double append_rate = 0.2;
  double swap_rate = 0.2;
  double noise_token_frac = 0.25;    // source mixture weights
  double complex_token_frac = 0.15;
  std::int32_t level_count = 5;
  std::uint64_t seed = 1;

  void validate() const {
    if (vocab_size < 10) throw config_error("synthetic vocab needs at least 10 tokens");
    if (min_len < 0 || max_len < min_len) throw config_error("bad synthetic length range");
    if (num_samples < 1) throw config_error("num_samples must be positive");
    for (double r : {delete_rate, substitute_rate, append_rate, swap_rate})
      if (r < 0.0 || r > 1.0) throw config_error("rule rates must be in [0,1]");
  }
};

// Contiguous sub-corpus sharing the parent vocabulary; used to split a
// generated corpus into train/dev/test.
inline Corpus slice(const Corpus& corpus, std::size_t begin, std::size_t end) {
  if (begin > end || end > corpus.samples.size()) throw usage_error("bad corpus slice");
  Corpus out{.samples = {}, .vocab = corpus.vocab};
  out.samples.assign(corpus.samples.begin() + static_cast<std::ptrdiff_t>(begin),
                     corpus.samples.begin() + static_cast<std::ptrdiff_t>(end));
  return out;
}

inline Corpus generate_synthetic(const SynthConfig& cfg) {
  cfg.validate();
  Corpus corpus{.samples = {}, .vocab = Vocabulary(cfg.level_count)};
  auto& vocab = corpus.vocab;

  const std::int32_t n_noise = cfg.vocab_size / 5;
  const std::int32_t n_pairs = cfg.vocab_size / 5;
  const std::int32_t n_regular = cfg.vocab_size - n_noise - 2 * n_pairs - 1;

  std::vector<TokenId> noise_words, complex_words, simple_words, regular_words;
  for (std::int32_t i = 0; i < n_noise; ++i)
    noise_words.push_back(vocab.add("nz" + std::to_string(i)));
  for (std::int32_t i = 0; i < n_pairs; ++i) {
    complex_words.push_back(vocab.add("cx" + std::to_string(i)));
    simple_words.push_back(vocab.add("sp" + std::to_string(i)));
  }
  for (std::int32_t i = 0; i < n_regular; ++i)
    regular_words.push_back(vocab.add("wd" + std::to_string(i)));
  const TokenId marker = vocab.add("endmark");

  Rng rng = make_rng(cfg.seed, 0xC0);
  for (std::int32_t si = 0; si < cfg.num_samples; ++si) {
    TrainingSample s;
    s.uid = "synth" + std::to_string(cfg.seed) + ":" + std::to_string(si + 1);
    const int len = rand_int(rng, cfg.min_len, cfg.max_len);
    const double complexity = 2.0 * rand_unit(rng);  // per-sample density weight, mean 1
    const double p_noise = std::min(0.8, cfg.noise_token_frac * complexity);
    const double p_complex = std::min(0.8 - p_noise, cfg.complex_token_frac * complexity);
    for (int i = 0; i < len; ++i) {
      const double u = rand_unit(rng);
      if (u < p_noise)
        s.source.push_back(noise_words[rand_index(rng, noise_words.size())]);
      else if (u < p_noise + p_complex)
        s.source.push_back(complex_words[rand_index(rng, complex_words.size())]);
      else
        s.source.push_back(regular_words[rand_index(rng, regular_words.size())]);
    }

    TokenSeq target;
    bool deleted = false, substituted = false, appended = false, swapped = false;
    for (TokenId t : s.source) {
      const bool is_noise =
          std::find(noise_words.begin(), noise_words.end(), t) != noise_words.end();
      if (is_noise && rand_unit(rng) < cfg.delete_rate) {
        deleted = true;
        continue;
      }
      auto cx = std::find(complex_words.begin(), complex_words.end(), t);
      if (cx != complex_words.end() && rand_unit(rng) < cfg.substitute_rate) {
        substituted = true;
        target.push_back(simple_words[static_cast<std::size_t>(cx - complex_words.begin())]);
        continue;
      }
      target.push_back(t);
    }
    if (rand_unit(rng) < cfg.append_rate) {
      appended = true;
      target.push_back(marker);
    }
    if (target.size() >= 2 && rand_unit(rng) < cfg.swap_rate) {
      swapped = true;
      const std::size_t i = rand_index(rng, target.size() - 1);
      std::swap(target[i], target[i + 1]);
    }

    const int level = (deleted ? 1 : 0) + (substituted ? 1 : 0) + (appended ? 1 : 0) +
                      (swapped ? 1 : 0);
    s.src_level = std::min<int>(level, cfg.level_count - 1);
    s.tgt_level = 0;
    s.references.push_back(std::move(target));
    corpus.samples.push_back(std::move(s));
  }
  return corpus;
}

}  // namespace seqedit
