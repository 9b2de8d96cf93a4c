#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "seqedit/errors.hpp"
#include "seqedit/types.hpp"

namespace seqedit {

// Token <-> id bijection with a fixed reserved layout:
//   0 <bos>  1 <eos>  2 <plh>  3 <unk>  4.. level tags  then content.
// Content sequences never contain <plh>; encode() maps any literal
// reserved spelling to <unk> so that invariant holds for every corpus.
class Vocabulary {
public:
  explicit Vocabulary(int num_levels = 0) : num_levels_(num_levels) {
    table_ = {"<bos>", "<eos>", "<plh>", "<unk>"};
    for (int l = 0; l < num_levels; ++l) table_.push_back("<level_" + std::to_string(l) + ">");
    for (TokenId id = 0; id < static_cast<TokenId>(table_.size()); ++id)
      index_.emplace(table_[id], id);
  }

  TokenId add(const std::string& token) {
    auto it = index_.find(token);
    if (it != index_.end()) return it->second < first_content() ? kUnkId : it->second;
    TokenId id = static_cast<TokenId>(table_.size());
    table_.push_back(token);
    index_.emplace(token, id);
    return id;
  }

  TokenId id(const std::string& token) const {
    auto it = index_.find(token);
    if (it == index_.end() || it->second < first_content()) return kUnkId;
    return it->second;
  }

  const std::string& token(TokenId id) const {
    if (id < 0 || id >= static_cast<TokenId>(table_.size()))
      throw error("token id out of range: " + std::to_string(id));
    return table_[id];
  }

  TokenId level_tag(int level) const {
    if (level < 0 || level >= num_levels_)
      throw config_error("level out of range: " + std::to_string(level));
    return kNumFixedReserved + level;
  }

  int num_levels() const { return num_levels_; }
  TokenId size() const { return static_cast<TokenId>(table_.size()); }
  TokenId first_content() const { return kNumFixedReserved + num_levels_; }
  TokenId num_content() const { return size() - first_content(); }

  bool is_reserved(TokenId id) const { return id < first_content(); }

  // Ids the token head may realize: content tokens plus <unk>.
  bool generable(TokenId id) const {
    return id == kUnkId || (id >= first_content() && id < size());
  }

  TokenSeq encode(const std::vector<std::string>& words) const {
    TokenSeq out;
    out.reserve(words.size());
    for (const auto& w : words) out.push_back(id(w));
    return out;
  }

  std::string decode(const TokenSeq& ids) const {
    std::string out;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (i) out += ' ';
      out += token(ids[i]);
    }
    return out;
  }

private:
  std::vector<std::string> table_;
  std::unordered_map<std::string, TokenId> index_;
  int num_levels_ = 0;
};

}  // namespace seqedit
