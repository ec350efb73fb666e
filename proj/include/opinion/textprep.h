#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "opinion/corpus.h"

namespace opinion {

struct PreprocessConfig {
  // Maps accented letters to base letters after stemming. Off by default:
  // Spanish accents are preserved.
  bool strip_accents = false;
  bool stem = true;
  std::string stopword_source = "builtin:stopwords_es-v1";
  std::set<std::string> stopwords;

  nlohmann::json to_json() const;
  static PreprocessConfig from_json(const nlohmann::json& j);
  bool operator==(const PreprocessConfig&) const = default;
};

// The shipped Spanish configuration (data/stopwords_es.txt compiled in).
PreprocessConfig default_preprocess_config();

std::set<std::string> parse_stopwords(std::string_view text);
std::set<std::string> load_stopwords(const std::filesystem::path& path);

struct TokenizedDoc {
  std::string comment_id;
  std::vector<std::string> tokens;

  bool operator==(const TokenizedDoc&) const = default;
};

// lowercase -> non-letters (punctuation, digits, symbols) become spaces ->
// split on whitespace -> drop stopwords -> stem.
std::vector<std::string> preprocess_tokens(std::string_view text, const PreprocessConfig& config);
TokenizedDoc preprocess(std::string_view text, const PreprocessConfig& config);
TokenizedDoc preprocess(const Comment& comment, const PreprocessConfig& config);
std::vector<TokenizedDoc> preprocess_all(const std::vector<Comment>& comments,
                                         const PreprocessConfig& config);

// Character n-grams of "<token>" for n in [n_min, n_max], ordered by start
// position then length. A wrapped token shorter than n_min yields itself.
std::vector<std::string> char_ngrams(std::string_view token, int n_min, int n_max);

class Vocabulary {
 public:
  Vocabulary() = default;
  // Entries must already be in index order.
  explicit Vocabulary(std::vector<std::pair<std::string, int64_t>> entries);

  int32_t size() const { return static_cast<int32_t>(tokens_.size()); }
  bool empty() const { return tokens_.empty(); }
  // Index of `token`, or -1 when absent.
  int32_t index(std::string_view token) const;
  const std::string& token(int32_t i) const { return tokens_.at(i); }
  int64_t count(int32_t i) const { return counts_.at(i); }

  std::string to_tsv() const;
  static Vocabulary from_tsv(std::string_view text);
  bool operator==(const Vocabulary& o) const {
    return tokens_ == o.tokens_ && counts_ == o.counts_;
  }

 private:
  std::vector<std::string> tokens_;
  std::vector<int64_t> counts_;
  std::unordered_map<std::string, int32_t> index_;
};

// Keeps tokens seen at least `min_count` times; indices by descending
// frequency, ties broken lexicographically. Throws Error("invalid_argument",
// "empty vocabulary") when nothing survives.
Vocabulary build_vocabulary(const std::vector<TokenizedDoc>& docs, int64_t min_count);
Vocabulary vocabulary_from_counts(const std::unordered_map<std::string, int64_t>& counts,
                                  int64_t min_count);

}  // namespace opinion
