#include "opinion/textprep.h"

#include <algorithm>
#include <charconv>

#include "opinion/io.h"
#include "opinion/stemmer.h"
#include "opinion/utf8.h"

namespace opinion {

extern const char* const kBuiltinStopwordsEs;  // generated from data/stopwords_es.txt

nlohmann::json PreprocessConfig::to_json() const {
  return {{"strip_accents", strip_accents},
          {"stem", stem},
          {"stopword_source", stopword_source},
          {"stopwords", std::vector<std::string>(stopwords.begin(), stopwords.end())}};
}

PreprocessConfig PreprocessConfig::from_json(const nlohmann::json& j) {
  PreprocessConfig c;
  c.strip_accents = j.at("strip_accents").get<bool>();
  c.stem = j.at("stem").get<bool>();
  c.stopword_source = j.at("stopword_source").get<std::string>();
  for (const auto& w : j.at("stopwords")) c.stopwords.insert(w.get<std::string>());
  return c;
}

std::set<std::string> parse_stopwords(std::string_view text) {
  std::set<std::string> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    line = utf8::trim(line.substr(0, line.find('#')));
    if (!line.empty()) {
      std::string lowered;
      for (char32_t cp : utf8::decode(line)) utf8::append(lowered, utf8::to_lower(cp));
      out.insert(lowered);
    }
    pos = end + 1;
  }
  return out;
}

std::set<std::string> load_stopwords(const std::filesystem::path& path) {
  return parse_stopwords(read_text(path));
}

PreprocessConfig default_preprocess_config() {
  PreprocessConfig c;
  c.stopwords = parse_stopwords(kBuiltinStopwordsEs);
  return c;
}

std::vector<std::string> preprocess_tokens(std::string_view text, const PreprocessConfig& config) {
  std::u32string chars = utf8::decode(text);
  for (auto& cp : chars) {
    cp = utf8::to_lower(cp);
    if (!utf8::is_letter(cp)) cp = U' ';
  }
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < chars.size()) {
    while (i < chars.size() && chars[i] == U' ') ++i;
    std::size_t start = i;
    while (i < chars.size() && chars[i] != U' ') ++i;
    if (i == start) continue;
    std::u32string word = chars.substr(start, i - start);
    std::string encoded = utf8::encode(word);
    if (config.stopwords.count(encoded)) continue;
    if (config.stem) word = stem_spanish(std::move(word));
    if (config.strip_accents) {
      for (auto& cp : word) cp = utf8::strip_accent(cp);
    }
    if (word.empty()) continue;
    tokens.push_back(utf8::encode(word));
  }
  return tokens;
}

TokenizedDoc preprocess(std::string_view text, const PreprocessConfig& config) {
  return TokenizedDoc{"", preprocess_tokens(text, config)};
}

TokenizedDoc preprocess(const Comment& comment, const PreprocessConfig& config) {
  return TokenizedDoc{comment.id, preprocess_tokens(comment.text, config)};
}

std::vector<TokenizedDoc> preprocess_all(const std::vector<Comment>& comments,
                                         const PreprocessConfig& config) {
  std::vector<TokenizedDoc> out;
  out.reserve(comments.size());
  for (const auto& c : comments) out.push_back(preprocess(c, config));
  return out;
}

std::vector<std::string> char_ngrams(std::string_view token, int n_min, int n_max) {
  if (n_min < 1 || n_max < n_min) {
    throw Error("invalid_argument", "char_ngrams requires 1 <= n_min <= n_max");
  }
  std::u32string wrapped = U"<" + utf8::decode(token) + U">";
  const std::size_t len = wrapped.size();
  std::vector<std::string> out;
  if (len < static_cast<std::size_t>(n_min)) {
    out.push_back(utf8::encode(wrapped));
    return out;
  }
  for (std::size_t start = 0; start < len; ++start) {
    for (int n = n_min; n <= n_max && start + n <= len; ++n) {
      out.push_back(utf8::encode(std::u32string_view(wrapped).substr(start, n)));
    }
  }
  return out;
}

Vocabulary::Vocabulary(std::vector<std::pair<std::string, int64_t>> entries) {
  tokens_.reserve(entries.size());
  counts_.reserve(entries.size());
  for (auto& [tok, cnt] : entries) {
    if (!index_.emplace(tok, static_cast<int32_t>(tokens_.size())).second) {
      throw Error("corrupt", "duplicate vocabulary entry '" + tok + "'");
    }
    tokens_.push_back(std::move(tok));
    counts_.push_back(cnt);
  }
}

int32_t Vocabulary::index(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? -1 : it->second;
}

std::string Vocabulary::to_tsv() const {
  std::string out;
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    out += tokens_[i];
    out.push_back('\t');
    out += std::to_string(counts_[i]);
    out.push_back('\n');
  }
  return out;
}

Vocabulary Vocabulary::from_tsv(std::string_view text) {
  std::vector<std::pair<std::string, int64_t>> entries;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    if (line.empty()) continue;
    std::size_t tab = line.rfind('\t');
    if (tab == std::string_view::npos) throw Error("corrupt", "vocabulary line without count");
    int64_t cnt = 0;
    auto [ptr, ec] = std::from_chars(line.data() + tab + 1, line.data() + line.size(), cnt);
    if (ec != std::errc() || ptr != line.data() + line.size()) {
      throw Error("corrupt", "bad vocabulary count");
    }
    entries.emplace_back(std::string(line.substr(0, tab)), cnt);
  }
  return Vocabulary(std::move(entries));
}

Vocabulary vocabulary_from_counts(const std::unordered_map<std::string, int64_t>& counts,
                                  int64_t min_count) {
  if (min_count < 1) throw Error("invalid_argument", "min_count must be >= 1");
  std::vector<std::pair<std::string, int64_t>> entries;
  for (const auto& [tok, cnt] : counts) {
    if (cnt >= min_count) entries.emplace_back(tok, cnt);
  }
  if (entries.empty()) throw Error("invalid_argument", "empty vocabulary");
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  return Vocabulary(std::move(entries));
}

Vocabulary build_vocabulary(const std::vector<TokenizedDoc>& docs, int64_t min_count) {
  std::unordered_map<std::string, int64_t> counts;
  for (const auto& d : docs) {
    for (const auto& t : d.tokens) ++counts[t];
  }
  return vocabulary_from_counts(counts, min_count);
}

}  // namespace opinion
