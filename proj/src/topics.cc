#include "opinion/topics.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "opinion/csv.h"
#include "opinion/io.h"

namespace opinion {

TopicModel TopicModel::from_assignments(const std::vector<TokenizedDoc>& docs,
                                        Vocabulary vocabulary,
                                        const std::vector<std::vector<int32_t>>& assignments,
                                        const LdaParams& params) {
  TopicModel m;
  m.k_ = params.k;
  m.alpha_ = params.resolved_alpha();
  m.beta_ = params.beta;
  m.iterations_ = params.iterations;
  m.seed_ = params.seed;
  m.vocab_ = std::move(vocabulary);
  std::size_t a = 0;
  for (const auto& doc : docs) {
    if (doc.tokens.empty()) continue;
    if (a >= assignments.size() || assignments[a].size() != doc.tokens.size()) {
      throw Error("invalid_argument", "assignments do not match documents");
    }
    std::vector<int32_t> words;
    for (const auto& t : doc.tokens) {
      int32_t w = m.vocab_.index(t);
      if (w < 0) throw Error("invalid_argument", "token '" + t + "' not in vocabulary");
      words.push_back(w);
    }
    for (int32_t z : assignments[a]) {
      if (z < 0 || z >= m.k_) throw Error("invalid_argument", "topic assignment out of range");
    }
    m.doc_index_.emplace(doc.comment_id, m.doc_words_.size());
    m.doc_ids_.push_back(doc.comment_id);
    m.doc_words_.push_back(std::move(words));
    m.z_.push_back(assignments[a]);
    ++a;
  }
  m.rebuild_counts();
  return m;
}

int64_t TopicModel::total_tokens() const {
  int64_t n = 0;
  for (const auto& d : doc_words_) n += static_cast<int64_t>(d.size());
  return n;
}

void TopicModel::rebuild_counts() {
  const std::size_t v = vocab_.size();
  n_dk_.assign(doc_words_.size() * k_, 0);
  n_kw_.assign(static_cast<std::size_t>(k_) * v, 0);
  n_k_.assign(k_, 0);
  for (std::size_t d = 0; d < doc_words_.size(); ++d) {
    for (std::size_t i = 0; i < doc_words_[d].size(); ++i) {
      int32_t z = z_[d][i];
      ++n_dk_[d * k_ + z];
      ++n_kw_[static_cast<std::size_t>(z) * v + doc_words_[d][i]];
      ++n_k_[z];
    }
  }
}

std::vector<double> TopicModel::topic_word_distribution(int topic) const {
  const int32_t v = vocab_.size();
  std::vector<double> phi(v);
  const double denom = n_k_[topic] + v * beta_;
  for (int32_t w = 0; w < v; ++w) phi[w] = (topic_word_count(topic, w) + beta_) / denom;
  return phi;
}

std::vector<double> TopicModel::training_doc_topics(std::size_t d) const {
  std::vector<double> theta(k_);
  const double denom = static_cast<double>(doc_words_[d].size()) + k_ * alpha_;
  for (int t = 0; t < k_; ++t) theta[t] = (n_dk_[d * k_ + t] + alpha_) / denom;
  return theta;
}

std::vector<double> TopicModel::fold_in(const TokenizedDoc& doc, int sweeps) const {
  std::vector<int32_t> words;
  for (const auto& t : doc.tokens) {
    int32_t w = vocab_.index(t);
    if (w >= 0) words.push_back(w);
  }
  std::vector<double> theta(k_, 1.0 / k_);
  if (words.empty()) return theta;

  std::string key;
  for (const auto& t : doc.tokens) {
    key += t;
    key.push_back(' ');
  }
  Rng rng(derive_seed(seed_, "topics/fold-in/" + key));
  const double vbeta = vocab_.size() * beta_;
  std::vector<int32_t> local(k_, 0);
  std::vector<int32_t> z(words.size());
  for (auto& zi : z) {
    zi = static_cast<int32_t>(rng.below(k_));
    ++local[zi];
  }
  std::vector<double> p(k_);
  for (int s = 0; s < sweeps; ++s) {
    for (std::size_t i = 0; i < words.size(); ++i) {
      --local[z[i]];
      for (int t = 0; t < k_; ++t) {
        p[t] = (local[t] + alpha_) * (topic_word_count(t, words[i]) + beta_) / (n_k_[t] + vbeta);
      }
      z[i] = static_cast<int32_t>(rng.categorical(p));
      ++local[z[i]];
    }
  }
  const double denom = static_cast<double>(words.size()) + k_ * alpha_;
  for (int t = 0; t < k_; ++t) theta[t] = (local[t] + alpha_) / denom;
  return theta;
}

std::vector<double> TopicModel::doc_topics(const TokenizedDoc& doc) const {
  if (!doc.comment_id.empty()) {
    auto it = doc_index_.find(doc.comment_id);
    if (it != doc_index_.end()) return training_doc_topics(it->second);
  }
  return fold_in(doc);
}

bool TopicModel::consistent() const {
  const std::size_t v = vocab_.size();
  std::vector<int32_t> dk(doc_words_.size() * k_, 0), kw(static_cast<std::size_t>(k_) * v, 0),
      kk(k_, 0);
  for (std::size_t d = 0; d < doc_words_.size(); ++d) {
    for (std::size_t i = 0; i < doc_words_[d].size(); ++i) {
      ++dk[d * k_ + z_[d][i]];
      ++kw[static_cast<std::size_t>(z_[d][i]) * v + doc_words_[d][i]];
      ++kk[z_[d][i]];
    }
  }
  if (dk != n_dk_ || kw != n_kw_ || kk != n_k_) return false;
  int64_t total = 0;
  for (int t = 0; t < k_; ++t) {
    int64_t by_word = 0, by_doc = 0;
    for (std::size_t w = 0; w < v; ++w) by_word += n_kw_[t * v + w];
    for (std::size_t d = 0; d < doc_words_.size(); ++d) by_doc += n_dk_[d * k_ + t];
    if (by_word != n_k_[t] || by_doc != n_k_[t]) return false;
    total += n_k_[t];
  }
  for (std::size_t d = 0; d < doc_words_.size(); ++d) {
    int64_t s = 0;
    for (int t = 0; t < k_; ++t) s += n_dk_[d * k_ + t];
    if (s != static_cast<int64_t>(doc_words_[d].size())) return false;
  }
  return total == total_tokens();
}

double TopicModel::corpus_log_likelihood() const {
  const int32_t v = vocab_.size();
  std::vector<double> phi(static_cast<std::size_t>(k_) * v);
  for (int t = 0; t < k_; ++t) {
    const double denom = n_k_[t] + v * beta_;
    for (int32_t w = 0; w < v; ++w) phi[static_cast<std::size_t>(t) * v + w] = (topic_word_count(t, w) + beta_) / denom;
  }
  double ll = 0.0;
  for (std::size_t d = 0; d < doc_words_.size(); ++d) {
    auto theta = training_doc_topics(d);
    for (int32_t w : doc_words_[d]) {
      double p = 0.0;
      for (int t = 0; t < k_; ++t) p += theta[t] * phi[static_cast<std::size_t>(t) * v + w];
      ll += std::log(p);
    }
  }
  return ll;
}

TopicModel fit_lda(const std::vector<TokenizedDoc>& docs, const LdaParams& params,
                   const SweepCallback& on_sweep) {
  if (params.k < 2) throw Error("invalid_argument", "LDA needs k >= 2");
  if (params.iterations < 1) throw Error("invalid_argument", "LDA needs iterations >= 1");
  if (!(params.beta > 0.0)) throw Error("invalid_argument", "LDA needs beta > 0");
  std::vector<TokenizedDoc> kept;
  int64_t total = 0;
  for (const auto& d : docs) {
    if (d.tokens.empty()) continue;
    kept.push_back(d);
    total += static_cast<int64_t>(d.tokens.size());
  }
  if (kept.empty()) throw Error("invalid_argument", "empty vocabulary");
  if (params.k > total) {
    throw Error("invalid_argument", "k = " + std::to_string(params.k) + " exceeds the " +
                                        std::to_string(total) + " available tokens");
  }
  Vocabulary vocab = build_vocabulary(kept, 1);

  Rng rng(derive_seed(params.seed, "topics/gibbs"));
  std::vector<std::vector<int32_t>> z;
  for (const auto& d : kept) {
    std::vector<int32_t> zd(d.tokens.size());
    for (auto& zi : zd) zi = static_cast<int32_t>(rng.below(params.k));
    z.push_back(std::move(zd));
  }
  TopicModel m = TopicModel::from_assignments(kept, std::move(vocab), z, params);

  const int k = m.k_;
  const std::size_t v = m.vocab_.size();
  const double alpha = m.alpha_, beta = m.beta_, vbeta = v * beta;
  std::vector<double> p(k);
  for (int it = 0; it < params.iterations; ++it) {
    for (std::size_t d = 0; d < m.doc_words_.size(); ++d) {
      int32_t* ndk = m.n_dk_.data() + d * k;
      for (std::size_t i = 0; i < m.doc_words_[d].size(); ++i) {
        const int32_t w = m.doc_words_[d][i];
        int32_t& zi = m.z_[d][i];
        --ndk[zi];
        --m.n_kw_[static_cast<std::size_t>(zi) * v + w];
        --m.n_k_[zi];
        for (int t = 0; t < k; ++t) {
          p[t] = (ndk[t] + alpha) * (m.n_kw_[static_cast<std::size_t>(t) * v + w] + beta) /
                 (m.n_k_[t] + vbeta);
        }
        zi = static_cast<int32_t>(rng.categorical(p));
        ++ndk[zi];
        ++m.n_kw_[static_cast<std::size_t>(zi) * v + w];
        ++m.n_k_[zi];
      }
    }
    m.log_likelihood_.push_back(m.corpus_log_likelihood());
    if (on_sweep) on_sweep(it, m);
  }
  return m;
}

void TopicModel::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  std::vector<int32_t> offsets{0}, words, assign;
  for (std::size_t d = 0; d < doc_words_.size(); ++d) {
    words.insert(words.end(), doc_words_[d].begin(), doc_words_[d].end());
    assign.insert(assign.end(), z_[d].begin(), z_[d].end());
    offsets.push_back(static_cast<int32_t>(words.size()));
  }
  std::string ids;
  for (const auto& id : doc_ids_) ids += id + "\n";
  const std::string vocab_tsv = vocab_.to_tsv();
  write_text(dir / "vocabulary.tsv", vocab_tsv);
  write_text(dir / "doc_ids.txt", ids);
  write_i32(dir / "topic_word.i32", n_kw_);
  write_i32(dir / "doc_topic.i32", n_dk_);
  write_i32(dir / "doc_offsets.i32", offsets);
  write_i32(dir / "doc_words.i32", words);
  write_i32(dir / "assignments.i32", assign);
  nlohmann::json mf = {
      {"format", "opinion-topics"},
      {"format_version", kTopicFormatVersion},
      {"k", k_},
      {"alpha", alpha_},
      {"beta", beta_},
      {"iterations", iterations_},
      {"seed", seed_},
      {"vocabulary", {{"file", "vocabulary.tsv"}, {"size", vocab_.size()}}},
      {"vocabulary_hash", hex64(fnv1a64(vocab_tsv))},
      {"num_docs", doc_words_.size()},
      {"total_tokens", words.size()},
      {"matrices",
       {{"topic_word", matrix_entry("topic_word.i32", "i32", k_, vocab_.size())},
        {"doc_topic", matrix_entry("doc_topic.i32", "i32", doc_words_.size(), k_)},
        {"doc_offsets", matrix_entry("doc_offsets.i32", "i32", 1, offsets.size())},
        {"doc_words", matrix_entry("doc_words.i32", "i32", 1, words.size())},
        {"assignments", matrix_entry("assignments.i32", "i32", 1, assign.size())}}},
      {"log_likelihood", log_likelihood_}};
  write_json(dir / "manifest", mf);
}

TopicModel TopicModel::load(const std::filesystem::path& dir) {
  if (!std::filesystem::exists(dir / "manifest")) {
    throw Error("missing_artifact", "no topic model at " + dir.string());
  }
  nlohmann::json mf = read_json(dir / "manifest");
  try {
    if (mf.value("format", "") != "opinion-topics") {
      throw Error("version", dir.string() + ": not a topic model bundle");
    }
    if (mf.at("format_version").get<int>() != kTopicFormatVersion) {
      throw Error("version", dir.string() + ": unsupported topic model format version");
    }
    TopicModel m;
    m.k_ = mf.at("k").get<int>();
    m.alpha_ = mf.at("alpha").get<double>();
    m.beta_ = mf.at("beta").get<double>();
    m.iterations_ = mf.at("iterations").get<int>();
    m.seed_ = mf.at("seed").get<uint64_t>();
    std::string vocab_tsv = read_text(dir / "vocabulary.tsv");
    if (hex64(fnv1a64(vocab_tsv)) != mf.at("vocabulary_hash").get<std::string>()) {
      throw Error("corrupt", dir.string() + ": vocabulary hash mismatch");
    }
    m.vocab_ = Vocabulary::from_tsv(vocab_tsv);
    const std::size_t d = mf.at("num_docs").get<std::size_t>();
    const std::size_t n = mf.at("total_tokens").get<std::size_t>();
    auto offsets = read_i32(dir / "doc_offsets.i32", d + 1);
    auto words = read_i32(dir / "doc_words.i32", n);
    auto assign = read_i32(dir / "assignments.i32", n);
    m.n_kw_ = read_i32(dir / "topic_word.i32", static_cast<std::size_t>(m.k_) * m.vocab_.size());
    auto n_dk = read_i32(dir / "doc_topic.i32", d * m.k_);
    std::string ids = read_text(dir / "doc_ids.txt");
    std::size_t pos = 0;
    while (pos < ids.size()) {
      std::size_t end = ids.find('\n', pos);
      if (end == std::string::npos) end = ids.size();
      m.doc_ids_.push_back(ids.substr(pos, end - pos));
      pos = end + 1;
    }
    if (m.doc_ids_.size() != d) throw Error("corrupt", dir.string() + ": doc id count mismatch");
    for (std::size_t i = 0; i < d; ++i) {
      if (offsets[i] > offsets[i + 1] || static_cast<std::size_t>(offsets[i + 1]) > n) {
        throw Error("corrupt", dir.string() + ": bad document offsets");
      }
      m.doc_words_.emplace_back(words.begin() + offsets[i], words.begin() + offsets[i + 1]);
      m.z_.emplace_back(assign.begin() + offsets[i], assign.begin() + offsets[i + 1]);
      m.doc_index_.emplace(m.doc_ids_[i], i);
    }
    auto stored_kw = m.n_kw_;
    m.rebuild_counts();
    if (stored_kw != m.n_kw_ || n_dk != m.n_dk_) {
      throw Error("corrupt", dir.string() + ": count tables disagree with assignments");
    }
    m.log_likelihood_ = mf.at("log_likelihood").get<std::vector<double>>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error("corrupt", dir.string() + ": malformed manifest: " + e.what());
  }
}

std::vector<TopicSummary> summarize(const TopicModel& model, const std::vector<TokenizedDoc>& docs,
                                    std::size_t top_n_words, std::size_t top_n_docs) {
  std::vector<std::vector<double>> theta;
  if (top_n_docs > 0) {
    theta.reserve(docs.size());
    for (const auto& d : docs) theta.push_back(model.doc_topics(d));
  }
  std::vector<TopicSummary> out;
  for (int t = 0; t < model.k(); ++t) {
    TopicSummary s;
    s.topic_id = t;
    auto phi = model.topic_word_distribution(t);
    std::vector<int32_t> order(phi.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int32_t a, int32_t b) { return phi[a] > phi[b]; });
    for (std::size_t i = 0; i < std::min(top_n_words, order.size()); ++i) {
      s.top_words.emplace_back(model.vocabulary().token(order[i]), phi[order[i]]);
    }
    if (top_n_docs > 0) {
      std::vector<std::size_t> di(docs.size());
      std::iota(di.begin(), di.end(), 0);
      std::stable_sort(di.begin(), di.end(),
                       [&](std::size_t a, std::size_t b) { return theta[a][t] > theta[b][t]; });
      for (std::size_t i = 0; i < std::min(top_n_docs, di.size()); ++i) {
        s.representative_comments.emplace_back(docs[di[i]].comment_id, theta[di[i]][t]);
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::map<int, std::string> load_topic_names(const std::filesystem::path& path) {
  csv::Table t = csv::read_file(path);
  std::size_t c_id = t.column("topic_id");
  std::size_t c_label = t.column("label");
  std::map<int, std::string> names;
  for (const auto& r : t.rows) {
    try {
      names[std::stoi(r.fields[c_id])] = r.fields[c_label];
    } catch (const std::exception&) {
      throw Error("schema", path.string() + ": row " + std::to_string(r.line) +
                                ", column 'topic_id': not an integer");
    }
  }
  return names;
}

std::string topic_name(const std::map<int, std::string>& names, int topic) {
  auto it = names.find(topic);
  return it != names.end() ? it->second : "topic-" + std::to_string(topic);
}

}  // namespace opinion
