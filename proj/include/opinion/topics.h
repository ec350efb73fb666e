#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "opinion/textprep.h"

namespace opinion {

inline constexpr int kTopicFormatVersion = 1;

struct LdaParams {
  int k = 5;
  // Symmetric document-topic prior; a non-positive value means 50 / k.
  double alpha = 0.0;
  double beta = 0.01;
  int iterations = 500;
  uint64_t seed = 1;

  double resolved_alpha() const { return alpha > 0.0 ? alpha : 50.0 / k; }
};

// Collapsed-Gibbs LDA state. Count tables always agree with assignments.
class TopicModel {
 public:
  TopicModel() = default;

  // Builds the count tables from explicit assignments (one topic per token
  // of each non-empty doc). Tokens must all be in `vocabulary`.
  static TopicModel from_assignments(const std::vector<TokenizedDoc>& docs, Vocabulary vocabulary,
                                     const std::vector<std::vector<int32_t>>& assignments,
                                     const LdaParams& params);

  int k() const { return k_; }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  int iterations() const { return iterations_; }
  uint64_t seed() const { return seed_; }
  const Vocabulary& vocabulary() const { return vocab_; }
  std::size_t num_docs() const { return doc_words_.size(); }
  int64_t total_tokens() const;
  const std::vector<std::string>& doc_ids() const { return doc_ids_; }
  const std::vector<std::vector<int32_t>>& doc_words() const { return doc_words_; }
  const std::vector<std::vector<int32_t>>& assignments() const { return z_; }
  const std::vector<double>& log_likelihood() const { return log_likelihood_; }

  int32_t doc_topic_count(std::size_t d, int topic) const { return n_dk_[d * k_ + topic]; }
  int32_t topic_word_count(int topic, int32_t w) const {
    return n_kw_[static_cast<std::size_t>(topic) * vocab_.size() + w];
  }
  int32_t topic_count(int topic) const { return n_k_[topic]; }

  // (n_kw + beta) / (n_k + V beta)
  std::vector<double> topic_word_distribution(int topic) const;

  // Training docs (matched by comment id): (n_dk + alpha) / (n_d + K alpha).
  // Other docs: 20 fold-in sweeps against frozen topic-word counts, then the
  // same formula. A doc without in-vocabulary tokens gets 1/K everywhere.
  std::vector<double> doc_topics(const TokenizedDoc& doc) const;
  std::vector<double> training_doc_topics(std::size_t d) const;
  std::vector<double> fold_in(const TokenizedDoc& doc, int sweeps = 20) const;

  // Σ_d n_dk = n_k, Σ_w n_kw = n_k, Σ_k n_dk = len(d), Σ_k n_k = total, and
  // every table matches the assignments.
  bool consistent() const;

  void save(const std::filesystem::path& dir) const;
  static TopicModel load(const std::filesystem::path& dir);

 private:
  friend TopicModel fit_lda(const std::vector<TokenizedDoc>&, const LdaParams&,
                            const std::function<void(int, const TopicModel&)>&);

  void rebuild_counts();
  double corpus_log_likelihood() const;

  int k_ = 0;
  double alpha_ = 0.0;
  double beta_ = 0.0;
  int iterations_ = 0;
  uint64_t seed_ = 0;
  Vocabulary vocab_;
  std::vector<std::string> doc_ids_;
  std::unordered_map<std::string, std::size_t> doc_index_;
  std::vector<std::vector<int32_t>> doc_words_;
  std::vector<std::vector<int32_t>> z_;
  std::vector<int32_t> n_dk_;  // D x K
  std::vector<int32_t> n_kw_;  // K x V
  std::vector<int32_t> n_k_;   // K
  std::vector<double> log_likelihood_;
};

using SweepCallback = std::function<void(int iteration, const TopicModel&)>;

// Fits LDA by collapsed Gibbs sampling. Empty docs are skipped. The
// callback, when given, runs after every sweep. Throws
// Error("invalid_argument") for k < 2, iterations < 1, an empty vocabulary,
// or k larger than the token count.
TopicModel fit_lda(const std::vector<TokenizedDoc>& docs, const LdaParams& params,
                   const SweepCallback& on_sweep = {});

struct TopicSummary {
  int topic_id = 0;
  std::vector<std::pair<std::string, double>> top_words;
  std::vector<std::pair<std::string, double>> representative_comments;

  bool operator==(const TopicSummary&) const = default;
};

std::vector<TopicSummary> summarize(const TopicModel& model, const std::vector<TokenizedDoc>& docs,
                                    std::size_t top_n_words, std::size_t top_n_docs);

// `topic_id,label` overlay; topics without a row are named "topic-<id>".
std::map<int, std::string> load_topic_names(const std::filesystem::path& path);
std::string topic_name(const std::map<int, std::string>& names, int topic);

}  // namespace opinion
