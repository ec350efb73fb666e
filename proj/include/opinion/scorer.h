#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "opinion/corpus.h"
#include "opinion/polarity.h"
#include "opinion/topics.h"
#include "opinion/tuner.h"

namespace opinion {

inline constexpr int kGbtFormatVersion = 1;

// Class order is fixed: very_high, high, moderate.
enum class ScoreBucket : int { very_high = 0, high = 1, moderate = 2 };

std::string_view to_string(ScoreBucket b);
std::optional<ScoreBucket> parse_bucket(std::string_view s);

// [4.5, 5] -> very_high, [4.0, 4.5) -> high, [1.0, 4.0) -> moderate.
// Throws Error("invalid_argument") outside [1, 5].
ScoreBucket bucketize(double mean_score);

enum class ScoreField { pedagogy, evaluation, interpersonal };

std::string_view to_string(ScoreField f);
ScoreField parse_score_field(std::string_view s);
double course_score(const CourseRecord& course, ScoreField field);

struct CourseFeatures {
  std::string subject_code;
  std::string period;
  std::vector<double> embedding;
  std::vector<double> topic_probs;
  int64_t n_comments = 0;

  // embedding followed by topic_probs
  std::vector<double> vector() const;
  bool operator==(const CourseFeatures&) const = default;
};

struct FeatureSet {
  std::vector<CourseFeatures> features;
  // Keys of courses that had no kept comment.
  std::vector<std::string> skipped;
};

// Mean document embedding and mean topic mixture over each course's
// comments. Comments are tokenized with the polarity model's preprocessing.
// Output follows the order of `courses`.
FeatureSet build_features(const std::vector<CourseRecord>& courses,
                          const std::vector<Comment>& kept_comments,
                          const PolarityModel& polarity, const TopicModel& topics);

std::vector<std::string> feature_names(int embedding_dim, int num_topics);

struct GbtParams {
  int rounds = 100;
  int max_depth = 3;
  double learning_rate = 0.1;
  double lambda = 1.0;
  double min_child_weight = 1e-6;
  uint64_t seed = 1;

  nlohmann::json to_json() const;
  static GbtParams from_json(const nlohmann::json& j);
  bool operator==(const GbtParams&) const = default;
};

// Flattened regression tree. A node with feature < 0 is a leaf; otherwise
// x[feature] < threshold goes left.
struct GbtTree {
  std::vector<int32_t> feature;
  std::vector<double> threshold;
  std::vector<int32_t> left;
  std::vector<int32_t> right;
  std::vector<double> value;

  double eval(std::span<const double> x) const;
  bool operator==(const GbtTree&) const = default;
};

struct BucketPrediction {
  ScoreBucket bucket = ScoreBucket::very_high;
  std::array<double, 3> probabilities{};
};

class GbtModel {
 public:
  GbtModel() = default;

  const GbtParams& params() const { return params_; }
  int num_features() const { return num_features_; }
  int rounds() const { return static_cast<int>(trees_.size() / 3); }
  const std::vector<std::string>& feature_names() const { return names_; }
  // Tree for `round` and class index `cls`.
  const GbtTree& tree(int round, int cls) const { return trees_[round * 3 + cls]; }
  // Mean training log-loss before boosting and after each round.
  const std::vector<double>& training_loss() const { return training_loss_; }

  std::array<double, 3> raw_scores(std::span<const double> x) const;
  // Throws Error("invalid_argument") on a feature-dimension mismatch.
  BucketPrediction predict(std::span<const double> x) const;

  void save(const std::filesystem::path& dir) const;
  static GbtModel load(const std::filesystem::path& dir);
  bool operator==(const GbtModel&) const = default;

 private:
  friend GbtModel train_gbt(const std::vector<std::vector<double>>&,
                            const std::vector<ScoreBucket>&, const GbtParams&,
                            std::vector<std::string>);

  GbtParams params_;
  int num_features_ = 0;
  std::vector<std::string> names_;
  std::vector<GbtTree> trees_;
  std::vector<double> training_loss_;
};

// Multiclass softmax boosting: each round fits one regression tree per
// class to the log-loss gradient using exact greedy splits and Newton leaf
// values. Throws Error("training") when fewer than two buckets are present.
GbtModel train_gbt(const std::vector<std::vector<double>>& x, const std::vector<ScoreBucket>& y,
                   const GbtParams& params, std::vector<std::string> names = {});

double mean_log_loss(const GbtModel& model, const std::vector<std::vector<double>>& x,
                     const std::vector<ScoreBucket>& y);

SearchSpace default_gbt_space();
GbtParams apply_gbt_params(GbtParams base, const Assignment& a);

}  // namespace opinion
