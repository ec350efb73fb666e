#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "opinion/common.h"
#include "opinion/textprep.h"

namespace opinion {

inline constexpr int kPolarityFormatVersion = 1;

struct PolarityHyperparams {
  double learning_rate = 0.1;
  int epochs = 25;
  int dim = 20;
  // 1 = unigrams only, 2 = unigrams plus word bigrams.
  int word_ngrams = 1;
  // Character n-gram range; minn = maxn = 0 disables subwords.
  int minn = 3;
  int maxn = 6;
  int64_t min_count = 1;
  uint64_t seed = 1;
  // Inverse-frequency class weights. Off by default.
  bool class_weights = false;

  nlohmann::json to_json() const;
  static PolarityHyperparams from_json(const nlohmann::json& j);
  bool operator==(const PolarityHyperparams&) const = default;
};

struct LabeledDoc {
  TokenizedDoc doc;
  Polarity label;
};

struct PolarityPrediction {
  std::array<double, 3> probabilities{};
  Polarity predicted = Polarity::positive;
  double confidence = 0.0;
};

// Softmax of logits with argmax ties broken by class order.
PolarityPrediction prediction_from_logits(const std::array<double, 3>& logits);

struct TrainOptions {
  // Evaluate the mean training loss after every epoch (costs one extra pass).
  bool track_epoch_loss = false;
};

// Averaged word + subword embeddings feeding a 3-way linear softmax.
//
// Embedding rows are laid out as [words | word bigrams | char n-grams]. All
// parameters are stored as 32-bit floats; arithmetic runs in double.
class PolarityModel {
 public:
  PolarityModel() = default;

  int dim() const { return hp_.dim; }
  int32_t rows() const { return words_.size() + bigrams_.size() + char_ngrams_.size(); }
  const PolarityHyperparams& hyperparams() const { return hp_; }
  const PreprocessConfig& preprocess_config() const { return prep_; }
  const Vocabulary& words() const { return words_; }
  const Vocabulary& bigrams() const { return bigrams_; }
  const Vocabulary& char_ngrams() const { return char_ngrams_; }

  // Embedding-row ids touched by a token sequence, with repetition.
  std::vector<int32_t> units(const std::vector<std::string>& tokens) const;

  // Mean of the touched embedding rows; zero vector when nothing is known.
  std::vector<double> embed(const TokenizedDoc& doc) const;
  std::vector<double> embed_units(std::span<const int32_t> units) const;
  std::array<double, 3> logits(std::span<const double> hidden) const;

  PolarityPrediction predict_doc(const TokenizedDoc& doc) const;
  PolarityPrediction predict(std::string_view text) const;

  std::span<float> input() { return input_; }
  std::span<const float> input() const { return input_; }
  std::span<float> output() { return output_; }
  std::span<const float> output() const { return output_; }
  std::span<float> bias() { return bias_; }
  std::span<const float> bias() const { return bias_; }

  double final_loss() const { return final_loss_; }
  const std::vector<double>& epoch_losses() const { return epoch_losses_; }

  void save(const std::filesystem::path& dir) const;
  static PolarityModel load(const std::filesystem::path& dir);

 private:
  friend PolarityModel train_polarity(const std::vector<LabeledDoc>&, const PolarityHyperparams&,
                                      const PreprocessConfig&, const TrainOptions&);

  PolarityHyperparams hp_;
  PreprocessConfig prep_;
  Vocabulary words_;
  Vocabulary bigrams_;
  Vocabulary char_ngrams_;
  std::vector<float> input_;   // rows x dim
  std::vector<float> output_;  // 3 x dim
  std::vector<float> bias_ = std::vector<float>(3, 0.0f);
  double final_loss_ = 0.0;
  std::vector<double> epoch_losses_;
};

// Per-example SGD on the (optionally class-weighted) cross-entropy with a
// learning rate decaying linearly to 0. Deterministic for a fixed seed.
// Throws Error("training") when a class is missing from `data`.
PolarityModel train_polarity(const std::vector<LabeledDoc>& data, const PolarityHyperparams& hp,
                             const PreprocessConfig& prep, const TrainOptions& options = {});

std::array<double, 3> class_weights_for(const std::vector<LabeledDoc>& data, bool enabled);

struct PolarityGradient {
  double loss = 0.0;
  std::vector<double> input;  // dense, rows x dim
  std::vector<double> output;
  std::vector<double> bias;
};

// Mean loss and its exact gradient over `data`.
PolarityGradient loss_gradient(const PolarityModel& model, const std::vector<LabeledDoc>& data);
double mean_loss(const PolarityModel& model, const std::vector<LabeledDoc>& data);

}  // namespace opinion
