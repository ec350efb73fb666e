#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "opinion/analytics.h"
#include "opinion/corpus.h"
#include "opinion/polarity.h"
#include "opinion/scorer.h"
#include "opinion/synth.h"
#include "opinion/textprep.h"
#include "opinion/topics.h"
#include "opinion/tuner.h"

namespace opinion {

// Everything a pipeline run depends on. Loaded from a JSON file whose keys
// mirror the fields; absent keys keep their defaults.
struct PipelineConfig {
  std::filesystem::path workdir = "work";
  // Inputs; empty means the files `synth` writes under workdir/data.
  std::filesystem::path comments;
  std::filesystem::path courses;
  std::filesystem::path labels;
  std::filesystem::path stopwords;    // empty: built-in list
  std::filesystem::path topic_names;  // optional `topic_id,label` overlay
  uint64_t seed = 42;

  SynthConfig synth;
  bool strip_accents = false;
  bool stem = true;

  // Class weighting is on by default because tuning targets macro accuracy.
  PolarityHyperparams polarity = [] {
    PolarityHyperparams h;
    h.class_weights = true;
    return h;
  }();
  std::size_t tune_budget = 30;
  double epsilon = 0.2;
  TpeOptions tpe;

  LdaParams lda;
  std::size_t top_words = 10;
  std::size_t top_comments = 3;

  GbtParams gbt;
  std::size_t gbt_budget = 20;
  double balance_pivot = 4.4;
  ScoreField score_field = ScoreField::evaluation;

  double triage_threshold = 0.7;

  nlohmann::json to_json() const;
  static PipelineConfig from_json(const nlohmann::json& j);
  std::string hash() const;

  std::filesystem::path comments_path() const;
  std::filesystem::path courses_path() const;
  std::filesystem::path labels_path() const;
  PreprocessConfig preprocess() const;
};

PipelineConfig load_config(const std::filesystem::path& path);

namespace paths {
std::filesystem::path data(const PipelineConfig& c);
std::filesystem::path ingest(const PipelineConfig& c);
std::filesystem::path tune(const PipelineConfig& c);
std::filesystem::path polarity_model(const PipelineConfig& c);
std::filesystem::path topic_model(const PipelineConfig& c);
std::filesystem::path score_model(const PipelineConfig& c);
std::filesystem::path eval(const PipelineConfig& c);
std::filesystem::path report(const PipelineConfig& c);
std::filesystem::path label_log(const PipelineConfig& c);
}  // namespace paths

struct IngestData {
  std::vector<Comment> kept;  // labels attached where known
  std::vector<CourseRecord> courses;
  DatasetSplit split;
};

// Loads the ingest stage's outputs. Throws Error("missing_artifact")
// naming `opinion ingest` when they are absent.
IngestData load_ingest(const PipelineConfig& c);

std::vector<LabeledDoc> labeled_docs(const std::vector<Comment>& comments,
                                     const std::vector<std::string>& ids,
                                     const PreprocessConfig& prep);

// Stage commands. Each reads and writes only under the workdir (plus the
// configured inputs), logs its seed and config hash to `log`, and throws
// Error("missing_artifact") naming the prior command when an input is absent.
void cmd_synth(const PipelineConfig& c, std::ostream& log);
void cmd_ingest(const PipelineConfig& c, std::ostream& log);
void cmd_tune(const PipelineConfig& c, std::ostream& log);
void cmd_train_polarity(const PipelineConfig& c, std::ostream& log);
void cmd_train_topics(const PipelineConfig& c, std::ostream& log);
void cmd_train_scorer(const PipelineConfig& c, std::ostream& log);
// Prints macro accuracies to `out`.
void cmd_eval(const PipelineConfig& c, std::ostream& out, std::ostream& log);
void cmd_report(const PipelineConfig& c, std::ostream& log);

struct CourseSplit {
  std::vector<std::string> train;
  std::vector<std::string> test;
};

// Per-bucket 80/20 split of course keys; lists keep input order.
CourseSplit split_courses(const std::vector<std::string>& keys,
                          const std::vector<ScoreBucket>& buckets, uint64_t seed);

}  // namespace opinion
