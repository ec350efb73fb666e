#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "opinion/corpus.h"
#include "opinion/polarity.h"
#include "opinion/scorer.h"
#include "opinion/topics.h"

// Shared fixtures for the unit and acceptance suites.
namespace fixtures {

// Five short labeled docs covering all classes.
std::vector<opinion::LabeledDoc> gradient_docs();

// A d = 4 classifier trained briefly on gradient_docs(), so weights are
// away from their initialization.
opinion::PolarityModel gradient_model();

struct GradientCheck {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
};

// Compares loss_gradient against central finite differences for every
// output weight, bias and every entry of the embedding rows the docs
// touch. Relative error is |a - n| / max(|a|, |n|, 1e-6). Perturbed
// values are re-read from the float storage so the divided difference
// uses the step actually taken.
GradientCheck check_gradients(const opinion::PolarityModel& model,
                              const std::vector<opinion::LabeledDoc>& docs, double step = 1e-4);

struct PlantedCorpus {
  std::vector<opinion::TokenizedDoc> docs;
  // Planted topic of every token, aligned with docs[d].tokens.
  std::vector<std::vector<int>> token_topic;
  std::vector<std::vector<std::string>> vocab;
};

// Two disjoint 10-word vocabularies; each doc draws 80% of its tokens from
// its dominant topic (alternating by doc) and the rest from the other.
PlantedCorpus planted_two_topics(uint64_t seed, std::size_t n_docs = 50, std::size_t doc_len = 20);

// Fraction of tokens whose inferred topic matches the planted one under
// the best of the 2 topic permutations.
double topic_purity(const opinion::TopicModel& model, const PlantedCorpus& corpus);

// The per-sweep invariants for a fitted or partially fitted model.
bool count_tables_consistent(const opinion::TopicModel& model);

struct ScorerData {
  std::vector<std::vector<double>> x_train, x_test;
  std::vector<opinion::ScoreBucket> y_train, y_test;
  std::vector<std::string> names;
};

// Courses whose score is fixed by the share of positive comments
// (score = 2.5 + 2.5 * positive share). Features come from the real
// pipeline: a classifier and an LDA model trained on separate synthetic
// comments, then build_features, then a per-bucket 80/20 split.
ScorerData scorer_data(uint64_t seed, std::size_t n_courses = 240);

// Sorted "relative-path hash" lines for every file under `dir` except the
// wall-clock timings sidecar, which is the one artifact allowed to differ
// between identical runs.
std::string artifact_digest(const std::filesystem::path& dir);

}  // namespace fixtures
