#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "opinion/corpus.h"

namespace opinion {

// Generative model for a stand-in evaluation corpus.
//
// Each course draws a latent quality q ~ U(0, 1). A comment picks a course
// uniformly, then a polarity from the class prior tilted by q, then one of
// the planted topics uniformly. Its words are 3-5 polarity words (taken
// from another class's lexicon with probability `overlap`), 2-5 words of
// its topic (10% from another topic) and 2-5 shared filler words. A
// `short_fraction` of comments are 2-3 words long and fail the quality
// filter. The course score is 4.2 + 0.45 * z clamped to [1, 5], where z
// mixes the standardized quality and independent noise with weight
// `score_correlation`.
struct SynthConfig {
  std::size_t n_comments = 5000;
  std::size_t n_courses = 200;
  uint64_t seed = 42;
  double overlap = 0.15;
  int topics = 5;
  std::array<double, 3> class_prior = {0.55, 0.15, 0.30};
  double score_correlation = 0.8;
  double short_fraction = 0.05;

  nlohmann::json to_json() const;
  static SynthConfig from_json(const nlohmann::json& j);
};

struct SynthCorpus {
  std::vector<Comment> comments;  // labels attached
  std::vector<CourseRecord> courses;
  std::vector<LabelRow> labels;
  // Planted topic per comment, aligned with `comments`.
  std::vector<int> topic_of;
};

// Throws Error("invalid_argument") for n_comments < 30, n_courses < 1,
// overlap outside [0, 1], topics outside [1, 5] or a correlation outside
// [-1, 1].
SynthCorpus generate_synth(const SynthConfig& config);

// Writes comments.csv, courses.csv and labels.csv into `dir`.
void save_synth(const std::filesystem::path& dir, const SynthCorpus& corpus);

// Polarity lexicon for a class (raw surface words).
const std::vector<std::string>& synth_lexicon(Polarity p);
const std::vector<std::string>& synth_topic_words(int topic);

}  // namespace opinion
