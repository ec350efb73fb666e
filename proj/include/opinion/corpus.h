#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "opinion/common.h"

namespace opinion {

struct Comment {
  std::string id;
  std::string subject_code;
  std::string period;
  std::string text;
  std::optional<Polarity> label;

  bool operator==(const Comment&) const = default;
};

enum class EducationLevel { undergraduate, postgraduate };

std::string_view to_string(EducationLevel level);

struct CourseRecord {
  std::string subject_code;
  std::string period;
  int64_t num_students = 0;
  double score_pedagogy = 1.0;
  double score_evaluation = 1.0;
  double score_interpersonal = 1.0;
  EducationLevel education_level = EducationLevel::undergraduate;

  bool operator==(const CourseRecord&) const = default;
};

// Courses are keyed by (subject_code, period).
std::string course_key(std::string_view subject_code, std::string_view period);
inline std::string course_key(const CourseRecord& c) { return course_key(c.subject_code, c.period); }
inline std::string course_key(const Comment& c) { return course_key(c.subject_code, c.period); }

struct LabelRow {
  std::string comment_id;
  Polarity polarity;

  bool operator==(const LabelRow&) const = default;
};

struct DatasetSplit {
  std::vector<std::string> train;
  std::vector<std::string> validation;
  std::vector<std::string> test;
  uint64_t seed = 0;
};

// CSV schemas:
//   comments: id,subject_code,period,comment
//   courses:  subject_code,period,num_students,score_pedagogy,score_evaluation,
//             score_interpersonal,education_level
//   labels:   comment_id,polarity
std::vector<Comment> load_comments(const std::filesystem::path& path);
std::vector<CourseRecord> load_courses(const std::filesystem::path& path);
std::vector<LabelRow> load_labels(const std::filesystem::path& path);

void save_comments(const std::filesystem::path& path, const std::vector<Comment>& comments);
void save_courses(const std::filesystem::path& path, const std::vector<CourseRecord>& courses);
void save_labels(const std::filesystem::path& path, const std::vector<LabelRow>& labels);

// Attaches labels to comments by id. Throws Error("schema") for a label whose
// id is absent from the corpus; later rows override earlier ones.
void attach_labels(std::vector<Comment>& comments, const std::vector<LabelRow>& labels);

struct FilterResult {
  std::vector<Comment> kept;
  std::vector<Comment> dropped;
};

inline constexpr std::size_t kMinWords = 5;
inline constexpr std::size_t kMinChars = 10;

// Keeps a comment iff it has at least 5 whitespace-separated tokens and at
// least 10 characters once surrounding whitespace is trimmed.
bool passes_quality(std::string_view text);
FilterResult filter_quality(const std::vector<Comment>& comments);

// Stratified 64/16/20 split. Sizes: |train| = round(0.64 N),
// |test| = round(0.20 N), validation takes the remainder. Lists keep input
// order. Requires at least 3 labeled comments per class.
DatasetSplit split(const std::vector<Comment>& comments, uint64_t seed);

struct ScoredItem {
  std::vector<double> features;
  double mean_score = 0.0;

  bool operator==(const ScoredItem&) const = default;
};

// Undersamples the larger side so that the count with score >= pivot equals
// the count below it. Returned indices are ascending.
std::vector<std::size_t> balance_indices(const std::vector<double>& scores, double pivot,
                                         uint64_t seed);
std::vector<ScoredItem> balance_courses(const std::vector<ScoredItem>& items, double pivot,
                                        uint64_t seed);

}  // namespace opinion
