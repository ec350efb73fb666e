#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "opinion/corpus.h"
#include "opinion/metrics.h"
#include "opinion/polarity.h"
#include "opinion/scorer.h"
#include "opinion/topics.h"

namespace opinion {

inline constexpr int kReportFormatVersion = 1;

// Linear-interpolation quantile (R type 7) of an ascending sample.
double quantile_sorted(const std::vector<double>& sorted, double q);

struct GroupStats {
  int topic_id = 0;
  Polarity polarity = Polarity::positive;
  int64_t count = 0;
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
  double mean = 0.0;

  bool operator==(const GroupStats&) const = default;
};

// Throws Error("invalid_argument") on an empty sample.
GroupStats group_stats(int topic_id, Polarity polarity, std::vector<double> values);

struct ResponseRate {
  std::string subject_code;
  std::string period;
  int64_t num_students = 0;
  int64_t kept_comments = 0;
  double rr = 0.0;
  // More kept comments than enrolled students.
  bool exceeds_one = false;

  bool operator==(const ResponseRate&) const = default;
};

// kept / num_students. Throws Error("invalid_argument") when the course
// has no enrolled students.
ResponseRate response_rate(const CourseRecord& course, int64_t kept_comments);

struct ResponseRateTable {
  std::vector<ResponseRate> rates;
  // Courses whose rate is undefined (no enrolled students).
  std::vector<std::string> undefined;

  bool operator==(const ResponseRateTable&) const = default;
};

ResponseRateTable response_rates(const std::vector<CourseRecord>& courses,
                                 const std::vector<Comment>& kept_comments);

// One comment placed in a single (topic, polarity) cell.
struct CommentAssignment {
  std::string comment_id;
  std::string course;
  int topic_id = 0;
  Polarity polarity = Polarity::positive;
};

std::vector<CommentAssignment> assign_comments(const std::vector<Comment>& kept_comments,
                                               const PolarityModel& polarity,
                                               const TopicModel& topics);

struct GroupTables {
  std::vector<GroupStats> scores;
  std::vector<GroupStats> response_rates;
};

// Per (topic, polarity) cell: statistics of the course score and of the
// course response rate over the comments in the cell. Cells are ordered by
// topic, then polarity; empty cells are omitted. Comments whose course is
// unknown are left out of both tables; undefined rates are left out of the
// rate table.
GroupTables group_by_topic_polarity(const std::vector<CommentAssignment>& assignments,
                                    const std::vector<CourseRecord>& courses,
                                    const ResponseRateTable& rates, ScoreField field);

struct ClassifierEval {
  ConfusionMatrix train;
  ConfusionMatrix validation;
  ConfusionMatrix test;
  double s_train = 0.0;
  double s_validation = 0.0;
  double s_test = 0.0;
  ThresholdCurve curve;  // on the test split

  nlohmann::json to_json() const;
  static ClassifierEval from_json(const nlohmann::json& j);
  bool operator==(const ClassifierEval&) const = default;
};

struct ScorerEval {
  ConfusionMatrix train;
  ConfusionMatrix test;
  // Averaged over the buckets present in each split.
  double s_train = 0.0;
  double s_test = 0.0;
  int64_t skipped_courses = 0;

  nlohmann::json to_json() const;
  static ScorerEval from_json(const nlohmann::json& j);
  bool operator==(const ScorerEval&) const = default;
};

struct TopicEntry {
  int topic_id = 0;
  std::string name;
  std::vector<std::pair<std::string, double>> top_words;
  std::vector<std::pair<std::string, double>> representative_comments;

  bool operator==(const TopicEntry&) const = default;
};

struct Report {
  uint64_t seed = 0;
  ClassifierEval polarity;
  std::optional<ScorerEval> scorer;
  std::vector<TopicEntry> topics;
  std::vector<GroupStats> group_scores;
  std::vector<GroupStats> group_rr;
  ResponseRateTable response_rates;
  std::string score_field = "evaluation";
  // Bundle name -> content hash.
  std::map<std::string, std::string> bundles;

  bool operator==(const Report&) const = default;
};

Report build_report(uint64_t seed, const ClassifierEval& polarity,
                    const std::optional<ScorerEval>& scorer,
                    const std::vector<TopicSummary>& summaries,
                    const std::map<int, std::string>& topic_names, const GroupTables& groups,
                    const ResponseRateTable& rates, ScoreField field,
                    std::map<std::string, std::string> bundles);

nlohmann::json report_json(const Report& report);
Report report_from_json(const nlohmann::json& j);

// Writes `report` (JSON) plus the CSV sidecars into `dir`.
void write_report(const std::filesystem::path& dir, const Report& report);
Report load_report(const std::filesystem::path& dir);

std::string group_stats_csv(const std::vector<GroupStats>& groups,
                            const std::vector<TopicEntry>& topics);
std::string response_rates_csv(const ResponseRateTable& table);
std::string topics_csv(const std::vector<TopicEntry>& topics);

}  // namespace opinion
