#include "opinion/analytics.h"

#include <algorithm>
#include <cmath>
#include <map>

#include "opinion/csv.h"
#include "opinion/io.h"

namespace opinion {

double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw Error("invalid_argument", "quantile of an empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

GroupStats group_stats(int topic_id, Polarity polarity, std::vector<double> values) {
  if (values.empty()) throw Error("invalid_argument", "group statistics of an empty group");
  std::sort(values.begin(), values.end());
  GroupStats g;
  g.topic_id = topic_id;
  g.polarity = polarity;
  g.count = static_cast<int64_t>(values.size());
  g.min = values.front();
  g.q1 = quantile_sorted(values, 0.25);
  g.median = quantile_sorted(values, 0.5);
  g.q3 = quantile_sorted(values, 0.75);
  g.max = values.back();
  double sum = 0.0;
  for (double v : values) sum += v;
  g.mean = sum / static_cast<double>(values.size());
  return g;
}

ResponseRate response_rate(const CourseRecord& course, int64_t kept_comments) {
  if (course.num_students <= 0) {
    throw Error("invalid_argument",
                "response rate undefined for course " + course_key(course) + ": no enrolled students");
  }
  ResponseRate r;
  r.subject_code = course.subject_code;
  r.period = course.period;
  r.num_students = course.num_students;
  r.kept_comments = kept_comments;
  r.rr = static_cast<double>(kept_comments) / static_cast<double>(course.num_students);
  r.exceeds_one = kept_comments > course.num_students;
  return r;
}

ResponseRateTable response_rates(const std::vector<CourseRecord>& courses,
                                 const std::vector<Comment>& kept_comments) {
  std::map<std::string, int64_t> counts;
  for (const auto& c : kept_comments) ++counts[course_key(c)];
  ResponseRateTable t;
  for (const auto& course : courses) {
    const std::string key = course_key(course);
    if (course.num_students <= 0) {
      t.undefined.push_back(key);
      continue;
    }
    auto it = counts.find(key);
    t.rates.push_back(response_rate(course, it == counts.end() ? 0 : it->second));
  }
  return t;
}

std::vector<CommentAssignment> assign_comments(const std::vector<Comment>& kept_comments,
                                               const PolarityModel& polarity,
                                               const TopicModel& topics) {
  std::vector<CommentAssignment> out;
  out.reserve(kept_comments.size());
  for (const auto& c : kept_comments) {
    TokenizedDoc doc = preprocess(c, polarity.preprocess_config());
    auto theta = topics.doc_topics(doc);
    CommentAssignment a;
    a.comment_id = c.id;
    a.course = course_key(c);
    a.topic_id = static_cast<int>(std::max_element(theta.begin(), theta.end()) - theta.begin());
    a.polarity = polarity.predict_doc(doc).predicted;
    out.push_back(std::move(a));
  }
  return out;
}

GroupTables group_by_topic_polarity(const std::vector<CommentAssignment>& assignments,
                                    const std::vector<CourseRecord>& courses,
                                    const ResponseRateTable& rates, ScoreField field) {
  std::map<std::string, double> score_of, rr_of;
  for (const auto& c : courses) score_of[course_key(c)] = course_score(c, field);
  for (const auto& r : rates.rates) rr_of[course_key(r.subject_code, r.period)] = r.rr;

  std::map<std::pair<int, int>, std::vector<double>> scores, rr;
  for (const auto& a : assignments) {
    auto s = score_of.find(a.course);
    if (s == score_of.end()) continue;
    const std::pair<int, int> cell{a.topic_id, static_cast<int>(a.polarity)};
    scores[cell].push_back(s->second);
    auto r = rr_of.find(a.course);
    if (r != rr_of.end()) rr[cell].push_back(r->second);
  }
  GroupTables t;
  for (auto& [cell, v] : scores) {
    t.scores.push_back(group_stats(cell.first, static_cast<Polarity>(cell.second), std::move(v)));
  }
  for (auto& [cell, v] : rr) {
    t.response_rates.push_back(
        group_stats(cell.first, static_cast<Polarity>(cell.second), std::move(v)));
  }
  return t;
}

nlohmann::json ClassifierEval::to_json() const {
  return {{"confusion_train", opinion::to_json(train)},
          {"confusion_validation", opinion::to_json(validation)},
          {"confusion_test", opinion::to_json(test)},
          {"macro_accuracy_train", s_train},
          {"macro_accuracy_validation", s_validation},
          {"macro_accuracy_test", s_test},
          {"threshold_curve", opinion::to_json(curve)}};
}

ClassifierEval ClassifierEval::from_json(const nlohmann::json& j) {
  ClassifierEval e;
  e.train = confusion_from_json(j.at("confusion_train"));
  e.validation = confusion_from_json(j.at("confusion_validation"));
  e.test = confusion_from_json(j.at("confusion_test"));
  e.s_train = j.at("macro_accuracy_train").get<double>();
  e.s_validation = j.at("macro_accuracy_validation").get<double>();
  e.s_test = j.at("macro_accuracy_test").get<double>();
  e.curve = curve_from_json(j.at("threshold_curve"));
  return e;
}

nlohmann::json ScorerEval::to_json() const {
  return {{"confusion_train", opinion::to_json(train)},
          {"confusion_test", opinion::to_json(test)},
          {"macro_accuracy_train", s_train},
          {"macro_accuracy_test", s_test},
          {"skipped_courses", skipped_courses}};
}

ScorerEval ScorerEval::from_json(const nlohmann::json& j) {
  ScorerEval e;
  e.train = confusion_from_json(j.at("confusion_train"));
  e.test = confusion_from_json(j.at("confusion_test"));
  e.s_train = j.at("macro_accuracy_train").get<double>();
  e.s_test = j.at("macro_accuracy_test").get<double>();
  e.skipped_courses = j.at("skipped_courses").get<int64_t>();
  return e;
}

Report build_report(uint64_t seed, const ClassifierEval& polarity,
                    const std::optional<ScorerEval>& scorer,
                    const std::vector<TopicSummary>& summaries,
                    const std::map<int, std::string>& topic_names, const GroupTables& groups,
                    const ResponseRateTable& rates, ScoreField field,
                    std::map<std::string, std::string> bundles) {
  Report r;
  r.seed = seed;
  r.polarity = polarity;
  r.scorer = scorer;
  for (const auto& s : summaries) {
    r.topics.push_back({s.topic_id, topic_name(topic_names, s.topic_id), s.top_words,
                        s.representative_comments});
  }
  r.group_scores = groups.scores;
  r.group_rr = groups.response_rates;
  r.response_rates = rates;
  r.score_field = std::string(to_string(field));
  r.bundles = std::move(bundles);
  return r;
}

namespace {

nlohmann::json groups_json(const std::vector<GroupStats>& groups) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& g : groups) {
    arr.push_back({{"topic_id", g.topic_id},
                   {"polarity", to_string(g.polarity)},
                   {"count", g.count},
                   {"min", g.min},
                   {"q1", g.q1},
                   {"median", g.median},
                   {"q3", g.q3},
                   {"max", g.max},
                   {"mean", g.mean}});
  }
  return arr;
}

std::vector<GroupStats> groups_from_json(const nlohmann::json& j) {
  std::vector<GroupStats> out;
  for (const auto& e : j) {
    GroupStats g;
    g.topic_id = e.at("topic_id").get<int>();
    auto p = parse_polarity(e.at("polarity").get<std::string>());
    if (!p) throw Error("corrupt", "report: unknown polarity in group statistics");
    g.polarity = *p;
    g.count = e.at("count").get<int64_t>();
    g.min = e.at("min").get<double>();
    g.q1 = e.at("q1").get<double>();
    g.median = e.at("median").get<double>();
    g.q3 = e.at("q3").get<double>();
    g.max = e.at("max").get<double>();
    g.mean = e.at("mean").get<double>();
    out.push_back(g);
  }
  return out;
}

std::string topic_label(const std::vector<TopicEntry>& topics, int id) {
  for (const auto& t : topics) {
    if (t.topic_id == id) return t.name;
  }
  return "topic-" + std::to_string(id);
}

}  // namespace

nlohmann::json report_json(const Report& r) {
  nlohmann::json topics = nlohmann::json::array();
  for (const auto& t : r.topics) {
    topics.push_back({{"topic_id", t.topic_id},
                      {"name", t.name},
                      {"top_words", t.top_words},
                      {"representative_comments", t.representative_comments}});
  }
  nlohmann::json rates = nlohmann::json::array();
  for (const auto& x : r.response_rates.rates) {
    rates.push_back({{"subject_code", x.subject_code},
                     {"period", x.period},
                     {"num_students", x.num_students},
                     {"kept_comments", x.kept_comments},
                     {"rr", x.rr},
                     {"exceeds_one", x.exceeds_one}});
  }
  return {{"format", "opinion-report"},
          {"format_version", kReportFormatVersion},
          {"seed", r.seed},
          {"score_field", r.score_field},
          {"polarity", r.polarity.to_json()},
          {"scorer", r.scorer ? r.scorer->to_json() : nlohmann::json(nullptr)},
          {"topics", topics},
          {"group_scores", groups_json(r.group_scores)},
          {"group_rr", groups_json(r.group_rr)},
          {"response_rates", {{"rates", rates}, {"undefined", r.response_rates.undefined}}},
          {"bundles", r.bundles}};
}

Report report_from_json(const nlohmann::json& j) {
  try {
    if (j.value("format", "") != "opinion-report") throw Error("version", "not a report");
    if (j.at("format_version").get<int>() != kReportFormatVersion) {
      throw Error("version", "unsupported report format version");
    }
    Report r;
    r.seed = j.at("seed").get<uint64_t>();
    r.score_field = j.at("score_field").get<std::string>();
    r.polarity = ClassifierEval::from_json(j.at("polarity"));
    if (!j.at("scorer").is_null()) r.scorer = ScorerEval::from_json(j.at("scorer"));
    for (const auto& t : j.at("topics")) {
      r.topics.push_back(
          {t.at("topic_id").get<int>(), t.at("name").get<std::string>(),
           t.at("top_words").get<std::vector<std::pair<std::string, double>>>(),
           t.at("representative_comments").get<std::vector<std::pair<std::string, double>>>()});
    }
    r.group_scores = groups_from_json(j.at("group_scores"));
    r.group_rr = groups_from_json(j.at("group_rr"));
    for (const auto& x : j.at("response_rates").at("rates")) {
      ResponseRate rr;
      rr.subject_code = x.at("subject_code").get<std::string>();
      rr.period = x.at("period").get<std::string>();
      rr.num_students = x.at("num_students").get<int64_t>();
      rr.kept_comments = x.at("kept_comments").get<int64_t>();
      rr.rr = x.at("rr").get<double>();
      rr.exceeds_one = x.at("exceeds_one").get<bool>();
      r.response_rates.rates.push_back(std::move(rr));
    }
    r.response_rates.undefined =
        j.at("response_rates").at("undefined").get<std::vector<std::string>>();
    r.bundles = j.at("bundles").get<std::map<std::string, std::string>>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error("corrupt", std::string("malformed report: ") + e.what());
  }
}

std::string group_stats_csv(const std::vector<GroupStats>& groups,
                            const std::vector<TopicEntry>& topics) {
  csv::Writer w({"topic_id", "topic_name", "polarity", "count", "min", "q1", "median", "q3", "max",
                 "mean"});
  for (const auto& g : groups) {
    w.add({std::to_string(g.topic_id), topic_label(topics, g.topic_id),
           std::string(to_string(g.polarity)), std::to_string(g.count), format_double(g.min),
           format_double(g.q1), format_double(g.median), format_double(g.q3),
           format_double(g.max), format_double(g.mean)});
  }
  return w.str();
}

std::string response_rates_csv(const ResponseRateTable& table) {
  csv::Writer w({"subject_code", "period", "num_students", "kept_comments", "rr", "exceeds_one"});
  for (const auto& r : table.rates) {
    w.add({r.subject_code, r.period, std::to_string(r.num_students),
           std::to_string(r.kept_comments), format_double(r.rr), r.exceeds_one ? "1" : "0"});
  }
  return w.str();
}

std::string topics_csv(const std::vector<TopicEntry>& topics) {
  csv::Writer w({"topic_id", "name", "top_words", "representative_comments"});
  for (const auto& t : topics) {
    std::string words, docs;
    for (const auto& [word, p] : t.top_words) words += (words.empty() ? "" : " ") + word;
    for (const auto& [id, p] : t.representative_comments) docs += (docs.empty() ? "" : " ") + id;
    w.add({std::to_string(t.topic_id), t.name, words, docs});
  }
  return w.str();
}

void write_report(const std::filesystem::path& dir, const Report& report) {
  static const std::array<std::string, 3> kNames = {"positive", "neutral", "negative"};
  write_json(dir / "report", report_json(report));
  write_text(dir / "confusion_train.csv", confusion_csv(report.polarity.train, kNames));
  write_text(dir / "confusion_test.csv", confusion_csv(report.polarity.test, kNames));
  write_text(dir / "threshold_curve.csv", curve_csv(report.polarity.curve));
  write_text(dir / "topics.csv", topics_csv(report.topics));
  write_text(dir / "group_scores.csv", group_stats_csv(report.group_scores, report.topics));
  write_text(dir / "group_rr.csv", group_stats_csv(report.group_rr, report.topics));
  write_text(dir / "response_rates.csv", response_rates_csv(report.response_rates));
}

Report load_report(const std::filesystem::path& dir) {
  if (!std::filesystem::exists(dir / "report")) {
    throw Error("missing_artifact", "no report at " + dir.string() + " (run `opinion report`)");
  }
  return report_from_json(read_json(dir / "report"));
}

}  // namespace opinion
