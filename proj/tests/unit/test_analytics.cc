#include <algorithm>
#include <map>

#include "doctest.h"
#include "opinion/analytics.h"
#include "support.h"

using namespace opinion;

namespace {

CourseRecord course(std::string code, int64_t students, double score) {
  return {std::move(code), "2020-1", students, score, score, score, EducationLevel::undergraduate};
}

Comment comment(std::string id, std::string code) {
  return {std::move(id), std::move(code), "2020-1", "texto largo de prueba aquí", std::nullopt};
}

Report sample_report() {
  ClassifierEval ev;
  ev.train.cells = {{{8, 1, 1}, {2, 6, 2}, {0, 0, 10}}};
  ev.validation = ev.train;
  ev.test = ev.train;
  ev.s_train = ev.s_validation = ev.s_test = 0.8;
  ev.curve = {{0.0, 1.0, 0.8, 30, false}, {1.0, 0.0, 1.0, 0, true}};
  ScorerEval se;
  se.train.cells = {{{3, 0, 0}, {0, 2, 1}, {0, 0, 4}}};
  se.s_train = 0.9;
  se.s_test = 1.0 / 3.0;
  se.skipped_courses = 2;
  std::vector<TopicSummary> summaries = {{0, {{"clase", 0.4}}, {{"c1", 0.9}}},
                                         {1, {{"exam", 0.3}}, {}}};
  GroupTables groups;
  groups.scores.push_back(group_stats(0, Polarity::neutral, {4.0, 5.0}));
  groups.response_rates.push_back(group_stats(1, Polarity::negative, {0.25}));
  ResponseRateTable rates = response_rates({course("A", 10, 4.1), course("Z", 0, 4.0)},
                                           {comment("c1", "A")});
  return build_report(42, ev, se, summaries, {{1, "Evaluation"}}, groups, rates,
                      ScoreField::evaluation, {{"polarity", "abc"}, {"topics", "def"}});
}

}  // namespace

TEST_CASE("quartiles by linear interpolation") {
  auto g = group_stats(0, Polarity::positive, {5.0, 4.0});
  CHECK(g.median == 4.5);
  CHECK(g.q1 == 4.25);
  CHECK(g.q3 == 4.75);
  CHECK(g.min == 4.0);
  CHECK(g.max == 5.0);
  CHECK(g.count == 2);
  auto one = group_stats(1, Polarity::negative, {3.7});
  CHECK(one.min == 3.7);
  CHECK(one.q1 == 3.7);
  CHECK(one.median == 3.7);
  CHECK(one.q3 == 3.7);
  CHECK(one.max == 3.7);
  CHECK(quantile_sorted({1, 2, 3, 4}, 0.25) == 1.75);
  CHECK(testing::error_code_of([] { group_stats(0, Polarity::positive, {}); }) == "invalid_argument");
}

TEST_CASE("quartiles are ordered on random samples") {
  Rng rng(10);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> v(1 + rng.below(30));
    for (auto& x : v) x = 1.0 + 4.0 * rng.uniform();
    auto g = group_stats(0, Polarity::positive, v);
    CHECK(g.min <= g.q1);
    CHECK(g.q1 <= g.median);
    CHECK(g.median <= g.q3);
    CHECK(g.q3 <= g.max);
    CHECK(g.mean >= g.min);
    CHECK(g.mean <= g.max);
  }
}

TEST_CASE("response rate examples") {
  CHECK(response_rate(course("A", 10, 4), 4).rr == 0.4);
  CHECK(response_rate(course("A", 10, 4), 0).rr == 0.0);
  CHECK(response_rate(course("A", 5, 4), 5).rr == 1.0);
  auto over = response_rate(course("A", 2, 4), 3);
  CHECK(over.rr == 1.5);
  CHECK(over.exceeds_one);
  CHECK(testing::error_code_of([] { response_rate(course("A", 0, 4), 1); }) == "invalid_argument");
}

TEST_CASE("response rate table reports undefined courses") {
  auto t = response_rates({course("A", 4, 4), course("B", 0, 4), course("C", 3, 4)},
                          {comment("1", "A"), comment("2", "A"), comment("3", "B")});
  REQUIRE(t.rates.size() == 2);
  CHECK(t.rates[0].rr == 0.5);
  CHECK(t.rates[1].rr == 0.0);
  CHECK(t.undefined == std::vector<std::string>{course_key("B", "2020-1")});
}

TEST_CASE("groups partition the assigned comments") {
  std::vector<CourseRecord> courses = {course("A", 10, 4.6), course("B", 5, 3.9), course("C", 0, 4.2)};
  std::vector<CommentAssignment> assigned;
  Rng rng(3);
  const std::vector<std::string> codes = {"A", "B", "C"};
  for (int i = 0; i < 200; ++i) {
    CommentAssignment a;
    a.comment_id = std::to_string(i);
    a.course = course_key(codes[rng.below(3)], "2020-1");
    a.topic_id = static_cast<int>(rng.below(4));
    a.polarity = kPolarities[rng.below(3)];
    assigned.push_back(a);
  }
  std::vector<Comment> kept;
  for (const auto& a : assigned) kept.push_back(comment(a.comment_id, a.course.substr(0, 1)));
  auto rates = response_rates(courses, kept);
  auto g = group_by_topic_polarity(assigned, courses, rates, ScoreField::evaluation);
  int64_t total = 0;
  for (const auto& s : g.scores) total += s.count;
  CHECK(total == 200);
  std::map<std::pair<int, int>, int64_t> expected;
  for (const auto& a : assigned) ++expected[{a.topic_id, static_cast<int>(a.polarity)}];
  CHECK(g.scores.size() == expected.size());
  for (const auto& s : g.scores) CHECK(s.count == expected[{s.topic_id, static_cast<int>(s.polarity)}]);
  // Course C has no enrolled students, so its comments are not in the rate table.
  int64_t with_rate = 0;
  for (const auto& a : assigned) with_rate += a.course != course_key("C", "2020-1");
  int64_t rr_total = 0;
  for (const auto& s : g.response_rates) rr_total += s.count;
  CHECK(rr_total == with_rate);
  CHECK(std::is_sorted(g.scores.begin(), g.scores.end(), [](const auto& a, const auto& b) {
    return std::pair(a.topic_id, a.polarity) < std::pair(b.topic_id, b.polarity);
  }));
}

TEST_CASE("single-comment group equals its course score") {
  std::vector<CourseRecord> courses = {course("A", 10, 4.35)};
  std::vector<CommentAssignment> assigned = {{"1", course_key("A", "2020-1"), 2, Polarity::neutral}};
  auto rates = response_rates(courses, {comment("1", "A")});
  auto g = group_by_topic_polarity(assigned, courses, rates, ScoreField::evaluation);
  REQUIRE(g.scores.size() == 1);
  CHECK(g.scores[0].min == 4.35);
  CHECK(g.scores[0].max == 4.35);
  CHECK(g.response_rates[0].median == 0.1);
}

TEST_CASE("report round-trips losslessly") {
  auto r = sample_report();
  CHECK(report_from_json(report_json(r)) == r);
  testing::TempDir dir;
  write_report(dir / "rep", r);
  CHECK(load_report(dir / "rep") == r);
  for (const char* f : {"report", "confusion_train.csv", "confusion_test.csv", "threshold_curve.csv",
                        "topics.csv", "group_scores.csv", "group_rr.csv", "response_rates.csv"}) {
    CHECK(std::filesystem::exists(dir / "rep" / f));
  }
  CHECK(r.bundles.at("polarity") == "abc");
}

TEST_CASE("topic names default when no overlay row exists") {
  auto r = sample_report();
  REQUIRE(r.topics.size() == 2);
  CHECK(r.topics[0].name == "topic-0");
  CHECK(r.topics[1].name == "Evaluation");
}

TEST_CASE("missing report names the command that builds it") {
  testing::TempDir dir;
  auto msg = testing::error_message_of([&] { load_report(dir / "nothing"); });
  CHECK(testing::error_code_of([&] { load_report(dir / "nothing"); }) == "missing_artifact");
  CHECK(msg.find("opinion report") != std::string::npos);
}

TEST_CASE("CSV sidecars carry headers and rows") {
  auto r = sample_report();
  auto gs = group_stats_csv(r.group_scores, r.topics);
  CHECK(gs.find("neutral") != std::string::npos);
  auto rr = response_rates_csv(r.response_rates);
  CHECK(rr.find("0.1") != std::string::npos);
  auto tc = topics_csv(r.topics);
  CHECK(tc.find("Evaluation") != std::string::npos);
}
