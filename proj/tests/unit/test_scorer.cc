#include <cmath>

#include "fixtures.h"
#include "doctest.h"
#include "opinion/metrics.h"
#include "opinion/scorer.h"
#include "support.h"

using namespace opinion;

namespace {

// Three axis-separable clusters in two features.
void separable(std::vector<std::vector<double>>& x, std::vector<ScoreBucket>& y) {
  Rng rng(5);
  for (int i = 0; i < 60; ++i) {
    const int b = i % 3;
    x.push_back({b * 2.0 + rng.uniform(), rng.uniform() * 10.0});
    y.push_back(static_cast<ScoreBucket>(b));
  }
}

double accuracy_present(const GbtModel& m, const std::vector<std::vector<double>>& x,
                        const std::vector<ScoreBucket>& y) {
  std::vector<int> t, p;
  for (std::size_t i = 0; i < x.size(); ++i) {
    t.push_back(static_cast<int>(y[i]));
    p.push_back(static_cast<int>(m.predict(x[i]).bucket));
  }
  return macro_accuracy_present(confusion(t, p));
}

}  // namespace

TEST_CASE("bucketize boundaries") {
  CHECK(bucketize(4.7) == ScoreBucket::very_high);
  CHECK(bucketize(4.2) == ScoreBucket::high);
  CHECK(bucketize(3.5) == ScoreBucket::moderate);
  CHECK(bucketize(4.5) == ScoreBucket::very_high);
  CHECK(bucketize(4.0) == ScoreBucket::high);
  CHECK(bucketize(3.999) == ScoreBucket::moderate);
  CHECK(bucketize(5.0) == ScoreBucket::very_high);
  CHECK(bucketize(1.0) == ScoreBucket::moderate);
  CHECK(testing::error_code_of([] { bucketize(0.99); }) == "invalid_argument");
  CHECK(testing::error_code_of([] { bucketize(5.01); }) == "invalid_argument");
}

TEST_CASE("bucketize partitions the score range") {
  for (int i = 100; i <= 500; ++i) {
    const double s = i / 100.0;
    const auto b = bucketize(s);
    const int hits = (s >= 4.5) + (s >= 4.0 && s < 4.5) + (s < 4.0);
    CHECK(hits == 1);
    CHECK((b == ScoreBucket::very_high) == (s >= 4.5));
    CHECK((b == ScoreBucket::moderate) == (s < 4.0));
  }
}

TEST_CASE("score field selection") {
  CourseRecord c{"S", "P", 10, 3.1, 4.2, 4.9, EducationLevel::undergraduate};
  CHECK(course_score(c, ScoreField::pedagogy) == 3.1);
  CHECK(course_score(c, ScoreField::evaluation) == 4.2);
  CHECK(course_score(c, ScoreField::interpersonal) == 4.9);
  CHECK(parse_score_field("interpersonal") == ScoreField::interpersonal);
  CHECK(testing::error_code_of([] { parse_score_field("overall"); }) == "invalid_argument");
}

TEST_CASE("separable clusters are fitted perfectly") {
  std::vector<std::vector<double>> x;
  std::vector<ScoreBucket> y;
  separable(x, y);
  GbtParams p;
  p.rounds = 20;
  p.max_depth = 1;
  auto m = train_gbt(x, y, p);
  CHECK(accuracy_present(m, x, y) == 1.0);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(m.predict(x[i]).bucket == y[i]);
}

TEST_CASE("training log-loss is non-increasing per round") {
  std::vector<std::vector<double>> x;
  std::vector<ScoreBucket> y;
  separable(x, y);
  Rng rng(2);
  for (auto& b : y) {
    if (rng.uniform() < 0.2) b = static_cast<ScoreBucket>(rng.below(3));
  }
  auto m = train_gbt(x, y, GbtParams{});
  const auto& loss = m.training_loss();
  REQUIRE(loss.size() == 101);
  CHECK(loss.front() == doctest::Approx(mean_log_loss(train_gbt(x, y, GbtParams{0}), x, y)));
  for (std::size_t i = 1; i < loss.size(); ++i) CHECK(loss[i] <= loss[i - 1] + 1e-9);
  CHECK(loss.back() == doctest::Approx(mean_log_loss(m, x, y)));
}

TEST_CASE("zero rounds predicts the uniform prior") {
  std::vector<std::vector<double>> x;
  std::vector<ScoreBucket> y;
  separable(x, y);
  GbtParams p;
  p.rounds = 0;
  auto m = train_gbt(x, y, p);
  for (const auto& row : x) {
    for (double v : m.predict(row).probabilities) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  }
}

TEST_CASE("identical rows get identical predictions and probabilities sum to one") {
  std::vector<std::vector<double>> x;
  std::vector<ScoreBucket> y;
  separable(x, y);
  x.push_back(x[4]);
  y.push_back(y[4]);
  auto m = train_gbt(x, y, GbtParams{});
  CHECK(m.predict(x[4]).probabilities == m.predict(x.back()).probabilities);
  for (const auto& row : x) {
    auto p = m.predict(row).probabilities;
    CHECK(std::abs(p[0] + p[1] + p[2] - 1.0) < 1e-9);
  }
}

TEST_CASE("every split indexes a real feature") {
  std::vector<std::vector<double>> x;
  std::vector<ScoreBucket> y;
  separable(x, y);
  auto m = train_gbt(x, y, GbtParams{});
  for (int r = 0; r < m.rounds(); ++r) {
    for (int c = 0; c < 3; ++c) {
      for (int32_t f : m.tree(r, c).feature) CHECK(f < m.num_features());
    }
  }
}

TEST_CASE("training errors and dimension checks") {
  std::vector<std::vector<double>> x = {{1.0}, {2.0}};
  std::vector<ScoreBucket> same = {ScoreBucket::high, ScoreBucket::high};
  CHECK(testing::error_code_of([&] { train_gbt(x, same, GbtParams{}); }) == "training");
  auto m = train_gbt(x, {ScoreBucket::high, ScoreBucket::moderate}, GbtParams{});
  std::vector<double> wrong = {1.0, 2.0};
  CHECK(testing::error_code_of([&] { m.predict(wrong); }) == "invalid_argument");
}

TEST_CASE("GBT bundle round-trips") {
  testing::TempDir dir;
  std::vector<std::vector<double>> x;
  std::vector<ScoreBucket> y;
  separable(x, y);
  auto m = train_gbt(x, y, GbtParams{}, {"a", "b"});
  m.save(dir / "g");
  auto back = GbtModel::load(dir / "g");
  CHECK(back == m);
  for (const auto& row : x) CHECK(back.predict(row).probabilities == m.predict(row).probabilities);
  CHECK(testing::error_code_of([&] { GbtModel::load(dir / "none"); }) == "missing_artifact");
  CHECK(GbtParams::from_json(m.params().to_json()) == m.params());
}

TEST_CASE("features are means over a course's comments") {
  PolarityHyperparams hp;
  hp.epochs = 3;
  std::vector<LabeledDoc> train = {
      {{"a", {"excel"}}, Polarity::positive}, {{"b", {"regul"}}, Polarity::neutral},
      {{"c", {"pesim"}}, Polarity::negative}, {{"d", {"clar"}}, Polarity::positive}};
  auto prep = default_preprocess_config();
  auto pol = train_polarity(train, hp, prep);
  LdaParams lp;
  lp.k = 2;
  lp.iterations = 5;
  std::vector<Comment> comments = {{"c1", "A", "P", "excelente clase clara", std::nullopt},
                                   {"c2", "B", "P", "pesimo curso regular", std::nullopt},
                                   {"c3", "B", "P", "clase regular siempre", std::nullopt}};
  auto topics = fit_lda(preprocess_all(comments, prep), lp);
  std::vector<CourseRecord> courses = {{"A", "P", 5, 4, 4, 4, EducationLevel::undergraduate},
                                       {"B", "P", 5, 4, 4, 4, EducationLevel::undergraduate},
                                       {"Z", "P", 5, 4, 4, 4, EducationLevel::undergraduate}};
  auto fs = build_features(courses, comments, pol, topics);
  REQUIRE(fs.features.size() == 2);
  CHECK(fs.skipped == std::vector<std::string>{course_key("Z", "P")});

  CHECK(fs.features[0].n_comments == 1);
  CHECK(fs.features[0].embedding == pol.embed(preprocess(comments[0], prep)));

  auto e2 = pol.embed(preprocess(comments[1], prep)), e3 = pol.embed(preprocess(comments[2], prep));
  auto t2 = topics.doc_topics(preprocess(comments[1], prep));
  auto t3 = topics.doc_topics(preprocess(comments[2], prep));
  for (int j = 0; j < pol.dim(); ++j) {
    CHECK(fs.features[1].embedding[j] == doctest::Approx((e2[j] + e3[j]) / 2));
  }
  double total = 0.0;
  for (int t = 0; t < 2; ++t) {
    CHECK(fs.features[1].topic_probs[t] == doctest::Approx((t2[t] + t3[t]) / 2));
    total += fs.features[1].topic_probs[t];
  }
  CHECK(std::abs(total - 1.0) < 1e-6);

  // Comment order does not matter.
  std::vector<Comment> reversed(comments.rbegin(), comments.rend());
  auto fs2 = build_features(courses, reversed, pol, topics);
  for (int j = 0; j < pol.dim(); ++j) {
    CHECK(fs2.features[1].embedding[j] == doctest::Approx(fs.features[1].embedding[j]));
  }
  CHECK(fs.features[1].vector().size() == static_cast<std::size_t>(pol.dim() + 2));
  CHECK(feature_names(2, 1) == std::vector<std::string>{"emb_0", "emb_1", "topic_0"});
}

TEST_CASE("search space and parameter mapping") {
  auto s = default_gbt_space();
  s.validate();
  Assignment a;
  a.set("rounds", int64_t{30});
  a.set("max_depth", int64_t{2});
  a.set("learning_rate", 0.05);
  a.set("lambda", 2.0);
  auto p = apply_gbt_params(GbtParams{}, a);
  CHECK(p.rounds == 30);
  CHECK(p.max_depth == 2);
  CHECK(p.learning_rate == 0.05);
  CHECK(p.lambda == 2.0);
}
