#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "doctest.h"
#include "opinion/tuner.h"
#include "support.h"

using namespace opinion;

namespace {

SearchSpace unit_interval() { return SearchSpace{{Dimension::uniform("x", 0.0, 1.0)}}; }

double quadratic(const Assignment& a, uint64_t) {
  const double x = a.real("x");
  return (x - 0.3) * (x - 0.3);
}

SearchConfig config_for(uint64_t seed, bool random_only = false) {
  SearchConfig c;
  c.master_seed = seed;
  c.tpe.random_only = random_only;
  return c;
}

}  // namespace

TEST_CASE("objective examples") {
  CHECK(objective_fn(0.8, 0.8) == -0.8);
  CHECK(std::abs(objective_fn(0.9, 0.7, 0.2) - (-0.7 + 0.2 / 0.3)) <= 1e-12);
  CHECK(std::abs(objective_fn(0.9, 0.7, 0.2) - (-1.0 / 30.0)) <= 1e-12);
  CHECK(objective_fn(1.0, 1.0) == -1.0);
  CHECK(testing::error_code_of([] { objective_fn(0.5, 0.5, 0.0); }) == "invalid_argument");
  CHECK(testing::error_code_of([] { objective_fn(1.2, 0.5); }) == "invalid_argument");
}

TEST_CASE("objective attains its minimum at a perfect score") {
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    CHECK(objective_fn(rng.uniform(), rng.uniform()) >= -1.0);
  }
}

TEST_CASE("space validation") {
  CHECK(testing::error_code_of([] { SearchSpace{{Dimension::uniform("x", 1.0, 1.0)}}.validate(); }) ==
        "invalid_argument");
  CHECK(testing::error_code_of([] { SearchSpace{{Dimension::categorical("c", {})}}.validate(); }) ==
        "invalid_argument");
  CHECK(testing::error_code_of([] {
          SearchSpace{{Dimension::uniform("x", 0, 1), Dimension::uniform("x", 0, 2)}}.validate();
        }) == "invalid_argument");
  auto s = default_polarity_space();
  CHECK(SearchSpace::from_json(s.to_json()) == s);
}

TEST_CASE("samples stay inside their dimensions") {
  SearchSpace s{{Dimension::uniform("u", -1, 2), Dimension::log_uniform("l", 0.01, 1.0),
                 Dimension::integer("i", 5, 9), Dimension::categorical("c", {"a", "b", "c"})}};
  Rng rng(1);
  for (int i = 0; i < 500; ++i) {
    auto a = sample_random(s, rng);
    CHECK(a.real("u") >= -1);
    CHECK(a.real("u") < 2);
    CHECK(a.real("l") >= 0.01);
    CHECK(a.real("l") <= 1.0);
    CHECK(a.integer("i") >= 5);
    CHECK(a.integer("i") <= 9);
    CHECK(std::set<std::string>{"a", "b", "c"}.count(a.choice("c")) == 1);
  }
}

TEST_CASE("budget one returns the single trial") {
  auto r = minimize(unit_interval(), 1, quadratic, config_for(5));
  REQUIRE(r.history.size() == 1);
  CHECK(r.best.objective == r.history[0].objective);
  CHECK(testing::error_code_of([] { minimize(unit_interval(), 0, quadratic, config_for(5)); }) ==
        "invalid_argument");
}

TEST_CASE("both categorical choices are explored") {
  SearchSpace s{{Dimension::categorical("c", {"left", "right"})}};
  auto r = minimize(s, 20, [](const Assignment& a, uint64_t) { return a.choice("c") == "left" ? 1.0 : 0.0; },
                    config_for(9));
  std::set<std::string> seen;
  for (const auto& t : r.history) seen.insert(t.params.choice("c"));
  CHECK(seen.size() == 2);
  CHECK(r.best.params.choice("c") == "right");
}

TEST_CASE("best is the minimum of the history and objectives recompute") {
  auto space = default_polarity_space();
  TrialEvaluator fake = [](const Assignment& a, uint64_t seed) {
    Rng rng(seed);
    const double lr = a.real("learning_rate");
    TrialScores s;
    s.s_train = std::min(1.0, 0.6 + 0.3 * lr + 0.05 * rng.uniform());
    s.s_validation = std::min(1.0, 0.55 + 0.2 * lr + 0.05 * rng.uniform());
    return s;
  };
  auto r = run_search(space, 25, fake, config_for(11));
  REQUIRE(r.history.size() == 25);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& t : r.history) {
    best = std::min(best, t.objective);
    CHECK(t.objective == objective_fn(t.s_train, t.s_validation, 0.2));
  }
  CHECK(r.best.objective == best);
  for (std::size_t i = 0; i < r.history.size(); ++i) CHECK(r.history[i].index == i);
}

TEST_CASE("failed trials score infinity without aborting") {
  auto r = run_search(unit_interval(), 12,
                      [](const Assignment& a, uint64_t) -> TrialScores {
                        if (a.real("x") < 0.5) throw Error("training", "degenerate corner");
                        return {0.9, 0.8};
                      },
                      config_for(2));
  REQUIRE(r.history.size() == 12);
  int failed = 0;
  for (const auto& t : r.history) {
    if (t.failed) {
      ++failed;
      CHECK(std::isinf(t.objective));
      CHECK(t.error.find("degenerate") != std::string::npos);
    }
  }
  CHECK(failed > 0);
  CHECK_FALSE(r.best.failed);
}

TEST_CASE("fixed master seed gives an identical history") {
  auto a = minimize(unit_interval(), 30, quadratic, config_for(77));
  auto b = minimize(unit_interval(), 30, quadratic, config_for(77));
  REQUIRE(a.history.size() == b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    CHECK(a.history[i].params == b.history[i].params);
    CHECK(a.history[i].seed == b.history[i].seed);
  }
  auto c = minimize(unit_interval(), 30, quadratic, config_for(78));
  CHECK_FALSE(c.history[0].params == a.history[0].params);
}

TEST_CASE("parallel batches are deterministic for a fixed job count") {
  SearchConfig cfg = config_for(4);
  cfg.tpe.jobs = 3;
  auto a = minimize(unit_interval(), 20, quadratic, cfg);
  auto b = minimize(unit_interval(), 20, quadratic, cfg);
  for (std::size_t i = 0; i < a.history.size(); ++i) CHECK(a.history[i].params == b.history[i].params);
}

TEST_CASE("TPE beats the median random search on a quadratic") {
  int wins = 0;
  for (uint64_t seed = 1; seed <= 20; ++seed) {
    const double tpe = minimize(unit_interval(), 50, quadratic, config_for(seed)).best.objective;
    std::vector<double> random_bests;
    for (uint64_t r = 0; r < 20; ++r) {
      auto cfg = config_for(derive_seed(seed, "random-" + std::to_string(r)), true);
      random_bests.push_back(minimize(unit_interval(), 50, quadratic, cfg).best.objective);
    }
    std::sort(random_bests.begin(), random_bests.end());
    const double median = (random_bests[9] + random_bests[10]) / 2.0;
    wins += tpe <= median;
  }
  CHECK(wins >= 16);
}

TEST_CASE("TPE proposals concentrate near good trials") {
  std::vector<Trial> history;
  for (int i = 0; i < 40; ++i) {
    Trial t;
    t.index = i;
    const double x = (i + 0.5) / 40.0;
    t.params.set("x", x);
    t.objective = (x - 0.8) * (x - 0.8);
    history.push_back(t);
  }
  Rng rng(6);
  int near = 0;
  for (int i = 0; i < 100; ++i) {
    near += std::abs(propose_tpe(unit_interval(), history, TpeOptions{}, rng).real("x") - 0.8) < 0.2;
  }
  CHECK(near > 70);
}

TEST_CASE("search report round-trips and warm-starts") {
  testing::TempDir dir;
  auto space = default_polarity_space();
  TrialEvaluator fake = [](const Assignment& a, uint64_t) {
    return TrialScores{0.9, 0.8 + 0.01 * static_cast<double>(a.integer("min_count"))};
  };
  SearchConfig cfg = config_for(13);
  auto r = run_search(space, 12, fake, cfg);
  save_search_report(dir / "s.json", space, r, cfg);
  auto back = load_search_report(dir / "s.json");
  CHECK(back.space == space);
  REQUIRE(back.trials.size() == 12);
  for (std::size_t i = 0; i < 12; ++i) {
    CHECK(back.trials[i].params == r.history[i].params);
    CHECK(back.trials[i].objective == r.history[i].objective);
    CHECK(back.trials[i].s_train == r.history[i].s_train);
  }
  CHECK(back.best.params == r.best.params);
  CHECK(back.master_seed == 13);

  // Rewriting the same result gives the same bytes (durations live elsewhere).
  save_search_report(dir / "t.json", space, r, cfg);
  CHECK(read_text(dir / "s.json") == read_text(dir / "t.json"));

  SearchConfig warm = cfg;
  warm.warm_start = back.trials;
  auto r2 = run_search(space, 5, fake, warm);
  std::size_t fresh = 0;
  for (const auto& t : r2.history) fresh += !t.warm_start;
  CHECK(fresh == 5);
  CHECK(r2.best.objective <= r.best.objective);
}

TEST_CASE("failed trial objective is stored as null") {
  testing::TempDir dir;
  auto r = run_search(unit_interval(), 2,
                      [](const Assignment&, uint64_t) -> TrialScores { throw Error("training", "x"); },
                      config_for(1));
  save_search_report(dir / "f.json", unit_interval(), r, config_for(1));
  auto j = read_json(dir / "f.json");
  CHECK(j["trials"][0]["objective"].is_null());
  auto back = load_search_report(dir / "f.json");
  CHECK(std::isinf(back.trials[0].objective));
}

TEST_CASE("polarity parameters map onto hyperparameters") {
  Assignment a;
  a.set("learning_rate", 0.3);
  a.set("epochs", int64_t{40});
  a.set("word_ngrams", std::string("2"));
  a.set("char_ngrams", std::string("0-0"));
  a.set("min_count", int64_t{3});
  auto hp = apply_polarity_params(PolarityHyperparams{}, a);
  CHECK(hp.learning_rate == 0.3);
  CHECK(hp.epochs == 40);
  CHECK(hp.word_ngrams == 2);
  CHECK(hp.minn == 0);
  CHECK(hp.maxn == 0);
  CHECK(hp.min_count == 3);
  CHECK(hp.dim == 20);
}
