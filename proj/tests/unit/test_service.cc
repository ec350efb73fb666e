#include <algorithm>
#include <set>

#include "doctest.h"
#include "opinion/analytics.h"
#include "opinion/csv.h"
#include "service_harness.h"
#include "support.h"

using namespace opinion;
using nlohmann::json;

namespace {

json get_json(httplib::Client& c, const std::string& path, int expected = 200) {
  auto res = c.Get(path);
  REQUIRE(res);
  CHECK(res->status == expected);
  return json::parse(res->body);
}

int post_label(httplib::Client& c, const std::string& id, const std::string& polarity) {
  json body = {{"comment_id", id}, {"polarity", polarity}};
  auto res = c.Post("/api/labels", body.dump(), "application/json");
  REQUIRE(res);
  return res->status;
}

}  // namespace

TEST_CASE("health reports ok") {
  testing::TempDir dir;
  fixtures::ServiceHarness h(dir.path());
  auto c = h.client();
  auto j = get_json(c, "/api/health");
  CHECK(j["status"] == "ok");
  CHECK(j["comments"] == h.comments().size());
}

TEST_CASE("queue is ascending by confidence and bounded by threshold and limit") {
  testing::TempDir dir;
  fixtures::ServiceHarness h(dir.path());
  auto c = h.client();
  auto j = get_json(c, "/api/queue?threshold=1.0&limit=1000");
  const auto& items = j["items"];
  CHECK(items.size() == h.comments().size());
  CHECK(j["total_pending"] == h.comments().size());
  for (std::size_t i = 1; i < items.size(); ++i) {
    CHECK(items[i]["confidence"].get<double>() >= items[i - 1]["confidence"].get<double>());
  }
  const double mid = items[items.size() / 2]["confidence"].get<double>();
  auto low = get_json(c, "/api/queue?threshold=" + std::to_string(mid) + "&limit=1000");
  for (const auto& it : low["items"]) CHECK(it["confidence"].get<double>() <= mid);
  CHECK(low["items"].size() < items.size());
  CHECK(low["items"].size() > 0);
  CHECK(get_json(c, "/api/queue?threshold=1.0&limit=0")["items"].empty());
  CHECK(get_json(c, "/api/queue?threshold=1.0&limit=3")["items"].size() == 3);
}

TEST_CASE("a threshold just above one third leaves a small queue") {
  testing::TempDir dir;
  fixtures::ServiceHarness h(dir.path());
  auto c = h.client();
  const double t = 0.34;
  std::size_t offline = 0;
  for (const auto& cm : h.comments()) offline += h.polarity().predict(cm.text).confidence <= t;
  auto j = get_json(c, "/api/queue?threshold=0.34&limit=1000");
  CHECK(j["items"].size() == offline);
  CHECK(j["total_pending"] == offline);
  CHECK(offline * 10 < h.comments().size());
}

TEST_CASE("queue rejects bad parameters") {
  testing::TempDir dir;
  fixtures::ServiceHarness h(dir.path());
  auto c = h.client();
  for (const char* q : {"threshold=0", "threshold=1.5", "threshold=-1", "threshold=abc", "limit=-2",
                        "limit=1.5"}) {
    auto j = get_json(c, std::string("/api/queue?") + q, 400);
    CHECK(j.contains("code"));
    CHECK(j.contains("message"));
  }
}

TEST_CASE("labeling removes the item from the queue and is replayed after restart") {
  testing::TempDir dir;
  fixtures::ServiceHarness h(dir.path());
  auto c = h.client();
  auto before = get_json(c, "/api/queue?threshold=1.0&limit=1000")["items"];
  const std::string first = before[0]["comment_id"];
  const std::string second = before[1]["comment_id"];
  CHECK(post_label(c, first, "negative") == 200);
  CHECK(post_label(c, second, "neutral") == 200);
  auto after = get_json(c, "/api/queue?threshold=1.0&limit=1000")["items"];
  CHECK(after.size() == before.size() - 2);
  for (const auto& it : after) {
    CHECK(it["comment_id"] != first);
    CHECK(it["comment_id"] != second);
  }
  auto item = get_json(c, "/api/comments/" + first);
  CHECK(item["status"] == "reviewed");
  CHECK(item["human_label"] == "negative");

  h.restart();
  auto c2 = h.client();
  auto replayed = get_json(c2, "/api/queue?threshold=1.0&limit=1000")["items"];
  CHECK(replayed == after);
  CHECK(get_json(c2, "/api/comments/" + second)["human_label"] == "neutral");
}

TEST_CASE("relabeling keeps the latest entry and export has one row per comment") {
  testing::TempDir dir;
  fixtures::ServiceHarness h(dir.path());
  auto c = h.client();
  const std::string a = h.comments()[0].id, b = h.comments()[1].id;
  CHECK(post_label(c, a, "positive") == 200);
  CHECK(post_label(c, b, "neutral") == 200);
  CHECK(post_label(c, a, "negative") == 200);
  auto res = c.Get("/api/export/labels");
  REQUIRE(res);
  CHECK(res->status == 200);
  auto rows = csv::parse(res->body);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].fields == std::vector<std::string>{"comment_id", "polarity"});
  std::map<std::string, std::string> got;
  for (std::size_t i = 1; i < rows.size(); ++i) got[rows[i].fields[0]] = rows[i].fields[1];
  CHECK(got[a] == "negative");
  CHECK(got[b] == "neutral");
  CHECK(h.service().labels().size() == 2);
}

TEST_CASE("label errors: unknown id, bad polarity, bad body") {
  testing::TempDir dir;
  fixtures::ServiceHarness h(dir.path());
  auto c = h.client();
  CHECK(post_label(c, "no-such-comment", "positive") == 404);
  CHECK(post_label(c, h.comments()[0].id, "happy") == 400);
  auto res = c.Post("/api/labels", "{not json", "application/json");
  REQUIRE(res);
  CHECK(res->status == 400);
  CHECK(get_json(c, "/api/comments/no-such-comment", 404)["code"] == "not_found");
  CHECK(h.service().labels().size() == 0);
}

TEST_CASE("stats is 409 before the report and a pass-through after") {
  testing::TempDir dir;
  fixtures::ServiceHarness h(dir.path());
  auto c = h.client();
  auto missing = get_json(c, "/api/stats", 409);
  CHECK(missing["code"] == "report_missing");
  CHECK(missing["message"].get<std::string>().find("opinion report") != std::string::npos);

  ClassifierEval ev;
  ev.train.cells = {{{5, 0, 0}, {0, 5, 0}, {0, 0, 5}}};
  ev.validation = ev.test = ev.train;
  ev.curve = {{0.0, 1.0, 1.0, 15, false}, {0.5, 0.6, 1.0, 9, false}, {1.0, 0.0, 1.0, 0, true}};
  Report r = build_report(1, ev, std::nullopt, {}, {}, {}, {}, ScoreField::evaluation, {});
  write_report(h.report_dir(), r);
  auto res = c.Get("/api/stats");
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(res->body == read_text(h.report_dir() / "report"));
  auto stats = report_from_json(json::parse(res->body));
  CHECK(stats == r);
  for (std::size_t i = 1; i < stats.polarity.curve.size(); ++i) {
    CHECK(stats.polarity.curve[i].coverage <= stats.polarity.curve[i - 1].coverage);
  }
}

TEST_CASE("queue, reviewed and confident items partition the comments") {
  testing::TempDir dir;
  fixtures::ServiceHarness h(dir.path());
  auto& svc = h.service();
  for (std::size_t i = 0; i < 10; ++i) svc.label(h.comments()[i * 7].id, Polarity::neutral, "t");
  for (double t : {0.4, 0.55, 0.7, 0.9, 1.0}) {
    auto q = svc.queue(t, 100000);
    std::set<std::string> queued;
    for (const auto& it : q) queued.insert(it.comment_id);
    std::size_t reviewed = 0, confident = 0;
    for (const auto& c : h.comments()) {
      auto it = svc.item(c.id);
      REQUIRE(it);
      const bool in_q = queued.count(c.id) > 0;
      const bool is_conf = !it->reviewed && it->confidence > t;
      CHECK(int(in_q) + int(it->reviewed) + int(is_conf) == 1);
      reviewed += it->reviewed;
      confident += is_conf;
    }
    CHECK(queued.size() + reviewed + confident == h.comments().size());
    CHECK(svc.pending_count(t) == queued.size());
  }
}

TEST_CASE("label store replay and corruption") {
  testing::TempDir dir;
  {
    LabelStore s(dir / "log");
    s.append({"a", Polarity::positive, "t1", "r"});
    s.append({"b", Polarity::neutral, "t2", "r"});
    s.append({"a", Polarity::negative, "t3", "r"});
  }
  LabelStore s(dir / "log");
  CHECK(s.size() == 2);
  CHECK(s.latest("a")->polarity == Polarity::negative);
  CHECK(s.export_rows() == std::vector<LabelRow>{{"a", Polarity::negative}, {"b", Polarity::neutral}});
  dir.write("bad", "{\"comment_id\": \"a\"}\nnot json\n");
  CHECK(testing::error_code_of([&] { LabelStore bad(dir / "bad"); }) == "corrupt");
}
