#include "opinion/service.h"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <ctime>

#include "httplib.h"
#include "opinion/csv.h"
#include "opinion/io.h"

namespace opinion {

nlohmann::json LabelEntry::to_json() const {
  return {{"comment_id", comment_id},
          {"polarity", to_string(polarity)},
          {"timestamp", timestamp},
          {"reviewer", reviewer}};
}

LabelEntry LabelEntry::from_json(const nlohmann::json& j) {
  LabelEntry e;
  e.comment_id = j.at("comment_id").get<std::string>();
  auto p = parse_polarity(j.at("polarity").get<std::string>());
  if (!p) throw Error("corrupt", "label log: unknown polarity");
  e.polarity = *p;
  e.timestamp = j.value("timestamp", "");
  e.reviewer = j.value("reviewer", "");
  return e;
}

LabelStore::LabelStore(std::filesystem::path log) : path_(std::move(log)) {
  if (std::filesystem::exists(path_)) {
    const std::string text = read_text(path_);
    std::size_t pos = 0, line = 0;
    while (pos < text.size()) {
      std::size_t end = text.find('\n', pos);
      if (end == std::string::npos) end = text.size();
      ++line;
      std::string_view row(text.data() + pos, end - pos);
      pos = end + 1;
      if (row.empty()) continue;
      try {
        LabelEntry e = LabelEntry::from_json(nlohmann::json::parse(row));
        latest_[e.comment_id] = std::move(e);
      } catch (const nlohmann::json::exception& ex) {
        throw Error("corrupt", path_.string() + ": line " + std::to_string(line) + ": " + ex.what());
      }
    }
  }
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  out_.open(path_, std::ios::binary | std::ios::app);
  if (!out_) throw Error("io", "cannot open label log " + path_.string());
}

void LabelStore::append(const LabelEntry& entry) {
  std::lock_guard lock(mu_);
  out_ << entry.to_json().dump() << '\n';
  out_.flush();
  if (!out_) throw Error("io", "failed to append to label log " + path_.string());
  latest_[entry.comment_id] = entry;
}

std::optional<LabelEntry> LabelStore::latest(const std::string& comment_id) const {
  std::lock_guard lock(mu_);
  auto it = latest_.find(comment_id);
  if (it == latest_.end()) return std::nullopt;
  return it->second;
}

std::map<std::string, LabelEntry> LabelStore::snapshot() const {
  std::lock_guard lock(mu_);
  return latest_;
}

std::size_t LabelStore::size() const {
  std::lock_guard lock(mu_);
  return latest_.size();
}

std::vector<LabelRow> LabelStore::export_rows() const {
  std::lock_guard lock(mu_);
  std::vector<LabelRow> rows;
  for (const auto& [id, e] : latest_) rows.push_back({id, e.polarity});
  return rows;
}

void LabelStore::flush() {
  std::lock_guard lock(mu_);
  out_.flush();
}

nlohmann::json TriageItem::to_json() const {
  return {{"comment_id", comment_id},
          {"text", text},
          {"predicted", to_string(predicted)},
          {"confidence", confidence},
          {"probabilities",
           {{"positive", probabilities[0]},
            {"neutral", probabilities[1]},
            {"negative", probabilities[2]}}},
          {"topic_id", topic_id},
          {"status", reviewed ? "reviewed" : "pending"},
          {"human_label", human ? nlohmann::json(to_string(*human)) : nlohmann::json(nullptr)}};
}

std::shared_ptr<const ModelSnapshot> make_snapshot(const std::vector<Comment>& comments,
                                                   const PolarityModel& polarity,
                                                   const TopicModel* topics) {
  auto snap = std::make_shared<ModelSnapshot>();
  for (const auto& c : comments) {
    TokenizedDoc doc = preprocess(c, polarity.preprocess_config());
    PolarityPrediction p = polarity.predict_doc(doc);
    TriageItem it;
    it.comment_id = c.id;
    it.text = c.text;
    it.predicted = p.predicted;
    it.confidence = p.confidence;
    it.probabilities = p.probabilities;
    if (topics) {
      auto theta = topics->doc_topics(doc);
      it.topic_id = static_cast<int>(std::max_element(theta.begin(), theta.end()) - theta.begin());
    }
    snap->index[c.id] = snap->items.size();
    snap->items.push_back(std::move(it));
  }
  return snap;
}

std::string utc_timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

TriageService::TriageService(std::shared_ptr<const ModelSnapshot> snapshot, LabelStore& labels,
                             std::filesystem::path report_dir, double default_threshold,
                             Clock clock)
    : snapshot_(std::move(snapshot)),
      labels_(labels),
      report_dir_(std::move(report_dir)),
      default_threshold_(default_threshold),
      clock_(clock ? std::move(clock) : Clock(utc_timestamp)) {}

std::shared_ptr<const ModelSnapshot> TriageService::current() const {
  std::lock_guard lock(snap_mu_);
  return snapshot_;
}

void TriageService::swap_snapshot(std::shared_ptr<const ModelSnapshot> snapshot) {
  std::lock_guard lock(snap_mu_);
  snapshot_ = std::move(snapshot);
}

TriageItem TriageService::decorate(const TriageItem& base) const {
  TriageItem it = base;
  if (auto e = labels_.latest(it.comment_id)) {
    it.reviewed = true;
    it.human = e->polarity;
  }
  return it;
}

std::vector<TriageItem> TriageService::queue(double threshold, std::size_t limit) const {
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw Error("invalid_argument", "threshold must lie in (0, 1]");
  }
  auto snap = current();
  auto reviewed = labels_.snapshot();
  std::vector<const TriageItem*> pending;
  for (const auto& it : snap->items) {
    if (it.confidence <= threshold && !reviewed.count(it.comment_id)) pending.push_back(&it);
  }
  std::sort(pending.begin(), pending.end(), [](const TriageItem* a, const TriageItem* b) {
    if (a->confidence != b->confidence) return a->confidence < b->confidence;
    return a->comment_id < b->comment_id;
  });
  std::vector<TriageItem> out;
  for (std::size_t i = 0; i < std::min(limit, pending.size()); ++i) out.push_back(*pending[i]);
  return out;
}

std::size_t TriageService::pending_count(double threshold) const {
  auto snap = current();
  auto reviewed = labels_.snapshot();
  std::size_t n = 0;
  for (const auto& it : snap->items) {
    if (it.confidence <= threshold && !reviewed.count(it.comment_id)) ++n;
  }
  return n;
}

std::optional<TriageItem> TriageService::item(const std::string& comment_id) const {
  auto snap = current();
  auto it = snap->index.find(comment_id);
  if (it == snap->index.end()) return std::nullopt;
  return decorate(snap->items[it->second]);
}

std::size_t TriageService::size() const { return current()->items.size(); }

LabelEntry TriageService::label(const std::string& comment_id, Polarity polarity,
                                const std::string& reviewer) {
  auto snap = current();
  if (!snap->index.count(comment_id)) {
    throw Error("not_found", "unknown comment '" + comment_id + "'");
  }
  LabelEntry e{comment_id, polarity, clock_(), reviewer};
  labels_.append(e);
  return e;
}

std::string TriageService::export_labels_csv() const {
  csv::Writer w({"comment_id", "polarity"});
  for (const auto& r : labels_.export_rows()) w.add({r.comment_id, std::string(to_string(r.polarity))});
  return w.str();
}

std::string TriageService::stats() const {
  const auto p = report_dir_ / "report";
  if (!std::filesystem::exists(p)) {
    throw Error("missing_artifact", "report not built; run `opinion report` first");
  }
  return read_text(p);
}

namespace {

void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& code,
                const std::string& message) {
  send_json(res, status, {{"code", code}, {"message", message}});
}

std::optional<double> parse_number(const std::string& s) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace

void install_routes(httplib::Server& server, TriageService& service) {
  server.Get("/api/health", [&service](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, {{"status", "ok"},
                         {"comments", service.size()},
                         {"reviewed", service.labels().size()},
                         {"threshold", service.default_threshold()}});
  });

  server.Get("/api/queue", [&service](const httplib::Request& req, httplib::Response& res) {
    double threshold = service.default_threshold();
    std::size_t limit = 50;
    if (req.has_param("threshold")) {
      auto v = parse_number(req.get_param_value("threshold"));
      if (!v) return send_error(res, 400, "invalid_argument", "threshold is not a number");
      threshold = *v;
    }
    if (req.has_param("limit")) {
      auto v = parse_number(req.get_param_value("limit"));
      if (!v || *v < 0 || *v != static_cast<double>(static_cast<std::size_t>(*v))) {
        return send_error(res, 400, "invalid_argument", "limit must be a non-negative integer");
      }
      limit = static_cast<std::size_t>(*v);
    }
    try {
      auto items = service.queue(threshold, limit);
      nlohmann::json arr = nlohmann::json::array();
      for (const auto& it : items) arr.push_back(it.to_json());
      send_json(res, 200, {{"threshold", threshold},
                           {"limit", limit},
                           {"total_pending", service.pending_count(threshold)},
                           {"items", arr}});
    } catch (const Error& e) {
      send_error(res, 400, e.code(), e.what());
    }
  });

  server.Post("/api/labels", [&service](const httplib::Request& req, httplib::Response& res) {
    nlohmann::json body;
    try {
      body = nlohmann::json::parse(req.body);
    } catch (const nlohmann::json::exception&) {
      return send_error(res, 400, "invalid_argument", "request body is not valid JSON");
    }
    if (!body.is_object() || !body.contains("comment_id") || !body["comment_id"].is_string() ||
        !body.contains("polarity") || !body["polarity"].is_string()) {
      return send_error(res, 400, "invalid_argument",
                        "expected {\"comment_id\": string, \"polarity\": string}");
    }
    auto polarity = parse_polarity(body["polarity"].get<std::string>());
    if (!polarity) {
      return send_error(res, 400, "invalid_argument",
                        "polarity must be positive, neutral or negative");
    }
    std::string reviewer;
    if (body.contains("reviewer") && body["reviewer"].is_string()) reviewer = body["reviewer"];
    try {
      LabelEntry e = service.label(body["comment_id"].get<std::string>(), *polarity, reviewer);
      auto j = e.to_json();
      j["status"] = "reviewed";
      send_json(res, 200, j);
    } catch (const Error& e) {
      send_error(res, e.code() == "not_found" ? 404 : 500, e.code(), e.what());
    }
  });

  server.Get("/api/stats", [&service](const httplib::Request&, httplib::Response& res) {
    try {
      res.status = 200;
      res.set_content(service.stats(), "application/json");
    } catch (const Error& e) {
      send_error(res, 409, "report_missing", e.what());
    }
  });

  server.Get("/api/export/labels", [&service](const httplib::Request&, httplib::Response& res) {
    res.status = 200;
    res.set_content(service.export_labels_csv(), "text/csv");
  });

  server.Get(R"(/api/comments/([^/]+))",
             [&service](const httplib::Request& req, httplib::Response& res) {
               const std::string id = req.matches[1];
               auto it = service.item(id);
               if (!it) return send_error(res, 404, "not_found", "unknown comment '" + id + "'");
               send_json(res, 200, it->to_json());
             });

  server.set_exception_handler(
      [](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        std::string msg = "internal error";
        try {
          std::rethrow_exception(ep);
        } catch (const std::exception& e) {
          msg = e.what();
        } catch (...) {
        }
        send_error(res, 500, "internal", msg);
      });
}

}  // namespace opinion
