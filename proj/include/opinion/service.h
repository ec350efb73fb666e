#pragma once

#include <array>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "opinion/corpus.h"
#include "opinion/polarity.h"
#include "opinion/topics.h"

namespace httplib {
class Server;
}

namespace opinion {

struct LabelEntry {
  std::string comment_id;
  Polarity polarity = Polarity::positive;
  std::string timestamp;
  std::string reviewer;

  nlohmann::json to_json() const;
  static LabelEntry from_json(const nlohmann::json& j);
  bool operator==(const LabelEntry&) const = default;
};

// Append-only JSON-lines log of human labels. The latest entry per comment
// wins; opening an existing log replays it.
class LabelStore {
 public:
  explicit LabelStore(std::filesystem::path log);

  void append(const LabelEntry& entry);
  std::optional<LabelEntry> latest(const std::string& comment_id) const;
  std::map<std::string, LabelEntry> snapshot() const;
  std::size_t size() const;
  // One row per labeled comment, ordered by comment id.
  std::vector<LabelRow> export_rows() const;
  void flush();

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  mutable std::mutex mu_;
  std::ofstream out_;
  std::map<std::string, LabelEntry> latest_;
};

struct TriageItem {
  std::string comment_id;
  std::string text;
  Polarity predicted = Polarity::positive;
  double confidence = 0.0;
  std::array<double, 3> probabilities{};
  int topic_id = 0;
  bool reviewed = false;
  std::optional<Polarity> human;

  nlohmann::json to_json() const;
};

// Model outputs for every comment, computed once and never mutated.
struct ModelSnapshot {
  std::vector<TriageItem> items;  // reviewed/human unset
  std::map<std::string, std::size_t> index;
};

std::shared_ptr<const ModelSnapshot> make_snapshot(const std::vector<Comment>& comments,
                                                   const PolarityModel& polarity,
                                                   const TopicModel* topics);

class TriageService {
 public:
  using Clock = std::function<std::string()>;

  TriageService(std::shared_ptr<const ModelSnapshot> snapshot, LabelStore& labels,
                std::filesystem::path report_dir, double default_threshold = 0.7,
                Clock clock = {});

  double default_threshold() const { return default_threshold_; }

  // Unreviewed items with confidence <= threshold, most uncertain first
  // (ties by comment id), at most `limit`. Throws
  // Error("invalid_argument") unless threshold lies in (0, 1].
  std::vector<TriageItem> queue(double threshold, std::size_t limit) const;
  std::size_t pending_count(double threshold) const;
  std::optional<TriageItem> item(const std::string& comment_id) const;
  std::size_t size() const;

  // Throws Error("not_found") for an unknown comment.
  LabelEntry label(const std::string& comment_id, Polarity polarity, const std::string& reviewer);
  std::string export_labels_csv() const;
  // Raw report bytes; Error("missing_artifact") before `opinion report`.
  std::string stats() const;

  void swap_snapshot(std::shared_ptr<const ModelSnapshot> snapshot);
  LabelStore& labels() { return labels_; }

 private:
  std::shared_ptr<const ModelSnapshot> current() const;
  TriageItem decorate(const TriageItem& base) const;

  mutable std::mutex snap_mu_;
  std::shared_ptr<const ModelSnapshot> snapshot_;
  LabelStore& labels_;
  std::filesystem::path report_dir_;
  double default_threshold_;
  Clock clock_;
};

std::string utc_timestamp();

// Registers every /api route on `server`.
void install_routes(httplib::Server& server, TriageService& service);

}  // namespace opinion
