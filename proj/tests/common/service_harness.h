#pragma once

#include <filesystem>
#include <memory>
#include <thread>

#include "httplib.h"
#include "opinion/corpus.h"
#include "opinion/service.h"

namespace fixtures {

// A triage service on an ephemeral local port, backed by small models
// trained on a synthetic corpus. The label log lives under `dir`.
class ServiceHarness {
 public:
  explicit ServiceHarness(std::filesystem::path dir, double threshold = 0.7);
  ~ServiceHarness();
  ServiceHarness(const ServiceHarness&) = delete;
  ServiceHarness& operator=(const ServiceHarness&) = delete;

  httplib::Client client() const;
  opinion::TriageService& service() { return *service_; }
  const std::vector<opinion::Comment>& comments() const { return comments_; }
  const opinion::PolarityModel& polarity() const { return *polarity_; }
  std::filesystem::path report_dir() const { return dir_ / "report"; }
  std::filesystem::path label_log() const { return dir_ / "labels.log"; }

  // Stops the server, drops the service and label store, then reopens both
  // from the log on disk, as a process restart would.
  void restart();

 private:
  void start();
  void stop();

  std::filesystem::path dir_;
  double threshold_;
  std::vector<opinion::Comment> comments_;
  std::unique_ptr<opinion::PolarityModel> polarity_;
  std::shared_ptr<const opinion::ModelSnapshot> snapshot_;
  std::unique_ptr<opinion::LabelStore> store_;
  std::unique_ptr<opinion::TriageService> service_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = 0;
};

}  // namespace fixtures
