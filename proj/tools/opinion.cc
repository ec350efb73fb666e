// opinion: command-line entry point for the evaluation-comment pipeline.

#include <csignal>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "httplib.h"
#include "opinion/pipeline.h"
#include "opinion/service.h"

namespace {

httplib::Server* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

std::string one_line(std::string s) {
  for (char& ch : s) {
    if (ch == '\n' || ch == '\r') ch = ' ';
  }
  return s;
}

int serve(const opinion::PipelineConfig& c, const std::string& host, int port, double threshold) {
  using namespace opinion;
  if (!std::filesystem::exists(paths::polarity_model(c) / "manifest")) {
    throw Error("missing_artifact", "no polarity model; run `opinion train-polarity` first");
  }
  if (!std::filesystem::exists(paths::topic_model(c) / "manifest")) {
    throw Error("missing_artifact", "no topic model; run `opinion train-topics` first");
  }
  IngestData in = load_ingest(c);
  PolarityModel pol = PolarityModel::load(paths::polarity_model(c));
  TopicModel top = TopicModel::load(paths::topic_model(c));
  LabelStore store(paths::label_log(c));
  TriageService service(make_snapshot(in.kept, pol, &top), store, paths::report(c), threshold);

  httplib::Server server;
  // httplib also sets SO_REUSEPORT, which would let a second server share a
  // busy port instead of failing.
  server.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const char*>(&yes), sizeof(yes));
  });
  install_routes(server, service);
  if (!server.bind_to_port(host, port)) {
    throw Error("io", "cannot listen on " + host + ":" + std::to_string(port) +
                          " (port in use or not permitted)");
  }
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::cerr << "[serve] listening on http://" << host << ":" << port << " with "
            << service.size() << " comments, threshold " << threshold << "\n";
  server.listen_after_bind();
  g_server = nullptr;
  store.flush();
  std::cerr << "[serve] stopped; " << store.size() << " labeled comments in "
            << store.path().string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Polarity, topic and score analysis of course-evaluation comments"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, workdir;
  uint64_t seed = 0;
  int jobs = 0;
  app.add_option("--config", config_path, "JSON pipeline config");
  auto* seed_opt = app.add_option("--seed", seed, "Master seed");
  app.add_option("--workdir", workdir, "Directory holding every artifact");
  app.add_option("--jobs", jobs, "Concurrent tuning trials")->check(CLI::PositiveNumber);

  std::size_t n_comments = 0, n_courses = 0, budget = 0;
  double overlap = -1.0;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus under workdir/data");
  synth->add_option("--n-comments", n_comments, "Number of comments");
  synth->add_option("--n-courses", n_courses, "Number of courses");
  synth->add_option("--overlap", overlap, "Probability a polarity word comes from another class");

  app.add_subcommand("ingest", "Validate inputs, filter short comments, split 64/16/20");
  auto* tune = app.add_subcommand("tune", "Search classifier hyperparameters");
  tune->add_option("--budget", budget, "Number of trials");
  app.add_subcommand("train-polarity", "Train the polarity classifier with the tuned settings");
  app.add_subcommand("train-topics", "Fit the LDA topic model");
  app.add_subcommand("train-scorer", "Train the course score-bucket classifier");
  app.add_subcommand("eval", "Confusion matrices, macro accuracies and threshold curve");
  app.add_subcommand("report", "Assemble the analytics report");

  std::string host = "127.0.0.1";
  int port = 8080;
  double threshold = -1.0;
  auto* serve_cmd = app.add_subcommand("serve", "Run the triage HTTP API");
  serve_cmd->add_option("--host", host, "Bind address");
  serve_cmd->add_option("--port", port, "Port")->check(CLI::Range(1, 65535));
  serve_cmd->add_option("--threshold", threshold, "Default triage threshold");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error[usage]: " << one_line(e.what()) << "\n";
    return 2;
  }

  try {
    using namespace opinion;
    PipelineConfig c = config_path.empty() ? PipelineConfig{} : load_config(config_path);
    if (!workdir.empty()) c.workdir = workdir;
    if (*seed_opt) c.seed = seed;
    if (jobs > 0) c.tpe.jobs = jobs;
    if (n_comments > 0) c.synth.n_comments = n_comments;
    if (n_courses > 0) c.synth.n_courses = n_courses;
    if (overlap >= 0.0) c.synth.overlap = overlap;
    if (budget > 0) c.tune_budget = budget;
    if (threshold >= 0.0) c.triage_threshold = threshold;

    const std::string cmd = app.get_subcommands().front()->get_name();
    if (cmd == "synth") cmd_synth(c, std::cerr);
    else if (cmd == "ingest") cmd_ingest(c, std::cerr);
    else if (cmd == "tune") cmd_tune(c, std::cerr);
    else if (cmd == "train-polarity") cmd_train_polarity(c, std::cerr);
    else if (cmd == "train-topics") cmd_train_topics(c, std::cerr);
    else if (cmd == "train-scorer") cmd_train_scorer(c, std::cerr);
    else if (cmd == "eval") cmd_eval(c, std::cout, std::cerr);
    else if (cmd == "report") cmd_report(c, std::cerr);
    else if (cmd == "serve") {
      if (!(c.triage_threshold > 0.0 && c.triage_threshold <= 1.0)) {
        throw Error("invalid_argument", "threshold must lie in (0, 1]");
      }
      return serve(c, host, port, c.triage_threshold);
    }
    return 0;
  } catch (const opinion::Error& e) {
    std::cerr << "error[" << e.code() << "]: " << one_line(e.what()) << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error[internal]: " << one_line(e.what()) << "\n";
    return 1;
  }
}
