#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "opinion/polarity.h"

namespace opinion {

struct Dimension {
  enum class Kind { uniform, log_uniform, integer, categorical };

  std::string name;
  Kind kind = Kind::uniform;
  double lo = 0.0;
  double hi = 1.0;
  std::vector<std::string> choices;

  static Dimension uniform(std::string name, double lo, double hi);
  static Dimension log_uniform(std::string name, double lo, double hi);
  static Dimension integer(std::string name, int64_t lo, int64_t hi);
  static Dimension categorical(std::string name, std::vector<std::string> choices);

  bool operator==(const Dimension&) const = default;
};

struct SearchSpace {
  std::vector<Dimension> dimensions;

  // Throws Error("invalid_argument") on lo >= hi, empty choices or
  // duplicate names.
  void validate() const;
  nlohmann::json to_json() const;
  static SearchSpace from_json(const nlohmann::json& j);
  bool operator==(const SearchSpace&) const = default;
};

using ParamValue = std::variant<double, int64_t, std::string>;

class Assignment {
 public:
  void set(const std::string& name, ParamValue v) { values_[name] = std::move(v); }
  double real(const std::string& name) const;
  int64_t integer(const std::string& name) const;
  const std::string& choice(const std::string& name) const;
  bool has(const std::string& name) const { return values_.count(name) > 0; }
  const std::map<std::string, ParamValue>& values() const { return values_; }

  nlohmann::json to_json() const;
  static Assignment from_json(const nlohmann::json& j, const SearchSpace& space);
  bool operator==(const Assignment&) const = default;

 private:
  std::map<std::string, ParamValue> values_;
};

struct Trial {
  std::size_t index = 0;
  Assignment params;
  double s_train = 0.0;
  double s_validation = 0.0;
  double objective = 0.0;
  uint64_t seed = 0;
  double duration = 0.0;  // seconds
  bool failed = false;
  bool warm_start = false;
  std::string error;
};

// -S_validation + |S_train - S_validation| / (1 - S_train + epsilon).
// Throws Error("invalid_argument") when epsilon <= 0 or a score is outside [0, 1].
double objective_fn(double s_train, double s_validation, double epsilon = 0.2);

struct TpeOptions {
  double gamma = 0.25;
  int candidates = 24;
  // Trials evaluated concurrently; proposals only see completed trials.
  int jobs = 1;
  // Number of purely random trials; 0 means max(10, budget / 4).
  std::size_t startup_trials = 0;
  bool random_only = false;
};

struct SearchConfig {
  double epsilon = 0.2;
  uint64_t master_seed = 0;
  TpeOptions tpe;
  // Completed trials from an earlier report; they inform proposals but do
  // not count against the budget.
  std::vector<Trial> warm_start;
};

struct SearchResult {
  Trial best;
  std::vector<Trial> history;
};

struct TrialScores {
  double s_train = 0.0;
  double s_validation = 0.0;
};

using TrialEvaluator = std::function<TrialScores(const Assignment&, uint64_t seed)>;
using ObjectiveFunction = std::function<double(const Assignment&, uint64_t seed)>;

// Evaluates `budget` assignments: the first max(10, budget / 4) drawn at
// random, the rest proposed by a tree-structured Parzen estimator. A trial
// whose evaluator throws is recorded as failed with objective +inf.
SearchResult run_search(const SearchSpace& space, std::size_t budget,
                        const TrialEvaluator& evaluate, const SearchConfig& config);

// Same search loop over an arbitrary scalar objective (S fields are NaN).
SearchResult minimize(const SearchSpace& space, std::size_t budget, const ObjectiveFunction& fn,
                      const SearchConfig& config);

// One TPE proposal from completed trials. Exposed for testing.
Assignment propose_tpe(const SearchSpace& space, const std::vector<Trial>& history,
                       const TpeOptions& options, Rng& rng);
Assignment sample_random(const SearchSpace& space, Rng& rng);

nlohmann::json search_report_json(const SearchSpace& space, const SearchResult& result,
                                  const SearchConfig& config);
void save_search_report(const std::filesystem::path& path, const SearchSpace& space,
                        const SearchResult& result, const SearchConfig& config);

struct LoadedSearchReport {
  SearchSpace space;
  std::vector<Trial> trials;
  Trial best;
  double epsilon = 0.2;
  uint64_t master_seed = 0;
};
LoadedSearchReport load_search_report(const std::filesystem::path& path);
std::string timings_csv(const SearchResult& result);

// Default polarity space. Embedding dimension is not searched.
SearchSpace default_polarity_space();
PolarityHyperparams apply_polarity_params(PolarityHyperparams base, const Assignment& a);

}  // namespace opinion
