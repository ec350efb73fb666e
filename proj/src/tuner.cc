#include "opinion/tuner.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <set>
#include <thread>

#include "opinion/csv.h"
#include "opinion/io.h"

namespace opinion {

Dimension Dimension::uniform(std::string name, double lo, double hi) {
  return {std::move(name), Kind::uniform, lo, hi, {}};
}
Dimension Dimension::log_uniform(std::string name, double lo, double hi) {
  return {std::move(name), Kind::log_uniform, lo, hi, {}};
}
Dimension Dimension::integer(std::string name, int64_t lo, int64_t hi) {
  return {std::move(name), Kind::integer, static_cast<double>(lo), static_cast<double>(hi), {}};
}
Dimension Dimension::categorical(std::string name, std::vector<std::string> choices) {
  return {std::move(name), Kind::categorical, 0.0, 0.0, std::move(choices)};
}

namespace {

const char* kind_name(Dimension::Kind k) {
  switch (k) {
    case Dimension::Kind::uniform: return "uniform";
    case Dimension::Kind::log_uniform: return "log_uniform";
    case Dimension::Kind::integer: return "integer";
    case Dimension::Kind::categorical: return "categorical";
  }
  return "?";
}

Dimension::Kind parse_kind(const std::string& s) {
  if (s == "uniform") return Dimension::Kind::uniform;
  if (s == "log_uniform") return Dimension::Kind::log_uniform;
  if (s == "integer") return Dimension::Kind::integer;
  if (s == "categorical") return Dimension::Kind::categorical;
  throw Error("corrupt", "unknown dimension kind '" + s + "'");
}

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

void SearchSpace::validate() const {
  std::set<std::string> names;
  if (dimensions.empty()) throw Error("invalid_argument", "search space has no dimensions");
  for (const auto& d : dimensions) {
    if (!names.insert(d.name).second) {
      throw Error("invalid_argument", "duplicate dimension '" + d.name + "'");
    }
    if (d.kind == Dimension::Kind::categorical) {
      if (d.choices.empty()) throw Error("invalid_argument", "dimension '" + d.name + "' has no choices");
    } else if (!(d.lo < d.hi)) {
      throw Error("invalid_argument", "dimension '" + d.name + "' needs lo < hi");
    } else if (d.kind == Dimension::Kind::log_uniform && !(d.lo > 0.0)) {
      throw Error("invalid_argument", "log-uniform dimension '" + d.name + "' needs lo > 0");
    }
  }
}

nlohmann::json SearchSpace::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& d : dimensions) {
    nlohmann::json e = {{"name", d.name}, {"kind", kind_name(d.kind)}};
    if (d.kind == Dimension::Kind::categorical) {
      e["choices"] = d.choices;
    } else if (d.kind == Dimension::Kind::integer) {
      e["lo"] = static_cast<int64_t>(d.lo);
      e["hi"] = static_cast<int64_t>(d.hi);
    } else {
      e["lo"] = d.lo;
      e["hi"] = d.hi;
    }
    arr.push_back(e);
  }
  return arr;
}

SearchSpace SearchSpace::from_json(const nlohmann::json& j) {
  SearchSpace s;
  for (const auto& e : j) {
    Dimension d;
    d.name = e.at("name").get<std::string>();
    d.kind = parse_kind(e.at("kind").get<std::string>());
    if (d.kind == Dimension::Kind::categorical) {
      d.choices = e.at("choices").get<std::vector<std::string>>();
      d.lo = d.hi = 0.0;
    } else {
      d.lo = e.at("lo").get<double>();
      d.hi = e.at("hi").get<double>();
    }
    s.dimensions.push_back(std::move(d));
  }
  return s;
}

double Assignment::real(const std::string& name) const {
  auto it = values_.find(name);
  if (it == values_.end()) throw Error("invalid_argument", "no parameter '" + name + "'");
  if (auto* d = std::get_if<double>(&it->second)) return *d;
  if (auto* i = std::get_if<int64_t>(&it->second)) return static_cast<double>(*i);
  throw Error("invalid_argument", "parameter '" + name + "' is not numeric");
}

int64_t Assignment::integer(const std::string& name) const {
  auto it = values_.find(name);
  if (it == values_.end()) throw Error("invalid_argument", "no parameter '" + name + "'");
  if (auto* i = std::get_if<int64_t>(&it->second)) return *i;
  throw Error("invalid_argument", "parameter '" + name + "' is not an integer");
}

const std::string& Assignment::choice(const std::string& name) const {
  auto it = values_.find(name);
  if (it == values_.end()) throw Error("invalid_argument", "no parameter '" + name + "'");
  if (auto* s = std::get_if<std::string>(&it->second)) return *s;
  throw Error("invalid_argument", "parameter '" + name + "' is not categorical");
}

nlohmann::json Assignment::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : values_) {
    std::visit([&](const auto& x) { j[k] = x; }, v);
  }
  return j;
}

Assignment Assignment::from_json(const nlohmann::json& j, const SearchSpace& space) {
  Assignment a;
  for (const auto& d : space.dimensions) {
    const auto& v = j.at(d.name);
    switch (d.kind) {
      case Dimension::Kind::uniform:
      case Dimension::Kind::log_uniform:
        a.set(d.name, v.get<double>());
        break;
      case Dimension::Kind::integer:
        a.set(d.name, v.get<int64_t>());
        break;
      case Dimension::Kind::categorical:
        a.set(d.name, v.get<std::string>());
        break;
    }
  }
  return a;
}

double objective_fn(double s_train, double s_validation, double epsilon) {
  if (!(epsilon > 0.0)) throw Error("invalid_argument", "epsilon must be > 0");
  if (!(s_train >= 0.0 && s_train <= 1.0) || !(s_validation >= 0.0 && s_validation <= 1.0)) {
    throw Error("invalid_argument", "accuracies must lie in [0, 1]");
  }
  return -s_validation + std::fabs(s_train - s_validation) / (1.0 - s_train + epsilon);
}

// ---------------------------------------------------------------------------
// Parzen estimators

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Numeric dimensions live in an internal coordinate: the value itself, its
// log for log-uniform, or a real in [lo - 0.5, hi + 0.5] for integers.
struct Bounds {
  double a, b;
};

Bounds internal_bounds(const Dimension& d) {
  switch (d.kind) {
    case Dimension::Kind::log_uniform: return {std::log(d.lo), std::log(d.hi)};
    case Dimension::Kind::integer: return {d.lo - 0.5, d.hi + 0.5};
    default: return {d.lo, d.hi};
  }
}

double to_internal(const Dimension& d, const Assignment& a) {
  switch (d.kind) {
    case Dimension::Kind::log_uniform: return std::log(a.real(d.name));
    case Dimension::Kind::integer: return static_cast<double>(a.integer(d.name));
    default: return a.real(d.name);
  }
}

// Mixture of truncated Gaussians, one per observation plus a broad prior
// component centred on the range. Bandwidth is the distance to the nearest
// other observation, clipped to [range / 100, range].
class Parzen {
 public:
  Parzen(std::vector<double> mus, Bounds bounds) : bounds_(bounds) {
    const double range = bounds.b - bounds.a;
    const double min_sigma = range / 100.0;
    std::sort(mus.begin(), mus.end());
    for (std::size_t i = 0; i < mus.size(); ++i) {
      double nn = kInf;
      if (i > 0) nn = std::min(nn, mus[i] - mus[i - 1]);
      if (i + 1 < mus.size()) nn = std::min(nn, mus[i + 1] - mus[i]);
      double sigma = std::clamp(std::isfinite(nn) ? nn : range, min_sigma, range);
      comps_.push_back({mus[i], sigma});
    }
    comps_.push_back({0.5 * (bounds.a + bounds.b), range});
  }

  double sample(Rng& rng) const {
    const auto& c = comps_[rng.below(comps_.size())];
    for (int tries = 0; tries < 100; ++tries) {
      double x = c.mu + c.sigma * rng.normal();
      if (x >= bounds_.a && x <= bounds_.b) return x;
    }
    return std::clamp(c.mu, bounds_.a, bounds_.b);
  }

  // Probability mass of [lo, hi] under the mixture.
  double mass(double lo, double hi) const {
    double total = 0.0;
    for (const auto& c : comps_) {
      double z = normal_cdf((bounds_.b - c.mu) / c.sigma) - normal_cdf((bounds_.a - c.mu) / c.sigma);
      double m = normal_cdf((hi - c.mu) / c.sigma) - normal_cdf((lo - c.mu) / c.sigma);
      total += m / std::max(z, 1e-300);
    }
    return total / static_cast<double>(comps_.size());
  }

  double density(double x) const {
    double total = 0.0;
    for (const auto& c : comps_) {
      double z = normal_cdf((bounds_.b - c.mu) / c.sigma) - normal_cdf((bounds_.a - c.mu) / c.sigma);
      double u = (x - c.mu) / c.sigma;
      total += std::exp(-0.5 * u * u) / (c.sigma * std::sqrt(2.0 * M_PI) * std::max(z, 1e-300));
    }
    return total / static_cast<double>(comps_.size());
  }

 private:
  struct Component {
    double mu, sigma;
  };
  Bounds bounds_;
  std::vector<Component> comps_;
};

// Smoothed frequencies: (count_j + 1/C) / (m + 1).
std::vector<double> categorical_probs(const Dimension& d, const std::vector<const Trial*>& group) {
  const std::size_t c = d.choices.size();
  std::vector<double> p(c, 1.0 / static_cast<double>(c));
  for (const Trial* t : group) {
    const auto& v = t->params.choice(d.name);
    auto it = std::find(d.choices.begin(), d.choices.end(), v);
    if (it != d.choices.end()) p[it - d.choices.begin()] += 1.0;
  }
  for (double& x : p) x /= static_cast<double>(group.size() + 1);
  return p;
}

}  // namespace

Assignment sample_random(const SearchSpace& space, Rng& rng) {
  Assignment a;
  for (const auto& d : space.dimensions) {
    switch (d.kind) {
      case Dimension::Kind::uniform:
        a.set(d.name, rng.uniform(d.lo, d.hi));
        break;
      case Dimension::Kind::log_uniform:
        a.set(d.name, std::exp(rng.uniform(std::log(d.lo), std::log(d.hi))));
        break;
      case Dimension::Kind::integer:
        a.set(d.name, rng.between(static_cast<int64_t>(d.lo), static_cast<int64_t>(d.hi)));
        break;
      case Dimension::Kind::categorical:
        a.set(d.name, d.choices[rng.below(d.choices.size())]);
        break;
    }
  }
  return a;
}

Assignment propose_tpe(const SearchSpace& space, const std::vector<Trial>& history,
                       const TpeOptions& options, Rng& rng) {
  std::vector<const Trial*> done;
  for (const auto& t : history) done.push_back(&t);
  if (done.size() < 2) return sample_random(space, rng);
  std::stable_sort(done.begin(), done.end(),
                   [](const Trial* x, const Trial* y) { return x->objective < y->objective; });
  std::size_t n_good = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(options.gamma * static_cast<double>(done.size()))));
  std::vector<const Trial*> good(done.begin(), done.begin() + n_good);
  std::vector<const Trial*> bad(done.begin() + n_good, done.end());

  struct DimModel {
    std::optional<Parzen> l, g;
    std::vector<double> pl, pg;
  };
  std::vector<DimModel> models;
  for (const auto& d : space.dimensions) {
    DimModel m;
    if (d.kind == Dimension::Kind::categorical) {
      m.pl = categorical_probs(d, good);
      m.pg = categorical_probs(d, bad);
    } else {
      std::vector<double> lg, bg;
      for (const Trial* t : good) lg.push_back(to_internal(d, t->params));
      for (const Trial* t : bad) bg.push_back(to_internal(d, t->params));
      m.l.emplace(lg, internal_bounds(d));
      m.g.emplace(bg, internal_bounds(d));
    }
    models.push_back(std::move(m));
  }

  Assignment best;
  double best_score = -kInf;
  for (int c = 0; c < std::max(1, options.candidates); ++c) {
    Assignment cand;
    double score = 0.0;
    for (std::size_t k = 0; k < space.dimensions.size(); ++k) {
      const auto& d = space.dimensions[k];
      const auto& m = models[k];
      switch (d.kind) {
        case Dimension::Kind::categorical: {
          std::size_t j = rng.categorical(m.pl);
          cand.set(d.name, d.choices[j]);
          score += std::log(m.pl[j]) - std::log(m.pg[j]);
          break;
        }
        case Dimension::Kind::integer: {
          double x = m.l->sample(rng);
          auto v = std::clamp<int64_t>(std::llround(x), static_cast<int64_t>(d.lo),
                                       static_cast<int64_t>(d.hi));
          cand.set(d.name, v);
          double lo = static_cast<double>(v) - 0.5, hi = static_cast<double>(v) + 0.5;
          score += std::log(std::max(m.l->mass(lo, hi), 1e-300)) -
                   std::log(std::max(m.g->mass(lo, hi), 1e-300));
          break;
        }
        case Dimension::Kind::log_uniform: {
          double x = m.l->sample(rng);
          cand.set(d.name, std::clamp(std::exp(x), d.lo, d.hi));
          score += std::log(std::max(m.l->density(x), 1e-300)) -
                   std::log(std::max(m.g->density(x), 1e-300));
          break;
        }
        case Dimension::Kind::uniform: {
          double x = m.l->sample(rng);
          cand.set(d.name, x);
          score += std::log(std::max(m.l->density(x), 1e-300)) -
                   std::log(std::max(m.g->density(x), 1e-300));
          break;
        }
      }
    }
    if (score > best_score) {
      best_score = score;
      best = std::move(cand);
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Search loop

namespace {

struct Outcome {
  double objective = kInf;
  double s_train = kNaN;
  double s_validation = kNaN;
};

using OutcomeFn = std::function<Outcome(const Assignment&, uint64_t)>;

SearchResult search_loop(const SearchSpace& space, std::size_t budget, const OutcomeFn& fn,
                         const SearchConfig& config) {
  space.validate();
  if (budget < 1) throw Error("invalid_argument", "search budget must be >= 1");
  const TpeOptions& opt = config.tpe;
  const std::size_t startup =
      opt.startup_trials ? opt.startup_trials : std::max<std::size_t>(10, budget / 4);
  const std::size_t jobs = static_cast<std::size_t>(std::max(1, opt.jobs));

  SearchResult result;
  for (Trial t : config.warm_start) {
    t.warm_start = true;
    t.index = result.history.size();
    result.history.push_back(std::move(t));
  }

  std::size_t evaluated = 0;
  while (evaluated < budget) {
    const std::size_t batch = std::min(jobs, budget - evaluated);
    std::vector<Trial> trials(batch);
    for (std::size_t b = 0; b < batch; ++b) {
      Trial& t = trials[b];
      t.index = result.history.size() + b;
      t.seed = derive_seed(config.master_seed, "tuner/trial/" + std::to_string(t.index));
      Rng rng(derive_seed(config.master_seed, "tuner/propose/" + std::to_string(t.index)));
      bool random = opt.random_only || evaluated + b < startup;
      t.params = random ? sample_random(space, rng) : propose_tpe(space, result.history, opt, rng);
    }
    auto run = [&](Trial& t) {
      auto start = std::chrono::steady_clock::now();
      try {
        Outcome o = fn(t.params, t.seed);
        t.objective = o.objective;
        t.s_train = o.s_train;
        t.s_validation = o.s_validation;
      } catch (const std::exception& e) {
        t.failed = true;
        t.objective = kInf;
        t.s_train = kNaN;
        t.s_validation = kNaN;
        t.error = e.what();
      }
      t.duration = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    };
    if (batch == 1) {
      run(trials[0]);
    } else {
      std::vector<std::thread> workers;
      for (auto& t : trials) workers.emplace_back(run, std::ref(t));
      for (auto& w : workers) w.join();
    }
    for (auto& t : trials) result.history.push_back(std::move(t));
    evaluated += batch;
  }

  const Trial* best = nullptr;
  for (const auto& t : result.history) {
    if (!best || t.objective < best->objective) best = &t;
  }
  result.best = *best;
  return result;
}

}  // namespace

SearchResult run_search(const SearchSpace& space, std::size_t budget,
                        const TrialEvaluator& evaluate, const SearchConfig& config) {
  const double eps = config.epsilon;
  if (!(eps > 0.0)) throw Error("invalid_argument", "epsilon must be > 0");
  return search_loop(
      space, budget,
      [&](const Assignment& a, uint64_t seed) {
        TrialScores s = evaluate(a, seed);
        Outcome o;
        o.s_train = s.s_train;
        o.s_validation = s.s_validation;
        o.objective = objective_fn(s.s_train, s.s_validation, eps);
        return o;
      },
      config);
}

SearchResult minimize(const SearchSpace& space, std::size_t budget, const ObjectiveFunction& fn,
                      const SearchConfig& config) {
  return search_loop(
      space, budget,
      [&](const Assignment& a, uint64_t seed) {
        Outcome o;
        o.objective = fn(a, seed);
        return o;
      },
      config);
}

// ---------------------------------------------------------------------------
// Reports

namespace {

nlohmann::json number_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

double number_or(const nlohmann::json& j, double fallback) {
  return j.is_null() ? fallback : j.get<double>();
}

nlohmann::json trial_json(const Trial& t) {
  nlohmann::json j = {{"index", t.index},
                      {"params", t.params.to_json()},
                      {"s_train", number_or_null(t.s_train)},
                      {"s_validation", number_or_null(t.s_validation)},
                      {"objective", number_or_null(t.objective)},
                      {"seed", t.seed},
                      {"status", t.failed ? "failed" : "ok"}};
  if (t.warm_start) j["warm_start"] = true;
  if (t.failed) j["error"] = t.error;
  return j;
}

Trial trial_from_json(const nlohmann::json& j, const SearchSpace& space) {
  Trial t;
  t.index = j.at("index").get<std::size_t>();
  t.params = Assignment::from_json(j.at("params"), space);
  t.failed = j.at("status").get<std::string>() == "failed";
  t.s_train = number_or(j.at("s_train"), kNaN);
  t.s_validation = number_or(j.at("s_validation"), kNaN);
  t.objective = number_or(j.at("objective"), kInf);
  t.seed = j.at("seed").get<uint64_t>();
  t.warm_start = j.value("warm_start", false);
  t.error = j.value("error", "");
  return t;
}

}  // namespace

nlohmann::json search_report_json(const SearchSpace& space, const SearchResult& result,
                                  const SearchConfig& config) {
  nlohmann::json trials = nlohmann::json::array();
  for (const auto& t : result.history) trials.push_back(trial_json(t));
  return {{"format", "opinion-search-report"},
          {"format_version", 1},
          {"space", space.to_json()},
          {"epsilon", config.epsilon},
          {"master_seed", config.master_seed},
          {"tpe", {{"gamma", config.tpe.gamma}, {"candidates", config.tpe.candidates}}},
          {"trials", trials},
          {"best", trial_json(result.best)}};
}

void save_search_report(const std::filesystem::path& path, const SearchSpace& space,
                        const SearchResult& result, const SearchConfig& config) {
  write_json(path, search_report_json(space, result, config));
}

LoadedSearchReport load_search_report(const std::filesystem::path& path) {
  nlohmann::json j = read_json(path);
  try {
    if (j.value("format", "") != "opinion-search-report" || j.value("format_version", 0) != 1) {
      throw Error("version", path.string() + ": not a version-1 search report");
    }
    LoadedSearchReport r;
    r.space = SearchSpace::from_json(j.at("space"));
    r.epsilon = j.at("epsilon").get<double>();
    r.master_seed = j.at("master_seed").get<uint64_t>();
    for (const auto& t : j.at("trials")) r.trials.push_back(trial_from_json(t, r.space));
    r.best = trial_from_json(j.at("best"), r.space);
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error("corrupt", path.string() + ": " + e.what());
  }
}

std::string timings_csv(const SearchResult& result) {
  csv::Writer w({"index", "duration_seconds"});
  for (const auto& t : result.history) {
    w.add({std::to_string(t.index), format_double(t.duration)});
  }
  return w.str();
}

SearchSpace default_polarity_space() {
  SearchSpace s;
  s.dimensions = {Dimension::log_uniform("learning_rate", 0.01, 1.0),
                  Dimension::integer("epochs", 5, 100),
                  Dimension::categorical("word_ngrams", {"1", "2"}),
                  Dimension::categorical("char_ngrams", {"3-6", "0-0"}),
                  Dimension::integer("min_count", 1, 5)};
  return s;
}

PolarityHyperparams apply_polarity_params(PolarityHyperparams base, const Assignment& a) {
  if (a.has("learning_rate")) base.learning_rate = a.real("learning_rate");
  if (a.has("epochs")) base.epochs = static_cast<int>(a.integer("epochs"));
  if (a.has("word_ngrams")) base.word_ngrams = std::stoi(a.choice("word_ngrams"));
  if (a.has("char_ngrams")) {
    const std::string& r = a.choice("char_ngrams");
    auto dash = r.find('-');
    if (dash == std::string::npos) throw Error("invalid_argument", "bad char_ngrams range " + r);
    base.minn = std::stoi(r.substr(0, dash));
    base.maxn = std::stoi(r.substr(dash + 1));
  }
  if (a.has("min_count")) base.min_count = a.integer("min_count");
  return base;
}

}  // namespace opinion
