#include "opinion/pipeline.h"

#include <algorithm>
#include <chrono>
#include <map>
#include <ostream>
#include <set>

#include "opinion/io.h"
#include "opinion/metrics.h"

namespace opinion {

namespace {

const std::array<std::string, 3> kPolarityNames = {"positive", "neutral", "negative"};
const std::array<std::string, 3> kBucketNames = {"very_high", "high", "moderate"};

nlohmann::json lda_json(const LdaParams& p) {
  return {{"k", p.k}, {"alpha", p.alpha}, {"beta", p.beta}, {"iterations", p.iterations}};
}

LdaParams lda_from_json(const nlohmann::json& j, LdaParams p) {
  p.k = j.value("k", p.k);
  p.alpha = j.value("alpha", p.alpha);
  p.beta = j.value("beta", p.beta);
  p.iterations = j.value("iterations", p.iterations);
  return p;
}

nlohmann::json tpe_json(const TpeOptions& t) {
  return {{"gamma", t.gamma},
          {"candidates", t.candidates},
          {"jobs", t.jobs},
          {"startup_trials", t.startup_trials},
          {"random_only", t.random_only}};
}

TpeOptions tpe_from_json(const nlohmann::json& j, TpeOptions t) {
  t.gamma = j.value("gamma", t.gamma);
  t.candidates = j.value("candidates", t.candidates);
  t.jobs = j.value("jobs", t.jobs);
  t.startup_trials = j.value("startup_trials", t.startup_trials);
  t.random_only = j.value("random_only", t.random_only);
  return t;
}

void log_stage(std::ostream& log, const char* stage, const PipelineConfig& c, uint64_t seed) {
  log << "[" << stage << "] seed=" << seed << " config=" << c.hash()
      << " workdir=" << c.workdir.string() << "\n";
}

void require(const std::filesystem::path& p, const std::string& command) {
  if (!std::filesystem::exists(p)) {
    throw Error("missing_artifact",
                p.string() + " not found; run `opinion " + command + "` first");
  }
}

nlohmann::json split_json(const DatasetSplit& s) {
  return {{"seed", s.seed}, {"train", s.train}, {"validation", s.validation}, {"test", s.test}};
}

std::map<std::string, const Comment*> index_by_id(const std::vector<Comment>& comments) {
  std::map<std::string, const Comment*> m;
  for (const auto& c : comments) m[c.id] = &c;
  return m;
}

double macro(const std::vector<LabeledDoc>& docs, const PolarityModel& model,
             ConfusionMatrix* cm_out = nullptr,
             std::vector<PolarityPrediction>* preds_out = nullptr) {
  std::vector<Polarity> truth, pred;
  for (const auto& d : docs) {
    PolarityPrediction p = model.predict_doc(d.doc);
    truth.push_back(d.label);
    pred.push_back(p.predicted);
    if (preds_out) preds_out->push_back(p);
  }
  ConfusionMatrix cm = confusion(truth, pred);
  if (cm_out) *cm_out = cm;
  return macro_accuracy(cm, kPolarityNames);
}

struct ScorerData {
  std::vector<std::string> keys;
  std::vector<std::vector<double>> x;
  std::vector<ScoreBucket> y;
  std::vector<double> scores;
  std::vector<std::string> skipped;
};

ScorerData scorer_data(const PipelineConfig& c, const IngestData& in, const PolarityModel& pol,
                       const TopicModel& top) {
  FeatureSet fs = build_features(in.courses, in.kept, pol, top);
  std::map<std::string, const CourseRecord*> courses;
  for (const auto& cr : in.courses) courses[course_key(cr)] = &cr;
  ScorerData d;
  d.skipped = fs.skipped;
  for (const auto& f : fs.features) {
    const std::string key = course_key(f.subject_code, f.period);
    const double s = course_score(*courses.at(key), c.score_field);
    d.keys.push_back(key);
    d.x.push_back(f.vector());
    d.y.push_back(bucketize(s));
    d.scores.push_back(s);
  }
  return d;
}

double macro_present(const GbtModel& m, const std::vector<std::vector<double>>& x,
                     const std::vector<ScoreBucket>& y, ConfusionMatrix* cm_out = nullptr) {
  std::vector<int> truth, pred;
  for (std::size_t i = 0; i < x.size(); ++i) {
    truth.push_back(static_cast<int>(y[i]));
    pred.push_back(static_cast<int>(m.predict(x[i]).bucket));
  }
  ConfusionMatrix cm = confusion(truth, pred);
  if (cm_out) *cm_out = cm;
  return macro_accuracy_present(cm);
}

}  // namespace

nlohmann::json PipelineConfig::to_json() const {
  return {{"workdir", workdir.string()},
          {"comments", comments.string()},
          {"courses", courses.string()},
          {"labels", labels.string()},
          {"stopwords", stopwords.string()},
          {"topic_names", topic_names.string()},
          {"seed", seed},
          {"synth", synth.to_json()},
          {"strip_accents", strip_accents},
          {"stem", stem},
          {"polarity", polarity.to_json()},
          {"tune_budget", tune_budget},
          {"epsilon", epsilon},
          {"tpe", tpe_json(tpe)},
          {"lda", lda_json(lda)},
          {"top_words", top_words},
          {"top_comments", top_comments},
          {"gbt", gbt.to_json()},
          {"gbt_budget", gbt_budget},
          {"balance_pivot", balance_pivot},
          {"score_field", std::string(to_string(score_field))},
          {"triage_threshold", triage_threshold}};
}

PipelineConfig PipelineConfig::from_json(const nlohmann::json& j) {
  PipelineConfig c;
  try {
    c.workdir = j.value("workdir", c.workdir.string());
    c.comments = j.value("comments", std::string());
    c.courses = j.value("courses", std::string());
    c.labels = j.value("labels", std::string());
    c.stopwords = j.value("stopwords", std::string());
    c.topic_names = j.value("topic_names", std::string());
    c.seed = j.value("seed", c.seed);
    if (j.contains("synth")) c.synth = SynthConfig::from_json(j.at("synth"));
    c.strip_accents = j.value("strip_accents", c.strip_accents);
    c.stem = j.value("stem", c.stem);
    if (j.contains("polarity")) {
      nlohmann::json merged = c.polarity.to_json();
      merged.update(j.at("polarity"));
      c.polarity = PolarityHyperparams::from_json(merged);
    }
    c.tune_budget = j.value("tune_budget", c.tune_budget);
    c.epsilon = j.value("epsilon", c.epsilon);
    if (j.contains("tpe")) c.tpe = tpe_from_json(j.at("tpe"), c.tpe);
    if (j.contains("lda")) c.lda = lda_from_json(j.at("lda"), c.lda);
    c.top_words = j.value("top_words", c.top_words);
    c.top_comments = j.value("top_comments", c.top_comments);
    if (j.contains("gbt")) {
      nlohmann::json merged = c.gbt.to_json();
      merged.update(j.at("gbt"));
      c.gbt = GbtParams::from_json(merged);
    }
    c.gbt_budget = j.value("gbt_budget", c.gbt_budget);
    c.balance_pivot = j.value("balance_pivot", c.balance_pivot);
    if (j.contains("score_field")) {
      c.score_field = parse_score_field(j.at("score_field").get<std::string>());
    }
    c.triage_threshold = j.value("triage_threshold", c.triage_threshold);
  } catch (const nlohmann::json::exception& e) {
    throw Error("schema", std::string("invalid config: ") + e.what());
  }
  return c;
}

std::string PipelineConfig::hash() const { return hex64(fnv1a64(to_json().dump())); }

std::filesystem::path PipelineConfig::comments_path() const {
  return comments.empty() ? paths::data(*this) / "comments.csv" : comments;
}
std::filesystem::path PipelineConfig::courses_path() const {
  return courses.empty() ? paths::data(*this) / "courses.csv" : courses;
}
std::filesystem::path PipelineConfig::labels_path() const {
  return labels.empty() ? paths::data(*this) / "labels.csv" : labels;
}

PreprocessConfig PipelineConfig::preprocess() const {
  PreprocessConfig p = default_preprocess_config();
  p.strip_accents = strip_accents;
  p.stem = stem;
  if (!stopwords.empty()) {
    p.stopwords = load_stopwords(stopwords);
    p.stopword_source = "file:" + stopwords.filename().string();
  }
  return p;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw Error("io", "config file " + path.string() + " not found");
  }
  return PipelineConfig::from_json(read_json(path));
}

namespace paths {
std::filesystem::path data(const PipelineConfig& c) { return c.workdir / "data"; }
std::filesystem::path ingest(const PipelineConfig& c) { return c.workdir / "ingest"; }
std::filesystem::path tune(const PipelineConfig& c) { return c.workdir / "tune"; }
std::filesystem::path polarity_model(const PipelineConfig& c) { return c.workdir / "models" / "polarity"; }
std::filesystem::path topic_model(const PipelineConfig& c) { return c.workdir / "models" / "topics"; }
std::filesystem::path score_model(const PipelineConfig& c) { return c.workdir / "models" / "scorer"; }
std::filesystem::path eval(const PipelineConfig& c) { return c.workdir / "eval"; }
std::filesystem::path report(const PipelineConfig& c) { return c.workdir / "report"; }
std::filesystem::path label_log(const PipelineConfig& c) { return c.workdir / "service" / "labels.log"; }
}  // namespace paths

IngestData load_ingest(const PipelineConfig& c) {
  const auto dir = paths::ingest(c);
  require(dir / "kept_comments.csv", "ingest");
  require(dir / "split.json", "ingest");
  IngestData d;
  d.kept = load_comments(dir / "kept_comments.csv");
  if (std::filesystem::exists(dir / "labels.csv")) attach_labels(d.kept, load_labels(dir / "labels.csv"));
  d.courses = load_courses(dir / "courses.csv");
  auto j = read_json(dir / "split.json");
  d.split.seed = j.at("seed").get<uint64_t>();
  d.split.train = j.at("train").get<std::vector<std::string>>();
  d.split.validation = j.at("validation").get<std::vector<std::string>>();
  d.split.test = j.at("test").get<std::vector<std::string>>();
  return d;
}

std::vector<LabeledDoc> labeled_docs(const std::vector<Comment>& comments,
                                     const std::vector<std::string>& ids,
                                     const PreprocessConfig& prep) {
  auto by_id = index_by_id(comments);
  std::vector<LabeledDoc> out;
  out.reserve(ids.size());
  for (const auto& id : ids) {
    auto it = by_id.find(id);
    if (it == by_id.end() || !it->second->label) {
      throw Error("corrupt", "split refers to unknown or unlabeled comment '" + id + "'");
    }
    out.push_back({preprocess(*it->second, prep), *it->second->label});
  }
  return out;
}

void cmd_synth(const PipelineConfig& c, std::ostream& log) {
  SynthConfig s = c.synth;
  s.seed = c.seed;
  log_stage(log, "synth", c, s.seed);
  SynthCorpus corpus = generate_synth(s);
  save_synth(paths::data(c), corpus);
  log << "[synth] wrote " << corpus.comments.size() << " comments and " << corpus.courses.size()
      << " courses to " << paths::data(c).string() << "\n";
}

void cmd_ingest(const PipelineConfig& c, std::ostream& log) {
  const uint64_t seed = derive_seed(c.seed, "ingest");
  log_stage(log, "ingest", c, seed);
  for (const auto& p : {c.comments_path(), c.courses_path(), c.labels_path()}) {
    if (!std::filesystem::exists(p)) {
      throw Error("missing_artifact",
                  p.string() + " not found; run `opinion synth` or set the input paths");
    }
  }
  std::vector<Comment> comments = load_comments(c.comments_path());
  std::vector<CourseRecord> courses = load_courses(c.courses_path());
  std::vector<LabelRow> labels = load_labels(c.labels_path());
  attach_labels(comments, labels);
  FilterResult fr = filter_quality(comments);
  DatasetSplit sp = split(fr.kept, seed);

  const auto dir = paths::ingest(c);
  save_comments(dir / "kept_comments.csv", fr.kept);
  save_comments(dir / "dropped_comments.csv", fr.dropped);
  std::vector<LabelRow> kept_labels;
  for (const auto& k : fr.kept) {
    if (k.label) kept_labels.push_back({k.id, *k.label});
  }
  save_labels(dir / "labels.csv", kept_labels);
  save_courses(dir / "courses.csv", courses);
  write_json(dir / "split.json", split_json(sp));
  write_json(dir / "summary.json", {{"comments", comments.size()},
                                    {"kept", fr.kept.size()},
                                    {"dropped", fr.dropped.size()},
                                    {"labeled_kept", kept_labels.size()},
                                    {"courses", courses.size()},
                                    {"train", sp.train.size()},
                                    {"validation", sp.validation.size()},
                                    {"test", sp.test.size()}});
  log << "[ingest] kept " << fr.kept.size() << " of " << comments.size() << " comments; split "
      << sp.train.size() << "/" << sp.validation.size() << "/" << sp.test.size() << "\n";
}

void cmd_tune(const PipelineConfig& c, std::ostream& log) {
  const uint64_t seed = derive_seed(c.seed, "tune");
  log_stage(log, "tune", c, seed);
  IngestData in = load_ingest(c);
  const PreprocessConfig prep = c.preprocess();
  const auto train = labeled_docs(in.kept, in.split.train, prep);
  const auto val = labeled_docs(in.kept, in.split.validation, prep);

  SearchSpace space = default_polarity_space();
  SearchConfig sc;
  sc.epsilon = c.epsilon;
  sc.master_seed = seed;
  sc.tpe = c.tpe;
  auto evaluate = [&](const Assignment& a, uint64_t trial_seed) {
    PolarityHyperparams hp = apply_polarity_params(c.polarity, a);
    hp.seed = trial_seed;
    PolarityModel m = train_polarity(train, hp, prep);
    return TrialScores{macro(train, m), macro(val, m)};
  };
  SearchResult r = run_search(space, c.tune_budget, evaluate, sc);
  const auto dir = paths::tune(c);
  save_search_report(dir / "search_report.json", space, r, sc);
  write_text(dir / "search_timings.csv", timings_csv(r));
  log << "[tune] " << r.history.size() << " trials; best #" << r.best.index << " objective "
      << format_double(r.best.objective) << " (S_train " << format_double(r.best.s_train)
      << ", S_validation " << format_double(r.best.s_validation) << ")\n";
}

void cmd_train_polarity(const PipelineConfig& c, std::ostream& log) {
  const auto report = paths::tune(c) / "search_report.json";
  require(report, "tune");
  LoadedSearchReport sr = load_search_report(report);
  PolarityHyperparams hp = apply_polarity_params(c.polarity, sr.best.params);
  hp.seed = sr.best.seed;
  log_stage(log, "train-polarity", c, hp.seed);
  IngestData in = load_ingest(c);
  const PreprocessConfig prep = c.preprocess();
  const auto train = labeled_docs(in.kept, in.split.train, prep);
  PolarityModel m = train_polarity(train, hp, prep);
  m.save(paths::polarity_model(c));
  log << "[train-polarity] " << m.rows() << " embedding rows, dim " << m.dim()
      << ", final loss " << format_double(m.final_loss()) << "\n";
}

void cmd_train_topics(const PipelineConfig& c, std::ostream& log) {
  LdaParams p = c.lda;
  p.seed = derive_seed(c.seed, "topics");
  log_stage(log, "train-topics", c, p.seed);
  IngestData in = load_ingest(c);
  TopicModel m = fit_lda(preprocess_all(in.kept, c.preprocess()), p);
  m.save(paths::topic_model(c));
  log << "[train-topics] k=" << m.k() << " docs=" << m.num_docs()
      << " vocabulary=" << m.vocabulary().size() << " final log-likelihood "
      << format_double(m.log_likelihood().back()) << "\n";
}

CourseSplit split_courses(const std::vector<std::string>& keys,
                          const std::vector<ScoreBucket>& buckets, uint64_t seed) {
  Rng rng(seed);
  std::set<std::size_t> train;
  for (int b = 0; b < 3; ++b) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < keys.size(); ++i) {
      if (static_cast<int>(buckets[i]) == b) idx.push_back(i);
    }
    rng.shuffle(idx);
    const std::size_t n_train = (idx.size() * 8 + 5) / 10;
    train.insert(idx.begin(), idx.begin() + n_train);
  }
  CourseSplit s;
  for (std::size_t i = 0; i < keys.size(); ++i) (train.count(i) ? s.train : s.test).push_back(keys[i]);
  return s;
}

void cmd_train_scorer(const PipelineConfig& c, std::ostream& log) {
  const uint64_t seed = derive_seed(c.seed, "scorer");
  log_stage(log, "train-scorer", c, seed);
  require(paths::polarity_model(c) / "manifest", "train-polarity");
  require(paths::topic_model(c) / "manifest", "train-topics");
  IngestData in = load_ingest(c);
  PolarityModel pol = PolarityModel::load(paths::polarity_model(c));
  TopicModel top = TopicModel::load(paths::topic_model(c));
  ScorerData d = scorer_data(c, in, pol, top);
  CourseSplit cs = split_courses(d.keys, d.y, derive_seed(seed, "split"));
  std::set<std::string> train_keys(cs.train.begin(), cs.train.end());

  std::vector<ScoredItem> items;
  std::vector<std::vector<double>> xtr;
  std::vector<ScoreBucket> ytr;
  for (std::size_t i = 0; i < d.keys.size(); ++i) {
    if (!train_keys.count(d.keys[i])) continue;
    items.push_back({d.x[i], d.scores[i]});
    xtr.push_back(d.x[i]);
    ytr.push_back(d.y[i]);
  }

  // Hyperparameters are tuned on the pivot-balanced training courses and
  // the final model is fitted on the full training courses.
  GbtParams params = c.gbt;
  params.seed = seed;
  SearchResult best;
  if (c.gbt_budget > 0) {
    std::vector<ScoredItem> bal = balance_courses(items, c.balance_pivot, derive_seed(seed, "balance"));
    std::vector<std::size_t> order(bal.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(derive_seed(seed, "balance-split"));
    rng.shuffle(order);
    const std::size_t n_fit = (order.size() * 3 + 2) / 4;
    std::vector<std::vector<double>> xf, xv;
    std::vector<ScoreBucket> yf, yv;
    for (std::size_t i = 0; i < order.size(); ++i) {
      const auto& it = bal[order[i]];
      (i < n_fit ? xf : xv).push_back(it.features);
      (i < n_fit ? yf : yv).push_back(bucketize(it.mean_score));
    }
    SearchConfig sc;
    sc.epsilon = c.epsilon;
    sc.master_seed = derive_seed(seed, "tune");
    sc.tpe = c.tpe;
    auto evaluate = [&](const Assignment& a, uint64_t) {
      GbtModel m = train_gbt(xf, yf, apply_gbt_params(params, a));
      return TrialScores{macro_present(m, xf, yf), xv.empty() ? 0.0 : macro_present(m, xv, yv)};
    };
    best = run_search(default_gbt_space(), c.gbt_budget, evaluate, sc);
    if (!best.best.failed) params = apply_gbt_params(params, best.best.params);
    save_search_report(paths::score_model(c) / "search_report.json", default_gbt_space(), best, sc);
  }

  GbtModel m = train_gbt(xtr, ytr, params, feature_names(pol.dim(), top.k()));
  const auto dir = paths::score_model(c);
  m.save(dir);
  write_json(dir / "courses_split.json",
             {{"train", cs.train}, {"test", cs.test}, {"skipped", d.skipped}});
  log << "[train-scorer] " << xtr.size() << " training courses, " << cs.test.size()
      << " held out, " << d.skipped.size() << " without comments\n";
}

void cmd_eval(const PipelineConfig& c, std::ostream& out, std::ostream& log) {
  require(paths::polarity_model(c) / "manifest", "train-polarity");
  IngestData in = load_ingest(c);
  PolarityModel pol = PolarityModel::load(paths::polarity_model(c));
  log_stage(log, "eval", c, pol.hyperparams().seed);
  const PreprocessConfig& prep = pol.preprocess_config();

  ClassifierEval e;
  std::vector<PolarityPrediction> test_preds;
  e.s_train = macro(labeled_docs(in.kept, in.split.train, prep), pol, &e.train);
  e.s_validation = macro(labeled_docs(in.kept, in.split.validation, prep), pol, &e.validation);
  const auto test = labeled_docs(in.kept, in.split.test, prep);
  e.s_test = macro(test, pol, &e.test, &test_preds);
  std::vector<Polarity> truth;
  for (const auto& d : test) truth.push_back(d.label);
  e.curve = threshold_curve(test_preds, truth, default_thresholds());

  const auto dir = paths::eval(c);
  nlohmann::json metrics = {{"polarity", e.to_json()}, {"scorer", nullptr}};
  write_text(dir / "confusion_train.csv", confusion_csv(e.train, kPolarityNames));
  write_text(dir / "confusion_validation.csv", confusion_csv(e.validation, kPolarityNames));
  write_text(dir / "confusion_test.csv", confusion_csv(e.test, kPolarityNames));
  write_text(dir / "threshold_curve.csv", curve_csv(e.curve));
  out << "polarity macro accuracy: train " << format_double(e.s_train) << ", validation "
      << format_double(e.s_validation) << ", test " << format_double(e.s_test) << "\n";

  if (std::filesystem::exists(paths::score_model(c) / "manifest")) {
    require(paths::topic_model(c) / "manifest", "train-topics");
    TopicModel top = TopicModel::load(paths::topic_model(c));
    GbtModel gbt = GbtModel::load(paths::score_model(c));
    ScorerData d = scorer_data(c, in, pol, top);
    auto split_j = read_json(paths::score_model(c) / "courses_split.json");
    auto train_keys = split_j.at("train").get<std::set<std::string>>();
    std::vector<std::vector<double>> xtr, xte;
    std::vector<ScoreBucket> ytr, yte;
    for (std::size_t i = 0; i < d.keys.size(); ++i) {
      (train_keys.count(d.keys[i]) ? xtr : xte).push_back(d.x[i]);
      (train_keys.count(d.keys[i]) ? ytr : yte).push_back(d.y[i]);
    }
    ScorerEval se;
    se.s_train = macro_present(gbt, xtr, ytr, &se.train);
    se.s_test = xte.empty() ? 0.0 : macro_present(gbt, xte, yte, &se.test);
    se.skipped_courses = static_cast<int64_t>(d.skipped.size());
    metrics["scorer"] = se.to_json();
    write_text(dir / "scorer_confusion_train.csv", confusion_csv(se.train, kBucketNames));
    write_text(dir / "scorer_confusion_test.csv", confusion_csv(se.test, kBucketNames));
    out << "score bucket macro accuracy: train " << format_double(se.s_train) << ", test "
        << format_double(se.s_test) << "\n";
  }
  write_json(dir / "metrics.json", metrics);
}

void cmd_report(const PipelineConfig& c, std::ostream& log) {
  log_stage(log, "report", c, c.seed);
  require(paths::eval(c) / "metrics.json", "eval");
  require(paths::polarity_model(c) / "manifest", "train-polarity");
  require(paths::topic_model(c) / "manifest", "train-topics");
  IngestData in = load_ingest(c);
  PolarityModel pol = PolarityModel::load(paths::polarity_model(c));
  TopicModel top = TopicModel::load(paths::topic_model(c));
  auto metrics = read_json(paths::eval(c) / "metrics.json");
  ClassifierEval e = ClassifierEval::from_json(metrics.at("polarity"));
  std::optional<ScorerEval> se;
  if (!metrics.at("scorer").is_null()) se = ScorerEval::from_json(metrics.at("scorer"));

  std::map<int, std::string> names;
  if (!c.topic_names.empty()) names = load_topic_names(c.topic_names);
  const auto docs = preprocess_all(in.kept, pol.preprocess_config());
  auto summaries = summarize(top, docs, c.top_words, c.top_comments);
  ResponseRateTable rates = response_rates(in.courses, in.kept);
  GroupTables groups =
      group_by_topic_polarity(assign_comments(in.kept, pol, top), in.courses, rates, c.score_field);

  std::map<std::string, std::string> bundles = {
      {"polarity", hash_directory(paths::polarity_model(c))},
      {"topics", hash_directory(paths::topic_model(c))}};
  if (std::filesystem::exists(paths::score_model(c) / "manifest")) {
    bundles["scorer"] = hash_directory(paths::score_model(c));
  }
  Report r = build_report(c.seed, e, se, summaries, names, groups, rates, c.score_field, bundles);
  write_report(paths::report(c), r);
  log << "[report] " << r.topics.size() << " topics, " << r.group_scores.size()
      << " topic x polarity groups, " << rates.undefined.size() << " courses without a rate\n";
}

}  // namespace opinion
