#include "opinion/scorer.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "opinion/io.h"

namespace opinion {

std::string_view to_string(ScoreBucket b) {
  switch (b) {
    case ScoreBucket::very_high: return "very_high";
    case ScoreBucket::high: return "high";
    case ScoreBucket::moderate: return "moderate";
  }
  return "?";
}

std::optional<ScoreBucket> parse_bucket(std::string_view s) {
  if (s == "very_high") return ScoreBucket::very_high;
  if (s == "high") return ScoreBucket::high;
  if (s == "moderate") return ScoreBucket::moderate;
  return std::nullopt;
}

ScoreBucket bucketize(double mean_score) {
  if (!(mean_score >= 1.0 && mean_score <= 5.0)) {
    throw Error("invalid_argument", "score " + format_double(mean_score) + " outside [1, 5]");
  }
  if (mean_score >= 4.5) return ScoreBucket::very_high;
  if (mean_score >= 4.0) return ScoreBucket::high;
  return ScoreBucket::moderate;
}

std::string_view to_string(ScoreField f) {
  switch (f) {
    case ScoreField::pedagogy: return "pedagogy";
    case ScoreField::evaluation: return "evaluation";
    case ScoreField::interpersonal: return "interpersonal";
  }
  return "?";
}

ScoreField parse_score_field(std::string_view s) {
  if (s == "pedagogy") return ScoreField::pedagogy;
  if (s == "evaluation") return ScoreField::evaluation;
  if (s == "interpersonal") return ScoreField::interpersonal;
  throw Error("invalid_argument", "unknown score field '" + std::string(s) +
                                      "' (expected pedagogy, evaluation or interpersonal)");
}

double course_score(const CourseRecord& course, ScoreField field) {
  switch (field) {
    case ScoreField::pedagogy: return course.score_pedagogy;
    case ScoreField::evaluation: return course.score_evaluation;
    case ScoreField::interpersonal: return course.score_interpersonal;
  }
  return course.score_evaluation;
}

std::vector<double> CourseFeatures::vector() const {
  std::vector<double> v = embedding;
  v.insert(v.end(), topic_probs.begin(), topic_probs.end());
  return v;
}

FeatureSet build_features(const std::vector<CourseRecord>& courses,
                          const std::vector<Comment>& kept_comments,
                          const PolarityModel& polarity, const TopicModel& topics) {
  std::map<std::string, std::vector<const Comment*>> by_course;
  for (const auto& c : kept_comments) by_course[course_key(c)].push_back(&c);

  FeatureSet out;
  const int d = polarity.dim();
  const int k = topics.k();
  for (const auto& course : courses) {
    auto it = by_course.find(course_key(course));
    if (it == by_course.end()) {
      out.skipped.push_back(course_key(course));
      continue;
    }
    CourseFeatures f;
    f.subject_code = course.subject_code;
    f.period = course.period;
    f.embedding.assign(d, 0.0);
    f.topic_probs.assign(k, 0.0);
    for (const Comment* c : it->second) {
      TokenizedDoc doc = preprocess(*c, polarity.preprocess_config());
      auto e = polarity.embed(doc);
      auto t = topics.doc_topics(doc);
      for (int i = 0; i < d; ++i) f.embedding[i] += e[i];
      for (int i = 0; i < k; ++i) f.topic_probs[i] += t[i];
    }
    f.n_comments = static_cast<int64_t>(it->second.size());
    for (auto& v : f.embedding) v /= static_cast<double>(f.n_comments);
    for (auto& v : f.topic_probs) v /= static_cast<double>(f.n_comments);
    out.features.push_back(std::move(f));
  }
  return out;
}

std::vector<std::string> feature_names(int embedding_dim, int num_topics) {
  std::vector<std::string> names;
  for (int i = 0; i < embedding_dim; ++i) names.push_back("emb_" + std::to_string(i));
  for (int i = 0; i < num_topics; ++i) names.push_back("topic_" + std::to_string(i));
  return names;
}

nlohmann::json GbtParams::to_json() const {
  return {{"rounds", rounds},
          {"max_depth", max_depth},
          {"learning_rate", learning_rate},
          {"lambda", lambda},
          {"min_child_weight", min_child_weight},
          {"seed", seed}};
}

GbtParams GbtParams::from_json(const nlohmann::json& j) {
  GbtParams p;
  p.rounds = j.value("rounds", p.rounds);
  p.max_depth = j.value("max_depth", p.max_depth);
  p.learning_rate = j.value("learning_rate", p.learning_rate);
  p.lambda = j.value("lambda", p.lambda);
  p.min_child_weight = j.value("min_child_weight", p.min_child_weight);
  p.seed = j.value("seed", p.seed);
  return p;
}

double GbtTree::eval(std::span<const double> x) const {
  int32_t n = 0;
  while (feature[n] >= 0) n = x[feature[n]] < threshold[n] ? left[n] : right[n];
  return value[n];
}

std::array<double, 3> GbtModel::raw_scores(std::span<const double> x) const {
  std::array<double, 3> s{};
  for (std::size_t t = 0; t < trees_.size(); ++t) s[t % 3] += trees_[t].eval(x);
  return s;
}

namespace {

std::array<double, 3> softmax(const std::array<double, 3>& z) {
  double m = std::max({z[0], z[1], z[2]});
  std::array<double, 3> p;
  double sum = 0.0;
  for (int c = 0; c < 3; ++c) sum += p[c] = std::exp(z[c] - m);
  for (auto& v : p) v /= sum;
  return p;
}

struct TreeBuilder {
  const std::vector<std::vector<double>>& x;
  const std::vector<double>& g;
  const std::vector<double>& h;
  const GbtParams& p;
  int num_features;
  GbtTree tree;

  int32_t add_leaf(double gsum, double hsum) {
    tree.feature.push_back(-1);
    tree.threshold.push_back(0.0);
    tree.left.push_back(-1);
    tree.right.push_back(-1);
    tree.value.push_back(-gsum / (hsum + p.lambda) * p.learning_rate);
    return static_cast<int32_t>(tree.feature.size() - 1);
  }

  int32_t build(std::vector<std::size_t>& rows, int depth) {
    double gsum = 0.0, hsum = 0.0;
    for (auto r : rows) {
      gsum += g[r];
      hsum += h[r];
    }
    if (depth >= p.max_depth || rows.size() < 2) return add_leaf(gsum, hsum);

    const double parent = gsum * gsum / (hsum + p.lambda);
    double best_gain = 1e-12;
    int best_feature = -1;
    double best_threshold = 0.0;
    std::vector<std::size_t> order = rows;
    for (int f = 0; f < num_features; ++f) {
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return x[a][f] < x[b][f]; });
      double gl = 0.0, hl = 0.0;
      for (std::size_t i = 0; i + 1 < order.size(); ++i) {
        gl += g[order[i]];
        hl += h[order[i]];
        const double v = x[order[i]][f], next = x[order[i + 1]][f];
        if (!(v < next)) continue;
        const double gr = gsum - gl, hr = hsum - hl;
        if (hl < p.min_child_weight || hr < p.min_child_weight) continue;
        double gain = gl * gl / (hl + p.lambda) + gr * gr / (hr + p.lambda) - parent;
        if (gain > best_gain) {
          best_gain = gain;
          best_feature = f;
          best_threshold = v + (next - v) / 2.0;
        }
      }
    }
    if (best_feature < 0) return add_leaf(gsum, hsum);

    std::vector<std::size_t> lrows, rrows;
    for (auto r : rows) (x[r][best_feature] < best_threshold ? lrows : rrows).push_back(r);
    const int32_t node = static_cast<int32_t>(tree.feature.size());
    tree.feature.push_back(best_feature);
    tree.threshold.push_back(best_threshold);
    tree.left.push_back(-1);
    tree.right.push_back(-1);
    tree.value.push_back(0.0);
    int32_t l = build(lrows, depth + 1);
    int32_t r = build(rrows, depth + 1);
    tree.left[node] = l;
    tree.right[node] = r;
    return node;
  }
};

}  // namespace

BucketPrediction GbtModel::predict(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != num_features_) {
    throw Error("invalid_argument", "feature dimension " + std::to_string(x.size()) +
                                        " does not match model dimension " +
                                        std::to_string(num_features_));
  }
  BucketPrediction out;
  out.probabilities = softmax(raw_scores(x));
  int best = 0;
  for (int c = 1; c < 3; ++c) {
    if (out.probabilities[c] > out.probabilities[best]) best = c;
  }
  out.bucket = static_cast<ScoreBucket>(best);
  return out;
}

double mean_log_loss(const GbtModel& model, const std::vector<std::vector<double>>& x,
                     const std::vector<ScoreBucket>& y) {
  double loss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    auto p = model.predict(x[i]).probabilities;
    loss -= std::log(std::max(p[static_cast<int>(y[i])], 1e-300));
  }
  return x.empty() ? 0.0 : loss / static_cast<double>(x.size());
}

GbtModel train_gbt(const std::vector<std::vector<double>>& x, const std::vector<ScoreBucket>& y,
                   const GbtParams& params, std::vector<std::string> names) {
  if (x.size() != y.size()) {
    throw Error("invalid_argument", "train_gbt: features and buckets differ in length");
  }
  if (x.empty()) throw Error("training", "train_gbt: no training rows");
  if (params.rounds < 0 || params.max_depth < 0 || !(params.learning_rate > 0.0) ||
      !(params.lambda >= 0.0)) {
    throw Error("invalid_argument", "train_gbt: invalid hyperparameters");
  }
  const int nf = static_cast<int>(x[0].size());
  for (const auto& row : x) {
    if (static_cast<int>(row.size()) != nf) {
      throw Error("invalid_argument", "train_gbt: ragged feature rows");
    }
  }
  std::array<int, 3> present{};
  for (auto b : y) present[static_cast<int>(b)] = 1;
  if (present[0] + present[1] + present[2] < 2) {
    throw Error("training", "train_gbt: at least two distinct buckets are required");
  }
  if (!names.empty() && static_cast<int>(names.size()) != nf) {
    throw Error("invalid_argument", "train_gbt: feature name count mismatch");
  }

  GbtModel m;
  m.params_ = params;
  m.num_features_ = nf;
  m.names_ = std::move(names);

  const std::size_t n = x.size();
  std::vector<std::array<double, 3>> score(n, std::array<double, 3>{});
  auto loss_now = [&]() {
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      loss -= std::log(std::max(softmax(score[i])[static_cast<int>(y[i])], 1e-300));
    }
    return loss / static_cast<double>(n);
  };
  m.training_loss_.push_back(loss_now());

  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), 0);
  std::vector<double> g(n), h(n);
  for (int round = 0; round < params.rounds; ++round) {
    std::vector<std::array<double, 3>> prob(n);
    for (std::size_t i = 0; i < n; ++i) prob[i] = softmax(score[i]);
    for (int c = 0; c < 3; ++c) {
      for (std::size_t i = 0; i < n; ++i) {
        const double pc = prob[i][c];
        g[i] = pc - (static_cast<int>(y[i]) == c ? 1.0 : 0.0);
        h[i] = std::max(2.0 * pc * (1.0 - pc), 1e-16);
      }
      TreeBuilder b{x, g, h, params, nf, {}};
      std::vector<std::size_t> rows = all;
      b.build(rows, 0);
      for (std::size_t i = 0; i < n; ++i) score[i][c] += b.tree.eval(x[i]);
      m.trees_.push_back(std::move(b.tree));
    }
    m.training_loss_.push_back(loss_now());
  }
  return m;
}

void GbtModel::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  std::vector<int32_t> offsets{0}, feat, left, right;
  std::vector<double> thr, val;
  for (const auto& t : trees_) {
    feat.insert(feat.end(), t.feature.begin(), t.feature.end());
    left.insert(left.end(), t.left.begin(), t.left.end());
    right.insert(right.end(), t.right.begin(), t.right.end());
    thr.insert(thr.end(), t.threshold.begin(), t.threshold.end());
    val.insert(val.end(), t.value.begin(), t.value.end());
    offsets.push_back(static_cast<int32_t>(feat.size()));
  }
  write_i32(dir / "tree_offsets.i32", offsets);
  write_i32(dir / "node_feature.i32", feat);
  write_i32(dir / "node_left.i32", left);
  write_i32(dir / "node_right.i32", right);
  write_f64(dir / "node_threshold.f64", thr);
  write_f64(dir / "node_value.f64", val);
  const std::size_t nodes = feat.size();
  nlohmann::json mf = {
      {"format", "opinion-gbt"},
      {"format_version", kGbtFormatVersion},
      {"params", params_.to_json()},
      {"num_features", num_features_},
      {"feature_names", names_},
      {"classes", {"very_high", "high", "moderate"}},
      {"num_trees", trees_.size()},
      {"num_nodes", nodes},
      {"matrices",
       {{"tree_offsets", matrix_entry("tree_offsets.i32", "i32", 1, offsets.size())},
        {"node_feature", matrix_entry("node_feature.i32", "i32", 1, nodes)},
        {"node_left", matrix_entry("node_left.i32", "i32", 1, nodes)},
        {"node_right", matrix_entry("node_right.i32", "i32", 1, nodes)},
        {"node_threshold", matrix_entry("node_threshold.f64", "f64", 1, nodes)},
        {"node_value", matrix_entry("node_value.f64", "f64", 1, nodes)}}},
      {"training_loss", training_loss_}};
  write_json(dir / "manifest", mf);
}

GbtModel GbtModel::load(const std::filesystem::path& dir) {
  if (!std::filesystem::exists(dir / "manifest")) {
    throw Error("missing_artifact", "no score model at " + dir.string());
  }
  nlohmann::json mf = read_json(dir / "manifest");
  try {
    if (mf.value("format", "") != "opinion-gbt") {
      throw Error("version", dir.string() + ": not a score model bundle");
    }
    if (mf.at("format_version").get<int>() != kGbtFormatVersion) {
      throw Error("version", dir.string() + ": unsupported score model format version");
    }
    GbtModel m;
    m.params_ = GbtParams::from_json(mf.at("params"));
    m.num_features_ = mf.at("num_features").get<int>();
    m.names_ = mf.at("feature_names").get<std::vector<std::string>>();
    m.training_loss_ = mf.at("training_loss").get<std::vector<double>>();
    const std::size_t trees = mf.at("num_trees").get<std::size_t>();
    const std::size_t nodes = mf.at("num_nodes").get<std::size_t>();
    if (trees % 3 != 0) throw Error("corrupt", dir.string() + ": tree count not a multiple of 3");
    auto offsets = read_i32(dir / "tree_offsets.i32", trees + 1);
    auto feat = read_i32(dir / "node_feature.i32", nodes);
    auto left = read_i32(dir / "node_left.i32", nodes);
    auto right = read_i32(dir / "node_right.i32", nodes);
    auto thr = read_f64(dir / "node_threshold.f64", nodes);
    auto val = read_f64(dir / "node_value.f64", nodes);
    for (std::size_t t = 0; t < trees; ++t) {
      const int32_t a = offsets[t], b = offsets[t + 1];
      if (a < 0 || b <= a || static_cast<std::size_t>(b) > nodes) {
        throw Error("corrupt", dir.string() + ": bad tree offsets");
      }
      GbtTree tree;
      tree.feature.assign(feat.begin() + a, feat.begin() + b);
      tree.left.assign(left.begin() + a, left.begin() + b);
      tree.right.assign(right.begin() + a, right.begin() + b);
      tree.threshold.assign(thr.begin() + a, thr.begin() + b);
      tree.value.assign(val.begin() + a, val.begin() + b);
      const int32_t size = b - a;
      for (int32_t i = 0; i < size; ++i) {
        if (tree.feature[i] >= m.num_features_) {
          throw Error("corrupt", dir.string() + ": split feature out of range");
        }
        if (tree.feature[i] >= 0 && (tree.left[i] <= i || tree.left[i] >= size ||
                                     tree.right[i] <= i || tree.right[i] >= size)) {
          throw Error("corrupt", dir.string() + ": bad child index");
        }
      }
      m.trees_.push_back(std::move(tree));
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error("corrupt", dir.string() + ": malformed manifest: " + e.what());
  }
}

SearchSpace default_gbt_space() {
  return SearchSpace{{Dimension::integer("rounds", 20, 200),
                      Dimension::integer("max_depth", 1, 5),
                      Dimension::log_uniform("learning_rate", 0.02, 0.5),
                      Dimension::log_uniform("lambda", 0.1, 10.0)}};
}

GbtParams apply_gbt_params(GbtParams base, const Assignment& a) {
  if (a.has("rounds")) base.rounds = static_cast<int>(a.integer("rounds"));
  if (a.has("max_depth")) base.max_depth = static_cast<int>(a.integer("max_depth"));
  if (a.has("learning_rate")) base.learning_rate = a.real("learning_rate");
  if (a.has("lambda")) base.lambda = a.real("lambda");
  return base;
}

}  // namespace opinion
