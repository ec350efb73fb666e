#include "fixtures.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "opinion/io.h"
#include "opinion/pipeline.h"
#include "opinion/synth.h"
#include "opinion/textprep.h"

using namespace opinion;

namespace fixtures {

std::vector<LabeledDoc> gradient_docs() {
  auto doc = [](std::string id, std::vector<std::string> toks, Polarity p) {
    return LabeledDoc{TokenizedDoc{std::move(id), std::move(toks)}, p};
  };
  return {doc("g0", {"excel", "clar", "amabl"}, Polarity::positive),
          doc("g1", {"regul", "normal"}, Polarity::neutral),
          doc("g2", {"pesim", "confus", "clar"}, Polarity::negative),
          doc("g3", {"excel", "normal", "amabl", "amabl"}, Polarity::positive),
          doc("g4", {"confus", "lent"}, Polarity::negative)};
}

PolarityModel gradient_model() {
  PolarityHyperparams hp;
  hp.dim = 4;
  hp.epochs = 3;
  hp.learning_rate = 0.5;
  hp.minn = 2;
  hp.maxn = 3;
  hp.word_ngrams = 2;
  hp.seed = 17;
  return train_polarity(gradient_docs(), hp, default_preprocess_config());
}

namespace {

double rel_error(double a, double n) {
  return std::abs(a - n) / std::max({std::abs(a), std::abs(n), 1e-6});
}

// Central difference on one float parameter through `param`.
double numeric(PolarityModel& m, float& param, const std::vector<LabeledDoc>& docs, double step) {
  const float orig = param;
  param = static_cast<float>(orig + step);
  const double up = param;
  const double f_up = mean_loss(m, docs);
  param = static_cast<float>(orig - step);
  const double down = param;
  const double f_down = mean_loss(m, docs);
  param = orig;
  return (f_up - f_down) / (up - down);
}

}  // namespace

GradientCheck check_gradients(const PolarityModel& model, const std::vector<LabeledDoc>& docs,
                              double step) {
  PolarityModel m = model;
  const auto grad = loss_gradient(m, docs);
  GradientCheck out;
  auto record = [&](double analytic, float& param) {
    out.max_rel_error = std::max(out.max_rel_error, rel_error(analytic, numeric(m, param, docs, step)));
    ++out.checked;
  };
  for (std::size_t i = 0; i < m.output().size(); ++i) record(grad.output[i], m.output()[i]);
  for (std::size_t i = 0; i < m.bias().size(); ++i) record(grad.bias[i], m.bias()[i]);
  std::set<int32_t> touched;
  for (const auto& ex : docs) {
    for (int32_t u : m.units(ex.doc.tokens)) touched.insert(u);
  }
  const int d = m.dim();
  for (int32_t row : touched) {
    for (int j = 0; j < d; ++j) {
      const std::size_t i = static_cast<std::size_t>(row) * d + j;
      record(grad.input[i], m.input()[i]);
    }
  }
  return out;
}

PlantedCorpus planted_two_topics(uint64_t seed, std::size_t n_docs, std::size_t doc_len) {
  PlantedCorpus c;
  c.vocab = {{"alfa", "bravo", "charlie", "delta", "echo", "foxtrot", "golf", "hotel", "india",
              "juliet"},
             {"kilo", "lima", "mike", "november", "oscar", "papa", "quebec", "romeo", "sierra",
              "tango"}};
  Rng rng(seed);
  for (std::size_t d = 0; d < n_docs; ++d) {
    const int dominant = static_cast<int>(d % 2);
    TokenizedDoc doc{"p" + std::to_string(d), {}};
    std::vector<int> topics;
    for (std::size_t i = 0; i < doc_len; ++i) {
      const int t = rng.uniform() < 0.8 ? dominant : 1 - dominant;
      doc.tokens.push_back(c.vocab[t][rng.below(c.vocab[t].size())]);
      topics.push_back(t);
    }
    c.docs.push_back(std::move(doc));
    c.token_topic.push_back(std::move(topics));
  }
  return c;
}

double topic_purity(const TopicModel& model, const PlantedCorpus& corpus) {
  int64_t same = 0, total = 0;
  for (std::size_t d = 0; d < model.num_docs(); ++d) {
    const auto& z = model.assignments()[d];
    for (std::size_t i = 0; i < z.size(); ++i) {
      same += z[i] == corpus.token_topic[d][i];
      ++total;
    }
  }
  // The two matchings are identity and swap.
  return static_cast<double>(std::max(same, total - same)) / static_cast<double>(total);
}

bool count_tables_consistent(const TopicModel& m) {
  const int k = m.k();
  int64_t sum_k = 0;
  for (int t = 0; t < k; ++t) {
    int64_t sum_w = 0, sum_d = 0;
    for (int32_t w = 0; w < m.vocabulary().size(); ++w) sum_w += m.topic_word_count(t, w);
    for (std::size_t d = 0; d < m.num_docs(); ++d) sum_d += m.doc_topic_count(d, t);
    if (sum_w != m.topic_count(t) || sum_d != m.topic_count(t)) return false;
    sum_k += m.topic_count(t);
  }
  if (sum_k != m.total_tokens()) return false;
  for (std::size_t d = 0; d < m.num_docs(); ++d) {
    int64_t len = 0;
    for (int t = 0; t < k; ++t) len += m.doc_topic_count(d, t);
    if (len != static_cast<int64_t>(m.doc_words()[d].size())) return false;
  }
  return m.consistent();
}

namespace {

const std::vector<std::string> kFill = {"semestre", "grupo", "periodo", "lunes", "martes", "sede"};

std::string make_text(Polarity p, int topic, Rng& rng) {
  const auto& lex = synth_lexicon(p);
  const auto& top = synth_topic_words(topic);
  std::string s = "el profesor";
  for (int i = 0; i < 4; ++i) s += " " + lex[rng.below(lex.size())];
  for (int i = 0; i < 3; ++i) s += " " + top[rng.below(top.size())];
  s += " " + kFill[rng.below(kFill.size())];
  return s;
}

Polarity pick_other(Rng& rng) { return rng.uniform() < 0.5 ? Polarity::neutral : Polarity::negative; }

}  // namespace

ScorerData scorer_data(uint64_t seed, std::size_t n_courses) {
  Rng rng(derive_seed(seed, "fixture/scorer"));
  const PreprocessConfig prep = default_preprocess_config();

  // Separate labeled comments for the classifier.
  std::vector<LabeledDoc> labeled;
  for (int i = 0; i < 600; ++i) {
    Polarity p = kPolarities[i % 3];
    labeled.push_back({preprocess(make_text(p, rng.below(3), rng), prep), p});
    labeled.back().doc.comment_id = "l" + std::to_string(i);
  }
  PolarityHyperparams hp;
  hp.epochs = 10;
  hp.seed = derive_seed(seed, "fixture/polarity");
  PolarityModel pol = train_polarity(labeled, hp, prep);

  // Courses: the bucket band fixes how many comments are positive.
  std::vector<CourseRecord> courses;
  std::vector<Comment> comments;
  std::size_t next_id = 0;
  for (std::size_t c = 0; c < n_courses; ++c) {
    const int n = 8 + static_cast<int>(rng.below(7));
    auto band = [&](double lo, double hi) {
      const int a = static_cast<int>(std::ceil(lo * n)), b = static_cast<int>(std::floor(hi * n));
      return static_cast<int>(rng.between(a, b));
    };
    const int n_pos = c % 3 == 0 ? band(0.85, 1.0) : c % 3 == 1 ? band(0.6, 0.72) : band(0.15, 0.45);
    const double score = 2.5 + 2.5 * static_cast<double>(n_pos) / n;
    CourseRecord course{"F" + std::to_string(c), "2020-1", 40, score, score, score,
                        EducationLevel::undergraduate};
    for (int i = 0; i < n; ++i) {
      Polarity p = i < n_pos ? Polarity::positive : pick_other(rng);
      comments.push_back({"f" + std::to_string(next_id++), course.subject_code, course.period,
                          make_text(p, rng.below(3), rng), p});
    }
    courses.push_back(course);
  }

  LdaParams lp;
  lp.k = 3;
  lp.iterations = 100;
  lp.seed = derive_seed(seed, "fixture/topics");
  TopicModel topics = fit_lda(preprocess_all(comments, prep), lp);

  FeatureSet fs = build_features(courses, comments, pol, topics);
  std::vector<std::string> keys;
  std::vector<ScoreBucket> buckets;
  for (const auto& f : fs.features) {
    keys.push_back(course_key(f.subject_code, f.period));
    const auto it = std::find_if(courses.begin(), courses.end(), [&](const CourseRecord& r) {
      return r.subject_code == f.subject_code && r.period == f.period;
    });
    buckets.push_back(bucketize(it->score_evaluation));
  }
  CourseSplit split = split_courses(keys, buckets, derive_seed(seed, "fixture/split"));
  std::set<std::string> test(split.test.begin(), split.test.end());
  ScorerData out;
  for (std::size_t i = 0; i < fs.features.size(); ++i) {
    const bool is_test = test.count(keys[i]) > 0;
    (is_test ? out.x_test : out.x_train).push_back(fs.features[i].vector());
    (is_test ? out.y_test : out.y_train).push_back(buckets[i]);
  }
  out.names = feature_names(pol.dim(), topics.k());
  return out;
}

std::string artifact_digest(const std::filesystem::path& dir) {
  std::vector<std::string> lines;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file() || e.path().filename() == "search_timings.csv") continue;
    lines.push_back(std::filesystem::relative(e.path(), dir).generic_string() + " " +
                    opinion::hex64(opinion::fnv1a64(opinion::read_text(e.path()))));
  }
  std::sort(lines.begin(), lines.end());
  std::string out;
  for (const auto& l : lines) out += l + "\n";
  return out;
}

}  // namespace fixtures
