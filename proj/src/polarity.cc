#include "opinion/polarity.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "opinion/io.h"

namespace opinion {

nlohmann::json PolarityHyperparams::to_json() const {
  return {{"learning_rate", learning_rate}, {"epochs", epochs},     {"dim", dim},
          {"word_ngrams", word_ngrams},     {"minn", minn},         {"maxn", maxn},
          {"min_count", min_count},         {"seed", seed},         {"class_weights", class_weights}};
}

PolarityHyperparams PolarityHyperparams::from_json(const nlohmann::json& j) {
  PolarityHyperparams h;
  h.learning_rate = j.value("learning_rate", h.learning_rate);
  h.epochs = j.value("epochs", h.epochs);
  h.dim = j.value("dim", h.dim);
  h.word_ngrams = j.value("word_ngrams", h.word_ngrams);
  h.minn = j.value("minn", h.minn);
  h.maxn = j.value("maxn", h.maxn);
  h.min_count = j.value("min_count", h.min_count);
  h.seed = j.value("seed", h.seed);
  h.class_weights = j.value("class_weights", h.class_weights);
  return h;
}

PolarityPrediction prediction_from_logits(const std::array<double, 3>& logits) {
  double mx = std::max({logits[0], logits[1], logits[2]});
  std::array<double, 3> e{};
  double z = 0.0;
  for (int k = 0; k < 3; ++k) {
    e[k] = std::exp(logits[k] - mx);
    z += e[k];
  }
  PolarityPrediction p;
  int best = 0;
  for (int k = 0; k < 3; ++k) {
    p.probabilities[k] = e[k] / z;
    if (p.probabilities[k] > p.probabilities[best]) best = k;
  }
  p.predicted = kPolarities[best];
  p.confidence = p.probabilities[best];
  return p;
}

namespace {

bool subwords_enabled(const PolarityHyperparams& hp) { return hp.minn > 0 && hp.maxn >= hp.minn; }

void validate(const PolarityHyperparams& hp) {
  if (hp.dim < 1) throw Error("invalid_argument", "embedding dimension must be >= 1");
  if (hp.epochs < 0) throw Error("invalid_argument", "epochs must be >= 0");
  if (!(hp.learning_rate >= 0.0) || !std::isfinite(hp.learning_rate)) {
    throw Error("invalid_argument", "learning rate must be finite and >= 0");
  }
  if (hp.word_ngrams < 1 || hp.word_ngrams > 2) {
    throw Error("invalid_argument", "word_ngrams must be 1 or 2");
  }
  bool disabled = hp.minn == 0 && hp.maxn == 0;
  if (!disabled && (hp.minn < 1 || hp.maxn < hp.minn)) {
    throw Error("invalid_argument", "char n-gram range must be 0..0 or 1 <= minn <= maxn");
  }
  if (hp.min_count < 1) throw Error("invalid_argument", "min_count must be >= 1");
}

}  // namespace

std::vector<int32_t> PolarityModel::units(const std::vector<std::string>& tokens) const {
  std::vector<int32_t> out;
  const int32_t bigram_base = words_.size();
  const int32_t ngram_base = bigram_base + bigrams_.size();
  const bool subwords = subwords_enabled(hp_);
  for (const auto& tok : tokens) {
    int32_t w = words_.index(tok);
    if (w >= 0) out.push_back(w);
    if (subwords) {
      for (const auto& g : opinion::char_ngrams(tok, hp_.minn, hp_.maxn)) {
        int32_t id = char_ngrams_.index(g);
        if (id >= 0) out.push_back(ngram_base + id);
      }
    }
  }
  if (hp_.word_ngrams >= 2) {
    for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
      int32_t id = bigrams_.index(tokens[i] + " " + tokens[i + 1]);
      if (id >= 0) out.push_back(bigram_base + id);
    }
  }
  return out;
}

std::vector<double> PolarityModel::embed_units(std::span<const int32_t> units) const {
  const int d = hp_.dim;
  std::vector<double> h(d, 0.0);
  if (units.empty()) return h;
  for (int32_t u : units) {
    const float* row = input_.data() + static_cast<std::size_t>(u) * d;
    for (int j = 0; j < d; ++j) h[j] += row[j];
  }
  const double inv = 1.0 / static_cast<double>(units.size());
  for (double& v : h) v *= inv;
  return h;
}

std::vector<double> PolarityModel::embed(const TokenizedDoc& doc) const {
  return embed_units(units(doc.tokens));
}

std::array<double, 3> PolarityModel::logits(std::span<const double> hidden) const {
  const int d = hp_.dim;
  std::array<double, 3> z{};
  for (int k = 0; k < 3; ++k) {
    double s = bias_[k];
    const float* w = output_.data() + static_cast<std::size_t>(k) * d;
    for (int j = 0; j < d; ++j) s += w[j] * hidden[j];
    z[k] = s;
  }
  return z;
}

PolarityPrediction PolarityModel::predict_doc(const TokenizedDoc& doc) const {
  return prediction_from_logits(logits(embed(doc)));
}

PolarityPrediction PolarityModel::predict(std::string_view text) const {
  return predict_doc(preprocess(text, prep_));
}

std::array<double, 3> class_weights_for(const std::vector<LabeledDoc>& data, bool enabled) {
  std::array<double, 3> w{1.0, 1.0, 1.0};
  if (!enabled || data.empty()) return w;
  std::array<std::size_t, 3> counts{};
  for (const auto& ex : data) ++counts[static_cast<int>(ex.label)];
  for (int k = 0; k < 3; ++k) {
    w[k] = counts[k] ? static_cast<double>(data.size()) / (3.0 * counts[k]) : 0.0;
  }
  return w;
}

namespace {

// Cross-entropy of one example; fills g = dL/dlogits (weighted).
double example_loss(const std::array<double, 3>& z, int y, double weight,
                    std::array<double, 3>& g) {
  PolarityPrediction p = prediction_from_logits(z);
  for (int k = 0; k < 3; ++k) g[k] = weight * (p.probabilities[k] - (k == y ? 1.0 : 0.0));
  double mx = std::max({z[0], z[1], z[2]});
  double lse = mx + std::log(std::exp(z[0] - mx) + std::exp(z[1] - mx) + std::exp(z[2] - mx));
  return weight * (lse - z[y]);
}

}  // namespace

PolarityModel train_polarity(const std::vector<LabeledDoc>& data, const PolarityHyperparams& hp,
                             const PreprocessConfig& prep, const TrainOptions& options) {
  validate(hp);
  std::array<std::size_t, 3> counts{};
  for (const auto& ex : data) ++counts[static_cast<int>(ex.label)];
  for (int k = 0; k < 3; ++k) {
    if (counts[k] == 0) {
      throw Error("training", "class '" + std::string(to_string(kPolarities[k])) +
                                  "' is absent from the training data");
    }
  }

  PolarityModel m;
  m.hp_ = hp;
  m.prep_ = prep;

  std::unordered_map<std::string, int64_t> word_counts;
  std::unordered_map<std::string, int64_t> bigram_counts;
  for (const auto& ex : data) {
    const auto& t = ex.doc.tokens;
    for (const auto& w : t) ++word_counts[w];
    if (hp.word_ngrams >= 2) {
      for (std::size_t i = 0; i + 1 < t.size(); ++i) ++bigram_counts[t[i] + " " + t[i + 1]];
    }
  }
  if (word_counts.empty()) throw Error("training", "training data contains no tokens");
  m.words_ = vocabulary_from_counts(word_counts, hp.min_count);
  if (!bigram_counts.empty()) {
    bool any = std::any_of(bigram_counts.begin(), bigram_counts.end(),
                           [&](const auto& kv) { return kv.second >= hp.min_count; });
    if (any) m.bigrams_ = vocabulary_from_counts(bigram_counts, hp.min_count);
  }
  if (subwords_enabled(hp)) {
    std::unordered_map<std::string, int64_t> ngram_counts;
    for (int32_t i = 0; i < m.words_.size(); ++i) {
      for (const auto& g : char_ngrams(m.words_.token(i), hp.minn, hp.maxn)) {
        ngram_counts[g] += m.words_.count(i);
      }
    }
    m.char_ngrams_ = vocabulary_from_counts(ngram_counts, 1);
  }

  const int d = hp.dim;
  Rng rng(derive_seed(hp.seed, "polarity/train"));
  m.input_.resize(static_cast<std::size_t>(m.rows()) * d);
  const double bound = 1.0 / (2.0 * d);
  for (float& v : m.input_) v = static_cast<float>(rng.uniform(-bound, bound));
  m.output_.assign(3 * static_cast<std::size_t>(d), 0.0f);
  m.bias_.assign(3, 0.0f);

  std::vector<std::vector<int32_t>> units;
  units.reserve(data.size());
  for (const auto& ex : data) units.push_back(m.units(ex.doc.tokens));
  const std::array<double, 3> cw = class_weights_for(data, hp.class_weights);

  auto epoch_loss = [&] {
    double total = 0.0;
    std::array<double, 3> g{};
    for (std::size_t i = 0; i < data.size(); ++i) {
      auto h = m.embed_units(units[i]);
      int y = static_cast<int>(data[i].label);
      total += example_loss(m.logits(h), y, cw[y], g);
    }
    return total / static_cast<double>(data.size());
  };

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  const double total_steps = static_cast<double>(hp.epochs) * static_cast<double>(data.size());
  double step = 0.0;
  std::vector<double> grad_h(d);
  std::array<double, 3> g{};
  for (int epoch = 0; epoch < hp.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t i : order) {
      const double lr = hp.learning_rate * (1.0 - step / total_steps);
      step += 1.0;
      const auto& u = units[i];
      std::vector<double> h = m.embed_units(u);
      int y = static_cast<int>(data[i].label);
      example_loss(m.logits(h), y, cw[y], g);

      std::fill(grad_h.begin(), grad_h.end(), 0.0);
      for (int k = 0; k < 3; ++k) {
        float* w = m.output_.data() + static_cast<std::size_t>(k) * d;
        for (int j = 0; j < d; ++j) {
          grad_h[j] += g[k] * w[j];
          w[j] = static_cast<float>(w[j] - lr * g[k] * h[j]);
        }
        m.bias_[k] = static_cast<float>(m.bias_[k] - lr * g[k]);
      }
      if (!u.empty()) {
        const double scale = lr / static_cast<double>(u.size());
        for (int32_t id : u) {
          float* row = m.input_.data() + static_cast<std::size_t>(id) * d;
          for (int j = 0; j < d; ++j) row[j] = static_cast<float>(row[j] - scale * grad_h[j]);
        }
      }
    }
    if (options.track_epoch_loss) m.epoch_losses_.push_back(epoch_loss());
  }
  m.final_loss_ = m.epoch_losses_.empty() ? epoch_loss() : m.epoch_losses_.back();
  for (float v : m.input_) {
    if (!std::isfinite(v)) throw Error("training", "training diverged (non-finite embedding)");
  }
  for (float v : m.output_) {
    if (!std::isfinite(v)) throw Error("training", "training diverged (non-finite weights)");
  }
  return m;
}

PolarityGradient loss_gradient(const PolarityModel& model, const std::vector<LabeledDoc>& data) {
  const int d = model.dim();
  PolarityGradient grad;
  grad.input.assign(model.input().size(), 0.0);
  grad.output.assign(model.output().size(), 0.0);
  grad.bias.assign(3, 0.0);
  if (data.empty()) return grad;
  const auto cw = class_weights_for(data, model.hyperparams().class_weights);
  const double inv_n = 1.0 / static_cast<double>(data.size());
  std::array<double, 3> g{};
  auto out = model.output();
  for (const auto& ex : data) {
    auto u = model.units(ex.doc.tokens);
    auto h = model.embed_units(u);
    int y = static_cast<int>(ex.label);
    grad.loss += inv_n * example_loss(model.logits(h), y, cw[y], g);
    std::vector<double> grad_h(d, 0.0);
    for (int k = 0; k < 3; ++k) {
      grad.bias[k] += inv_n * g[k];
      for (int j = 0; j < d; ++j) {
        grad.output[k * d + j] += inv_n * g[k] * h[j];
        grad_h[j] += g[k] * out[k * d + j];
      }
    }
    for (int32_t id : u) {
      for (int j = 0; j < d; ++j) {
        grad.input[static_cast<std::size_t>(id) * d + j] += inv_n * grad_h[j] / u.size();
      }
    }
  }
  return grad;
}

double mean_loss(const PolarityModel& model, const std::vector<LabeledDoc>& data) {
  if (data.empty()) return 0.0;
  const auto cw = class_weights_for(data, model.hyperparams().class_weights);
  std::array<double, 3> g{};
  double total = 0.0;
  for (const auto& ex : data) {
    int y = static_cast<int>(ex.label);
    total += example_loss(model.logits(model.embed(ex.doc)), y, cw[y], g);
  }
  return total / static_cast<double>(data.size());
}

void PolarityModel::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  write_text(dir / "words.tsv", words_.to_tsv());
  write_text(dir / "bigrams.tsv", bigrams_.to_tsv());
  write_text(dir / "char_ngrams.tsv", char_ngrams_.to_tsv());
  write_f32(dir / "input.f32", input_);
  write_f32(dir / "output.f32", output_);
  write_f32(dir / "bias.f32", bias_);
  nlohmann::json classes = nlohmann::json::array();
  for (auto p : kPolarities) classes.push_back(to_string(p));
  nlohmann::json manifest = {
      {"format", "opinion-polarity"},
      {"format_version", kPolarityFormatVersion},
      {"dim", hp_.dim},
      {"class_order", classes},
      {"hyperparameters", hp_.to_json()},
      {"preprocess", prep_.to_json()},
      {"vocabularies",
       {{"words", {{"file", "words.tsv"}, {"size", words_.size()}}},
        {"bigrams", {{"file", "bigrams.tsv"}, {"size", bigrams_.size()}}},
        {"char_ngrams", {{"file", "char_ngrams.tsv"}, {"size", char_ngrams_.size()}}}}},
      {"matrices",
       {{"input", matrix_entry("input.f32", "f32", rows(), hp_.dim)},
        {"output", matrix_entry("output.f32", "f32", 3, hp_.dim)},
        {"bias", matrix_entry("bias.f32", "f32", 1, 3)}}},
      {"training", {{"final_loss", final_loss_}, {"epoch_losses", epoch_losses_}}}};
  write_json(dir / "manifest", manifest);
}

PolarityModel PolarityModel::load(const std::filesystem::path& dir) {
  if (!std::filesystem::exists(dir / "manifest")) {
    throw Error("missing_artifact", "no polarity model at " + dir.string());
  }
  nlohmann::json mf = read_json(dir / "manifest");
  try {
    if (mf.value("format", "") != "opinion-polarity") {
      throw Error("version", dir.string() + ": not a polarity model bundle");
    }
    int version = mf.at("format_version").get<int>();
    if (version != kPolarityFormatVersion) {
      throw Error("version", dir.string() + ": unsupported polarity format version " +
                                 std::to_string(version) + " (expected " +
                                 std::to_string(kPolarityFormatVersion) + ")");
    }
    PolarityModel m;
    m.hp_ = PolarityHyperparams::from_json(mf.at("hyperparameters"));
    m.prep_ = PreprocessConfig::from_json(mf.at("preprocess"));
    if (mf.at("dim").get<int>() != m.hp_.dim) throw Error("corrupt", "dimension mismatch in manifest");
    const auto& vocabs = mf.at("vocabularies");
    auto load_vocab = [&](const char* name) {
      const auto& v = vocabs.at(name);
      Vocabulary voc = Vocabulary::from_tsv(read_text(dir / v.at("file").get<std::string>()));
      if (voc.size() != v.at("size").get<int32_t>()) {
        throw Error("corrupt", dir.string() + ": vocabulary '" + name + "' size mismatch");
      }
      return voc;
    };
    m.words_ = load_vocab("words");
    m.bigrams_ = load_vocab("bigrams");
    m.char_ngrams_ = load_vocab("char_ngrams");
    const auto& mats = mf.at("matrices");
    auto load_matrix = [&](const char* name, std::size_t expected) {
      const auto& e = mats.at(name);
      if (e.at("dtype").get<std::string>() != "f32" || e.at("length").get<std::size_t>() != expected) {
        throw Error("corrupt", dir.string() + ": matrix '" + name + "' shape mismatch");
      }
      return read_f32(dir / e.at("file").get<std::string>(), expected);
    };
    m.input_ = load_matrix("input", static_cast<std::size_t>(m.rows()) * m.hp_.dim);
    m.output_ = load_matrix("output", 3 * static_cast<std::size_t>(m.hp_.dim));
    m.bias_ = load_matrix("bias", 3);
    m.final_loss_ = mf.at("training").at("final_loss").get<double>();
    m.epoch_losses_ = mf.at("training").at("epoch_losses").get<std::vector<double>>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error("corrupt", dir.string() + ": malformed manifest: " + e.what());
  }
}

}  // namespace opinion
