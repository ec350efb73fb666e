#include "opinion/metrics.h"

#include "opinion/csv.h"

namespace opinion {

int64_t ConfusionMatrix::total() const {
  int64_t s = 0;
  for (const auto& row : cells)
    for (int64_t v : row) s += v;
  return s;
}

int64_t ConfusionMatrix::row_sum(int i) const {
  return cells[i][0] + cells[i][1] + cells[i][2];
}

ConfusionMatrix confusion(const std::vector<int>& truth, const std::vector<int>& predicted) {
  if (truth.size() != predicted.size()) {
    throw Error("invalid_argument", "confusion: " + std::to_string(truth.size()) +
                                        " true labels vs " + std::to_string(predicted.size()) +
                                        " predictions");
  }
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 0 || truth[i] > 2 || predicted[i] < 0 || predicted[i] > 2) {
      throw Error("invalid_argument", "confusion: class index out of range");
    }
    ++cm.cells[truth[i]][predicted[i]];
  }
  return cm;
}

ConfusionMatrix confusion(const std::vector<Polarity>& truth,
                          const std::vector<Polarity>& predicted) {
  std::vector<int> t(truth.size()), p(predicted.size());
  for (std::size_t i = 0; i < truth.size(); ++i) t[i] = static_cast<int>(truth[i]);
  for (std::size_t i = 0; i < predicted.size(); ++i) p[i] = static_cast<int>(predicted[i]);
  return confusion(t, p);
}

double macro_accuracy(const ConfusionMatrix& cm, const std::array<std::string, 3>& class_names) {
  double s = 0.0;
  for (int i = 0; i < 3; ++i) {
    int64_t n = cm.row_sum(i);
    if (n == 0) {
      throw Error("invalid_argument",
                  "macro accuracy undefined: class '" + class_names[i] + "' has no items");
    }
    s += static_cast<double>(cm.cells[i][i]) / static_cast<double>(n);
  }
  return s / 3.0;
}

double macro_accuracy_present(const ConfusionMatrix& cm) {
  double s = 0.0;
  int present = 0;
  for (int i = 0; i < 3; ++i) {
    int64_t n = cm.row_sum(i);
    if (n == 0) continue;
    s += static_cast<double>(cm.cells[i][i]) / static_cast<double>(n);
    ++present;
  }
  if (present == 0) throw Error("invalid_argument", "macro accuracy undefined: no items");
  return s / present;
}

ThresholdCurve threshold_curve(const std::vector<PolarityPrediction>& predictions,
                               const std::vector<Polarity>& truth,
                               const std::vector<double>& thresholds) {
  if (predictions.size() != truth.size()) {
    throw Error("invalid_argument", "threshold_curve: predictions and labels differ in length");
  }
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    if (!(thresholds[i] >= 0.0 && thresholds[i] <= 1.0) ||
        (i > 0 && thresholds[i] < thresholds[i - 1])) {
      throw Error("invalid_argument", "thresholds must be ascending within [0, 1]");
    }
  }
  ThresholdCurve curve;
  const double n = static_cast<double>(predictions.size());
  for (double t : thresholds) {
    ThresholdPoint pt;
    pt.threshold = t;
    int64_t correct = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
      if (predictions[i].confidence > t) {
        ++pt.covered;
        if (predictions[i].predicted == truth[i]) ++correct;
      }
    }
    pt.coverage = n > 0 ? static_cast<double>(pt.covered) / n : 0.0;
    pt.empty = pt.covered == 0;
    pt.correctness = pt.empty ? 1.0 : static_cast<double>(correct) / static_cast<double>(pt.covered);
    curve.push_back(pt);
  }
  return curve;
}

std::vector<double> default_thresholds() {
  std::vector<double> t;
  for (int i = 0; i <= 20; ++i) t.push_back(i / 20.0);
  return t;
}

std::string confusion_csv(const ConfusionMatrix& cm, const std::array<std::string, 3>& names) {
  csv::Writer w({"true_class", names[0], names[1], names[2]});
  for (int i = 0; i < 3; ++i) {
    w.add({names[i], std::to_string(cm.cells[i][0]), std::to_string(cm.cells[i][1]),
           std::to_string(cm.cells[i][2])});
  }
  return w.str();
}

std::string curve_csv(const ThresholdCurve& curve) {
  csv::Writer w({"threshold", "coverage", "correctness", "covered_count"});
  for (const auto& p : curve) {
    w.add({format_double(p.threshold), format_double(p.coverage), format_double(p.correctness),
           std::to_string(p.covered)});
  }
  return w.str();
}

nlohmann::json to_json(const ConfusionMatrix& cm) { return cm.cells; }

ConfusionMatrix confusion_from_json(const nlohmann::json& j) {
  ConfusionMatrix cm;
  cm.cells = j.get<std::array<std::array<int64_t, 3>, 3>>();
  return cm;
}

nlohmann::json to_json(const ThresholdCurve& curve) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& p : curve) {
    arr.push_back({{"threshold", p.threshold}, {"coverage", p.coverage},
                   {"correctness", p.correctness}, {"covered_count", p.covered},
                   {"empty", p.empty}});
  }
  return arr;
}

ThresholdCurve curve_from_json(const nlohmann::json& j) {
  ThresholdCurve c;
  for (const auto& e : j) {
    ThresholdPoint p;
    p.threshold = e.at("threshold").get<double>();
    p.coverage = e.at("coverage").get<double>();
    p.correctness = e.at("correctness").get<double>();
    p.covered = e.at("covered_count").get<int64_t>();
    p.empty = e.at("empty").get<bool>();
    c.push_back(p);
  }
  return c;
}

}  // namespace opinion
