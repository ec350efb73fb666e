#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "opinion/common.h"
#include "opinion/polarity.h"

namespace opinion {

// Rows are true classes, columns predicted classes, in a fixed class order.
struct ConfusionMatrix {
  std::array<std::array<int64_t, 3>, 3> cells{};

  int64_t total() const;
  int64_t row_sum(int i) const;
  bool operator==(const ConfusionMatrix&) const = default;
};

ConfusionMatrix confusion(const std::vector<int>& truth, const std::vector<int>& predicted);
ConfusionMatrix confusion(const std::vector<Polarity>& truth, const std::vector<Polarity>& predicted);

// Mean over classes of per-class accuracy (recall). Throws
// Error("invalid_argument") naming the first class whose row is empty;
// `class_names` supplies the names used in that message.
double macro_accuracy(const ConfusionMatrix& cm,
                      const std::array<std::string, 3>& class_names = {"positive", "neutral",
                                                                       "negative"});

// Averages per-class accuracy over the classes that have at least one item.
double macro_accuracy_present(const ConfusionMatrix& cm);

struct ThresholdPoint {
  double threshold = 0.0;
  double coverage = 0.0;     // fraction with confidence > threshold
  double correctness = 1.0;  // fraction correct among covered
  int64_t covered = 0;
  bool empty = false;        // nothing covered; correctness reported as 1.0

  bool operator==(const ThresholdPoint&) const = default;
};

using ThresholdCurve = std::vector<ThresholdPoint>;

ThresholdCurve threshold_curve(const std::vector<PolarityPrediction>& predictions,
                               const std::vector<Polarity>& truth,
                               const std::vector<double>& thresholds);

// 0.00, 0.05, ..., 1.00
std::vector<double> default_thresholds();

std::string confusion_csv(const ConfusionMatrix& cm, const std::array<std::string, 3>& names);
std::string curve_csv(const ThresholdCurve& curve);

nlohmann::json to_json(const ConfusionMatrix& cm);
ConfusionMatrix confusion_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ThresholdCurve& curve);
ThresholdCurve curve_from_json(const nlohmann::json& j);

}  // namespace opinion
