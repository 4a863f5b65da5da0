#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "lexrule/classifier.hpp"
#include "lexrule/error.hpp"

namespace lexrule::metrics {

class LengthMismatch : public Error {
 public:
  LengthMismatch(std::size_t a, std::size_t b)
      : Error("length mismatch: " + std::to_string(a) + " vs " + std::to_string(b)) {}
};

class EmptyInput : public Error {
 public:
  EmptyInput() : Error("empty input") {}
};

/// Both raters used one identical value throughout; alpha is undefined.
class DegenerateRatings : public Error {
 public:
  DegenerateRatings() : Error("degenerate ratings: expected disagreement is zero") {}
};

/// Positive class is regulatory (1).
struct ConfusionMatrix {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  std::size_t total() const noexcept { return tp + fp + tn + fn; }
  bool operator==(const ConfusionMatrix&) const = default;
};

/// nullopt marks an undefined 0/0 value.
struct ClassMetrics {
  std::optional<double> precision, recall, f1;
};

struct MetricsReport {
  ConfusionMatrix cm;
  std::size_t n = 0;
  double accuracy = 0.0;
  ClassMetrics regulatory, non_regulatory;
  std::optional<double> alpha_vs_gold;
};

ConfusionMatrix confusion(std::span<const int> gold, std::span<const int> pred);
MetricsReport per_class_metrics(const ConfusionMatrix& cm);
double krippendorff_alpha(std::span<const int> a, std::span<const int> b);

/// confusion + per_class_metrics + alpha against gold (nullopt when degenerate).
MetricsReport evaluate(std::span<const int> gold, std::span<const int> pred);

struct Disagreement {
  std::size_t item;
  int label_a, label_b, gold;
};

struct PairwiseAgreement {
  std::string model_a, model_b;
  std::optional<double> alpha;
  std::vector<Disagreement> disagreements;
};

struct Comparison {
  std::vector<std::pair<std::string, MetricsReport>> models;
  std::vector<PairwiseAgreement> pairs;
};

Comparison compare_models(std::span<const int> gold,
                          const std::vector<std::pair<std::string, std::vector<int>>>& preds);

/// `items`, when non-empty, supplies sentence texts for the disagreement list.
nlohmann::json to_json(const Comparison& c, std::span<const std::string> items = {});
std::string render_table(const Comparison& c);

struct GoldSet {
  std::vector<std::string> sentences;
  std::vector<int> labels;
};

/// `sentence,label` CSV with label in {0,1}.
GoldSet read_gold_csv(const std::string& path);

/// Scores every gold sentence with `clf` and thresholds at 0.5 (score >= 0.5 is regulatory).
std::vector<int> predict_labels(Classifier& clf, const GoldSet& gold, double threshold = 0.5);

}  // namespace lexrule::metrics
