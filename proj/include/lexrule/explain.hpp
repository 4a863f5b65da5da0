#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "lexrule/classifier.hpp"
#include "lexrule/error.hpp"

namespace lexrule::explain {

class InvalidConfig : public Error {
 public:
  using Error::Error;
};

class AlignmentError : public Error {
 public:
  using Error::Error;
};

/// start_char is a byte offset into the sentence.
struct Token {
  std::string text;
  std::size_t start_char = 0;
  bool operator==(const Token&) const = default;
};

/// Whitespace split; leading and trailing ASCII punctuation become
/// one-character tokens of their own.
std::vector<Token> tokenize(std::string_view sentence);

enum class ScoredClass { regulatory, non_regulatory };
std::string_view to_string(ScoredClass c);

enum class Scoring { serial, parallel };

struct ExplainConfig {
  std::size_t n_samples = 1000;
  double keep_probability = 0.5;
  double kernel_width = 0.75;
  double ridge_lambda = 1.0;
  std::size_t ngram = 1;
  std::uint64_t seed = 0;
  Scoring scoring = Scoring::parallel;
  /// 0 leaves the OpenMP default.
  int scoring_threads = 0;
  /// Texts per classify_batch call in parallel scoring.
  std::size_t scoring_chunk = 64;

  void validate() const;
};

struct MaskSample {
  std::vector<std::uint8_t> keep_mask;
  std::string perturbed_text;
  double model_score = 0.0;
};

/// With ngram > 1 the tokens are the contiguous blocks the masks act on.
struct Explanation {
  std::string sentence;
  std::vector<Token> tokens;
  std::vector<double> attributions;
  double intercept = 0.0;
  double base_score = 0.0;
  ScoredClass class_scored = ScoredClass::regulatory;
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;
};

/// Groups tokens into contiguous blocks of `n` (last block may be shorter).
std::vector<Token> ngram_units(std::string_view sentence, const std::vector<Token>& tokens, std::size_t n);

/// Sample 0 keeps every unit; the rest keep each unit independently.
std::vector<std::vector<std::uint8_t>> generate_masks(std::size_t n_units, const ExplainConfig& cfg);

std::string compose(const std::vector<Token>& units, std::span<const std::uint8_t> mask);

/// Scores `texts` in order. Parallel mode splits them into chunks scored
/// concurrently; results are placed by index so the output is identical.
std::vector<double> score_texts(Classifier& clf, std::span<const std::string> texts, const ExplainConfig& cfg);

/// Weighted ridge fit with an unpenalised intercept. Returns coefficients
/// followed by the intercept.
std::vector<double> fit_weighted_ridge(const std::vector<std::vector<std::uint8_t>>& x, std::span<const double> y,
                                       std::span<const double> w, double lambda);

Explanation explain_sentence(const std::string& sentence, Classifier& clf, const ExplainConfig& cfg,
                             std::vector<MaskSample>* samples = nullptr);

struct StabilityReport {
  std::vector<std::vector<std::size_t>> top_sets;  // token indices, per run
  std::vector<std::vector<std::string>> top_tokens;
  std::vector<double> pairwise_jaccard;  // (0,1), (0,2), ..., (1,2), ...
  double mean_jaccard = 0.0;
  bool degenerate = false;
  bool unstable = false;
  std::optional<std::size_t> suggested_n_samples;
};

StabilityReport stability_check(const std::string& sentence, Classifier& clf, const ExplainConfig& cfg,
                                int runs, std::size_t k = 3);

struct Influential {
  std::string token;
  double attribution;
  std::size_t start_char;
};

std::vector<Influential> top_k(const Explanation& e, std::size_t k);

enum class Outcome { TP, FP, TN, FN };
Outcome outcome_of(int gold, int pred);
std::string_view to_string(Outcome o);

struct FrequencyRow {
  std::string token;
  ScoredClass cls;
  std::size_t frequency;
};

/// TP items count toward regulatory, TN toward non_regulatory; others are
/// ignored. Sorted by class, then descending frequency, then token.
std::vector<FrequencyRow> aggregate_influential(std::span<const Explanation> expls, std::span<const Outcome> outcomes,
                                                std::size_t k, std::size_t min_freq);

struct Summary {
  double mean = 0.0, median = 0.0, stddev = 0.0;
  std::size_t count = 0;
};

struct ClassPositions {
  std::optional<Summary> position_pct;
  std::optional<Summary> sentence_chars;
};

struct PositionStats {
  ClassPositions regulatory, non_regulatory;
};

/// Position of a token as a percentage of the sentence length, both in
/// code points.
double position_pct(std::string_view sentence, std::size_t start_byte);

/// Population statistics; nullopt for an empty sample.
std::optional<Summary> summarize(std::vector<double> values);

PositionStats position_stats(std::span<const Explanation> expls, std::span<const Outcome> outcomes, std::size_t k);

nlohmann::json to_json(const Explanation& e);
nlohmann::json to_json(const StabilityReport& r);
void write_frequency_csv(std::ostream& out, std::span<const FrequencyRow> rows);
void write_position_csv(std::ostream& out, const PositionStats& s);

}  // namespace lexrule::explain
