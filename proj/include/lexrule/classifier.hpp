#pragma once

#include <chrono>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "lexrule/error.hpp"

namespace lexrule {

class ClassifierError : public Error {
 public:
  using Error::Error;
};

class MissingPrediction : public ClassifierError {
 public:
  explicit MissingPrediction(const std::string& sentence)
      : ClassifierError("no prediction for sentence: " + sentence), sentence_(sentence) {}
  const std::string& sentence() const noexcept { return sentence_; }

 private:
  std::string sentence_;
};

class FallbackUnavailable : public ClassifierError {
 public:
  using ClassifierError::ClassifierError;
};

/// Uniform scoring surface: one probability of "regulatory" per input text,
/// in input order. Implementations must tolerate concurrent calls.
class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual std::vector<double> classify_batch(std::span<const std::string> texts) = 0;
  virtual std::string name() const = 0;
};

/// Answers from a `sentence,score` CSV; lookups use text::normalize_sentence.
class PredictionTable final : public Classifier {
 public:
  PredictionTable(std::unordered_map<std::string, double> scores, std::string name);

  static PredictionTable from_csv(const std::string& path);

  std::vector<double> classify_batch(std::span<const std::string> texts) override;
  std::string name() const override { return name_; }
  std::size_t size() const noexcept { return scores_.size(); }

 private:
  std::unordered_map<std::string, double> scores_;
  std::string name_;
};

std::unique_ptr<Classifier> classifier_from_predictions(const std::string& path);

struct SubprocessOptions {
  std::chrono::milliseconds request_timeout{30'000};
  /// Grace period for the child to exit after the quit message.
  std::chrono::milliseconds shutdown_timeout{2'000};
};

/// Launches `command` (argv, no shell) speaking the line-oriented JSON
/// prediction protocol. Throws FallbackUnavailable if it cannot be spawned.
std::unique_ptr<Classifier> classifier_from_subprocess(const std::vector<std::string>& command,
                                                       const SubprocessOptions& options = {});

/// Splits a command string on whitespace, honouring single and double quotes.
std::vector<std::string> split_command(const std::string& command);

}  // namespace lexrule
