#include "lexrule/classifier.hpp"

#include <cmath>

#include "lexrule/csv.hpp"
#include "lexrule/text.hpp"

namespace lexrule {

PredictionTable::PredictionTable(std::unordered_map<std::string, double> scores, std::string name)
    : scores_(std::move(scores)), name_(std::move(name)) {}

PredictionTable PredictionTable::from_csv(const std::string& path) {
  auto t = csv::read_table_file(path);
  auto c_sent = t.column("sentence", path), c_score = t.column("score", path);
  std::unordered_map<std::string, double> scores;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    double p;
    try {
      std::size_t used = 0;
      p = std::stod(t.rows[r][c_score], &used);
      if (used != t.rows[r][c_score].size()) throw std::invalid_argument("trailing text");
    } catch (const std::logic_error&) {
      throw DataError(path, t.lines[r], "bad score '" + t.rows[r][c_score] + "'");
    }
    if (!(p >= 0.0 && p <= 1.0)) throw DataError(path, t.lines[r], "score outside [0,1]");
    auto key = text::normalize_sentence(t.rows[r][c_sent]);
    auto [it, inserted] = scores.emplace(key, p);
    if (!inserted && it->second != p)
      throw DataError(path, t.lines[r], "conflicting scores for the same sentence");
  }
  return PredictionTable(std::move(scores), path);
}

std::vector<double> PredictionTable::classify_batch(std::span<const std::string> texts) {
  std::vector<double> out;
  out.reserve(texts.size());
  for (const auto& t : texts) {
    auto it = scores_.find(text::normalize_sentence(t));
    if (it == scores_.end()) throw MissingPrediction(t);
    out.push_back(it->second);
  }
  return out;
}

std::unique_ptr<Classifier> classifier_from_predictions(const std::string& path) {
  return std::make_unique<PredictionTable>(PredictionTable::from_csv(path));
}

std::vector<std::string> split_command(const std::string& command) {
  std::vector<std::string> out;
  std::string cur;
  bool in_token = false;
  char quote = 0;
  for (char c : command) {
    if (quote) {
      if (c == quote) quote = 0;
      else cur.push_back(c);
      continue;
    }
    if (c == '\'' || c == '"') {
      quote = c;
      in_token = true;
    } else if (c == ' ' || c == '\t' || c == '\n') {
      if (in_token) out.push_back(std::move(cur));
      cur.clear();
      in_token = false;
    } else {
      cur.push_back(c);
      in_token = true;
    }
  }
  if (quote) throw Error("unbalanced quote in command: " + command);
  if (in_token) out.push_back(std::move(cur));
  return out;
}

}  // namespace lexrule
