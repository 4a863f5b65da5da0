#include <algorithm>
#include <cmath>
#include <map>

#include "lexrule/csv.hpp"
#include "lexrule/explain.hpp"
#include "lexrule/text.hpp"

namespace lexrule::explain {

namespace {

void check_aligned(std::size_t a, std::size_t b) {
  if (a != b)
    throw AlignmentError("explanations and outcomes differ in length: " + std::to_string(a) + " vs " +
                         std::to_string(b));
}

std::optional<ScoredClass> retained_class(Outcome o) {
  if (o == Outcome::TP) return ScoredClass::regulatory;
  if (o == Outcome::TN) return ScoredClass::non_regulatory;
  return std::nullopt;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

Outcome outcome_of(int gold, int pred) {
  if (gold == 1) return pred == 1 ? Outcome::TP : Outcome::FN;
  return pred == 1 ? Outcome::FP : Outcome::TN;
}

std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::TP: return "TP";
    case Outcome::FP: return "FP";
    case Outcome::TN: return "TN";
    case Outcome::FN: return "FN";
  }
  return "?";
}

std::vector<FrequencyRow> aggregate_influential(std::span<const Explanation> expls, std::span<const Outcome> outcomes,
                                                std::size_t k, std::size_t min_freq) {
  check_aligned(expls.size(), outcomes.size());
  std::map<std::pair<ScoredClass, std::string>, std::size_t> counts;
  for (std::size_t i = 0; i < expls.size(); ++i) {
    auto cls = retained_class(outcomes[i]);
    if (!cls) continue;
    for (const auto& t : top_k(expls[i], k)) ++counts[{*cls, text::to_lower_ascii(t.token)}];
  }
  std::vector<FrequencyRow> rows;
  for (const auto& [key, n] : counts)
    if (n >= min_freq) rows.push_back({key.second, key.first, n});
  std::sort(rows.begin(), rows.end(), [](const FrequencyRow& a, const FrequencyRow& b) {
    if (a.cls != b.cls) return a.cls < b.cls;
    if (a.frequency != b.frequency) return a.frequency > b.frequency;
    return a.token < b.token;
  });
  return rows;
}

double position_pct(std::string_view sentence, std::size_t start_byte) {
  const auto len = text::utf8_length(sentence);
  if (len == 0) throw Error("position_pct on an empty sentence");
  return static_cast<double>(text::utf8_length(sentence.substr(0, start_byte))) / static_cast<double>(len) * 100.0;
}

std::optional<Summary> summarize(std::vector<double> v) {
  if (v.empty()) return std::nullopt;
  Summary s;
  s.count = v.size();
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean = sum / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - s.mean) * (x - s.mean);
  s.stddev = std::sqrt(ss / static_cast<double>(v.size()));
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  s.median = v.size() % 2 ? v[h] : (v[h - 1] + v[h]) / 2.0;
  return s;
}

PositionStats position_stats(std::span<const Explanation> expls, std::span<const Outcome> outcomes, std::size_t k) {
  check_aligned(expls.size(), outcomes.size());
  std::vector<double> pos[2], len[2];
  for (std::size_t i = 0; i < expls.size(); ++i) {
    auto cls = retained_class(outcomes[i]);
    if (!cls) continue;
    const int c = *cls == ScoredClass::regulatory ? 0 : 1;
    for (const auto& t : top_k(expls[i], k)) pos[c].push_back(position_pct(expls[i].sentence, t.start_char));
    len[c].push_back(static_cast<double>(text::utf8_length(expls[i].sentence)));
  }
  PositionStats s;
  s.regulatory = {summarize(pos[0]), summarize(len[0])};
  s.non_regulatory = {summarize(pos[1]), summarize(len[1])};
  return s;
}

void write_frequency_csv(std::ostream& out, std::span<const FrequencyRow> rows) {
  csv::write_row(out, {"token", "class", "frequency"});
  for (const auto& r : rows) csv::write_row(out, {r.token, std::string(to_string(r.cls)), std::to_string(r.frequency)});
}

void write_position_csv(std::ostream& out, const PositionStats& s) {
  csv::write_row(out, {"class", "stat", "position_pct", "sent_chars"});
  auto emit = [&](ScoredClass c, const ClassPositions& p) {
    auto field = [](const std::optional<Summary>& v, double Summary::*m) { return v ? num((*v).*m) : std::string(); };
    for (auto [name, member] : {std::pair{"mean", &Summary::mean}, std::pair{"median", &Summary::median},
                                std::pair{"stddev", &Summary::stddev}})
      csv::write_row(out, {std::string(to_string(c)), name, field(p.position_pct, member), field(p.sentence_chars, member)});
    csv::write_row(out, {std::string(to_string(c)), "count",
                         p.position_pct ? std::to_string(p.position_pct->count) : "0",
                         p.sentence_chars ? std::to_string(p.sentence_chars->count) : "0"});
  };
  emit(ScoredClass::regulatory, s.regulatory);
  emit(ScoredClass::non_regulatory, s.non_regulatory);
}

}  // namespace lexrule::explain
