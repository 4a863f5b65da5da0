#define EIGEN_DONT_PARALLELIZE
#include "lexrule/explain.hpp"

#include <omp.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <exception>
#include <set>

#include "lexrule/rng.hpp"
#include "lexrule/text.hpp"

namespace lexrule::explain {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }
bool is_punct(char c) { return static_cast<unsigned char>(c) < 0x80 && std::ispunct(static_cast<unsigned char>(c)); }

}  // namespace

std::string_view to_string(ScoredClass c) {
  return c == ScoredClass::regulatory ? "regulatory" : "non_regulatory";
}

std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(s[i])) ++i;
    std::size_t end = i;
    while (end < s.size() && !is_space(s[end])) ++end;
    if (end == i) break;
    std::size_t lo = i, hi = end;
    while (lo < hi && is_punct(s[lo])) ++lo;
    while (hi > lo && is_punct(s[hi - 1])) --hi;
    for (std::size_t p = i; p < lo; ++p) out.push_back({std::string(1, s[p]), p});
    if (lo < hi) out.push_back({std::string(s.substr(lo, hi - lo)), lo});
    for (std::size_t p = std::max(hi, lo); p < end; ++p) out.push_back({std::string(1, s[p]), p});
    i = end;
  }
  return out;
}

void ExplainConfig::validate() const {
  if (n_samples < 10) throw InvalidConfig("n_samples must be at least 10");
  if (!(keep_probability > 0.0 && keep_probability < 1.0)) throw InvalidConfig("keep_probability must be in (0,1)");
  if (ngram < 1) throw InvalidConfig("ngram must be at least 1");
  if (!(kernel_width > 0.0)) throw InvalidConfig("kernel_width must be positive");
  if (!(ridge_lambda >= 0.0)) throw InvalidConfig("ridge_lambda must be non-negative");
  if (scoring_threads < 0) throw InvalidConfig("scoring_threads must be non-negative");
  if (scoring_chunk < 1) throw InvalidConfig("scoring_chunk must be at least 1");
}

std::vector<Token> ngram_units(std::string_view sentence, const std::vector<Token>& tokens, std::size_t n) {
  if (n <= 1) return tokens;
  std::vector<Token> units;
  for (std::size_t b = 0; b < tokens.size(); b += n) {
    const auto& first = tokens[b];
    const auto& last = tokens[std::min(b + n, tokens.size()) - 1];
    std::size_t end = last.start_char + last.text.size();
    units.push_back({std::string(sentence.substr(first.start_char, end - first.start_char)), first.start_char});
  }
  return units;
}

std::vector<std::vector<std::uint8_t>> generate_masks(std::size_t n_units, const ExplainConfig& cfg) {
  Rng rng(cfg.seed);
  std::vector<std::vector<std::uint8_t>> masks(cfg.n_samples, std::vector<std::uint8_t>(n_units, 1));
  for (std::size_t s = 1; s < cfg.n_samples; ++s)
    for (auto& m : masks[s]) m = rng.uniform() < cfg.keep_probability ? 1 : 0;
  return masks;
}

std::string compose(const std::vector<Token>& units, std::span<const std::uint8_t> mask) {
  std::string out;
  for (std::size_t i = 0; i < units.size(); ++i) {
    if (!mask[i]) continue;
    if (!out.empty()) out.push_back(' ');
    out += units[i].text;
  }
  return out;
}

std::vector<double> score_texts(Classifier& clf, std::span<const std::string> texts, const ExplainConfig& cfg) {
  std::vector<double> scores;
  if (cfg.scoring == Scoring::serial) {
    scores = clf.classify_batch(texts);
  } else {
    scores.assign(texts.size(), 0.0);
    const std::size_t chunk = cfg.scoring_chunk;
    const auto n_chunks = static_cast<std::ptrdiff_t>((texts.size() + chunk - 1) / chunk);
    const int threads = cfg.scoring_threads > 0 ? cfg.scoring_threads : omp_get_max_threads();
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
    for (std::ptrdiff_t c = 0; c < n_chunks; ++c) {
      std::size_t lo = static_cast<std::size_t>(c) * chunk, hi = std::min(lo + chunk, texts.size());
      try {
        auto part = clf.classify_batch(texts.subspan(lo, hi - lo));
        if (part.size() != hi - lo) throw ClassifierError(clf.name() + ": returned the wrong number of scores");
        std::copy(part.begin(), part.end(), scores.begin() + static_cast<std::ptrdiff_t>(lo));
      } catch (...) {
#pragma omp critical(lexrule_explain_failure)
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
  }
  if (scores.size() != texts.size()) throw ClassifierError(clf.name() + ": returned the wrong number of scores");
  for (double p : scores)
    if (!(p >= 0.0 && p <= 1.0)) throw ClassifierError(clf.name() + ": score outside [0,1]");
  return scores;
}

std::vector<double> fit_weighted_ridge(const std::vector<std::vector<std::uint8_t>>& x, std::span<const double> y,
                                       std::span<const double> w, double lambda) {
  const std::size_t n = x.size(), m = n ? x.front().size() : 0;
  double wsum = 0.0, ybar = 0.0;
  std::vector<double> xbar(m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    wsum += w[i];
    ybar += w[i] * y[i];
    for (std::size_t j = 0; j < m; ++j) xbar[j] += w[i] * x[i][j];
  }
  if (!(wsum > 0.0)) throw Error("surrogate fit: all sample weights are zero");
  ybar /= wsum;
  for (auto& v : xbar) v /= wsum;

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
  std::vector<double> xc(m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) xc[j] = x[i][j] - xbar[j];
    const double yc = y[i] - ybar;
    for (std::size_t j = 0; j < m; ++j) {
      const double wx = w[i] * xc[j];
      b(static_cast<Eigen::Index>(j)) += wx * yc;
      for (std::size_t k = 0; k <= j; ++k) a(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) += wx * xc[k];
    }
  }
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t k = 0; k < j; ++k)
      a(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = a(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k));
    a(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) += lambda;
  }
  Eigen::VectorXd beta = a.ldlt().solve(b);

  std::vector<double> out(m + 1);
  double intercept = ybar;
  for (std::size_t j = 0; j < m; ++j) {
    out[j] = beta(static_cast<Eigen::Index>(j));
    if (!std::isfinite(out[j])) throw Error("surrogate fit is singular; raise ridge_lambda");
    intercept -= out[j] * xbar[j];
  }
  out[m] = intercept;
  return out;
}

Explanation explain_sentence(const std::string& sentence, Classifier& clf, const ExplainConfig& cfg,
                             std::vector<MaskSample>* samples) {
  cfg.validate();
  auto tokens = tokenize(sentence);
  if (tokens.empty()) throw Error("sentence has no tokens to explain");
  auto units = ngram_units(sentence, tokens, cfg.ngram);
  auto masks = generate_masks(units.size(), cfg);

  std::vector<std::string> texts;
  texts.reserve(masks.size() + 1);
  texts.push_back(sentence);
  for (const auto& m : masks) texts.push_back(compose(units, m));
  auto scores = score_texts(clf, texts, cfg);

  Explanation e;
  e.sentence = sentence;
  e.base_score = scores.front();
  e.class_scored = e.base_score >= 0.5 ? ScoredClass::regulatory : ScoredClass::non_regulatory;
  e.n_samples = cfg.n_samples;
  e.seed = cfg.seed;

  const bool flip = e.class_scored == ScoredClass::non_regulatory;
  std::vector<double> y(masks.size()), w(masks.size());
  const double total = static_cast<double>(units.size());
  for (std::size_t s = 0; s < masks.size(); ++s) {
    double p = scores[s + 1];
    y[s] = flip ? 1.0 - p : p;
    double kept = 0.0;
    for (auto k : masks[s]) kept += k;
    const double d = 1.0 - kept / total;
    w[s] = std::exp(-(d * d) / (cfg.kernel_width * cfg.kernel_width));
  }
  auto coef = fit_weighted_ridge(masks, y, w, cfg.ridge_lambda);
  e.intercept = coef.back();
  coef.pop_back();
  e.attributions = std::move(coef);
  e.tokens = std::move(units);

  if (samples) {
    samples->clear();
    for (std::size_t s = 0; s < masks.size(); ++s)
      samples->push_back({std::move(masks[s]), std::move(texts[s + 1]), scores[s + 1]});
  }
  return e;
}

std::vector<Influential> top_k(const Explanation& e, std::size_t k) {
  std::vector<std::size_t> idx(e.tokens.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (e.attributions[a] != e.attributions[b]) return e.attributions[a] > e.attributions[b];
    return e.tokens[a].start_char < e.tokens[b].start_char;
  });
  idx.resize(std::min(k, idx.size()));
  std::vector<Influential> out;
  for (auto i : idx) out.push_back({e.tokens[i].text, e.attributions[i], e.tokens[i].start_char});
  return out;
}

StabilityReport stability_check(const std::string& sentence, Classifier& clf, const ExplainConfig& cfg, int runs,
                                 std::size_t k) {
  if (runs < 2) throw InvalidConfig("stability_check needs at least two runs");
  StabilityReport r;
  double max_abs = 0.0;
  for (int i = 0; i < runs; ++i) {
    auto c = cfg;
    c.seed = cfg.seed + static_cast<std::uint64_t>(i);
    auto e = explain_sentence(sentence, clf, c);
    for (double a : e.attributions) max_abs = std::max(max_abs, std::abs(a));
    std::vector<std::size_t> set;
    std::vector<std::string> words;
    for (const auto& t : top_k(e, k)) {
      auto it = std::find_if(e.tokens.begin(), e.tokens.end(), [&](const Token& x) { return x.start_char == t.start_char; });
      set.push_back(static_cast<std::size_t>(it - e.tokens.begin()));
      words.push_back(t.token);
    }
    std::sort(set.begin(), set.end());
    r.top_sets.push_back(std::move(set));
    r.top_tokens.push_back(std::move(words));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < r.top_sets.size(); ++i) {
    for (std::size_t j = i + 1; j < r.top_sets.size(); ++j) {
      std::vector<std::size_t> inter, uni;
      std::set_intersection(r.top_sets[i].begin(), r.top_sets[i].end(), r.top_sets[j].begin(), r.top_sets[j].end(),
                            std::back_inserter(inter));
      std::set_union(r.top_sets[i].begin(), r.top_sets[i].end(), r.top_sets[j].begin(), r.top_sets[j].end(),
                     std::back_inserter(uni));
      double jac = uni.empty() ? 1.0 : static_cast<double>(inter.size()) / static_cast<double>(uni.size());
      r.pairwise_jaccard.push_back(jac);
      sum += jac;
    }
  }
  r.mean_jaccard = sum / static_cast<double>(r.pairwise_jaccard.size());
  r.degenerate = max_abs < 1e-9;
  r.unstable = !r.degenerate && r.mean_jaccard < 2.0 / 3.0;
  if (r.unstable) r.suggested_n_samples = cfg.n_samples * 2;
  return r;
}

nlohmann::json to_json(const Explanation& e) {
  nlohmann::json toks = nlohmann::json::array();
  for (const auto& t : e.tokens) toks.push_back({{"text", t.text}, {"start_char", t.start_char}});
  return {{"sentence", e.sentence},
          {"tokens", std::move(toks)},
          {"attributions", e.attributions},
          {"intercept", e.intercept},
          {"base_score", e.base_score},
          {"class", to_string(e.class_scored)},
          {"seed", e.seed},
          {"n_samples", e.n_samples}};
}

nlohmann::json to_json(const StabilityReport& r) {
  nlohmann::json j{{"top_tokens", r.top_tokens},
                   {"pairwise_jaccard", r.pairwise_jaccard},
                   {"mean_jaccard", r.mean_jaccard},
                   {"degenerate", r.degenerate},
                   {"unstable", r.unstable}};
  j["suggested_n_samples"] = r.suggested_n_samples ? nlohmann::json(*r.suggested_n_samples) : nlohmann::json(nullptr);
  return j;
}

}  // namespace lexrule::explain
