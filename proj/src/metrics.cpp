#include "lexrule/metrics.hpp"

#include <cstdio>
#include <sstream>

#include "lexrule/csv.hpp"
#include "lexrule/text.hpp"

namespace lexrule::metrics {

namespace {

void check_binary(std::span<const int> v, const char* what) {
  for (int x : v)
    if (x != 0 && x != 1) throw Error(std::string(what) + " contains a non-binary label: " + std::to_string(x));
}

std::optional<double> ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

ClassMetrics class_metrics(std::size_t tp, std::size_t fp, std::size_t fn) {
  ClassMetrics m;
  m.precision = ratio(tp, tp + fp);
  m.recall = ratio(tp, tp + fn);
  if (m.precision && m.recall && *m.precision + *m.recall > 0.0)
    m.f1 = 2.0 * *m.precision * *m.recall / (*m.precision + *m.recall);
  else if (m.precision && m.recall)
    m.f1 = 0.0;
  return m;
}

nlohmann::json opt(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

std::string cell(const std::optional<double>& v) {
  if (!v) return "undef";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", *v);
  return buf;
}

}  // namespace

ConfusionMatrix confusion(std::span<const int> gold, std::span<const int> pred) {
  if (gold.size() != pred.size()) throw LengthMismatch(gold.size(), pred.size());
  if (gold.empty()) throw EmptyInput();
  check_binary(gold, "gold");
  check_binary(pred, "predictions");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i] == 1) (pred[i] == 1 ? cm.tp : cm.fn)++;
    else (pred[i] == 1 ? cm.fp : cm.tn)++;
  }
  return cm;
}

MetricsReport per_class_metrics(const ConfusionMatrix& cm) {
  MetricsReport r;
  r.cm = cm;
  r.n = cm.total();
  r.accuracy = r.n ? static_cast<double>(cm.tp + cm.tn) / static_cast<double>(r.n) : 0.0;
  r.regulatory = class_metrics(cm.tp, cm.fp, cm.fn);
  r.non_regulatory = class_metrics(cm.tn, cm.fn, cm.fp);
  return r;
}

double krippendorff_alpha(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw LengthMismatch(a.size(), b.size());
  if (a.empty()) throw EmptyInput();
  if (a.size() < 2) throw Error("krippendorff_alpha needs at least two items");
  check_binary(a, "ratings_a");
  check_binary(b, "ratings_b");
  // Coincidence matrix: every item contributes both ordered pairs (a,b) and (b,a).
  double o[2][2] = {{0, 0}, {0, 0}};
  for (std::size_t i = 0; i < a.size(); ++i) {
    o[a[i]][b[i]] += 1.0;
    o[b[i]][a[i]] += 1.0;
  }
  double n0 = o[0][0] + o[0][1], n1 = o[1][0] + o[1][1], n = n0 + n1;
  double d_o = o[0][1] + o[1][0];
  double d_e = 2.0 * n0 * n1 / (n - 1.0);
  if (d_e == 0.0) throw DegenerateRatings();
  return 1.0 - d_o / d_e;
}

MetricsReport evaluate(std::span<const int> gold, std::span<const int> pred) {
  auto r = per_class_metrics(confusion(gold, pred));
  try {
    r.alpha_vs_gold = krippendorff_alpha(gold, pred);
  } catch (const DegenerateRatings&) {
  }
  return r;
}

Comparison compare_models(std::span<const int> gold,
                          const std::vector<std::pair<std::string, std::vector<int>>>& preds) {
  Comparison c;
  for (const auto& [name, p] : preds) c.models.emplace_back(name, evaluate(gold, p));
  for (std::size_t i = 0; i < preds.size(); ++i) {
    for (std::size_t j = i + 1; j < preds.size(); ++j) {
      PairwiseAgreement pa{preds[i].first, preds[j].first, std::nullopt, {}};
      const auto &a = preds[i].second, &b = preds[j].second;
      try {
        pa.alpha = krippendorff_alpha(a, b);
      } catch (const DegenerateRatings&) {
      }
      for (std::size_t k = 0; k < a.size(); ++k)
        if (a[k] != b[k]) pa.disagreements.push_back({k, a[k], b[k], gold[k]});
      c.pairs.push_back(std::move(pa));
    }
  }
  return c;
}

nlohmann::json to_json(const Comparison& c, std::span<const std::string> items) {
  nlohmann::json out;
  out["models"] = nlohmann::json::array();
  for (const auto& [name, r] : c.models) {
    auto cls = [](const ClassMetrics& m) {
      return nlohmann::json{{"precision", opt(m.precision)}, {"recall", opt(m.recall)}, {"f1", opt(m.f1)}};
    };
    out["models"].push_back({{"name", name},
                             {"n", r.n},
                             {"confusion", {{"tp", r.cm.tp}, {"fp", r.cm.fp}, {"tn", r.cm.tn}, {"fn", r.cm.fn}}},
                             {"accuracy", r.accuracy},
                             {"regulatory", cls(r.regulatory)},
                             {"non_regulatory", cls(r.non_regulatory)},
                             {"alpha_vs_gold", opt(r.alpha_vs_gold)}});
  }
  out["pairwise"] = nlohmann::json::array();
  for (const auto& p : c.pairs) {
    nlohmann::json d = nlohmann::json::array();
    for (const auto& x : p.disagreements) {
      nlohmann::json e{{"item", x.item}, {"label_a", x.label_a}, {"label_b", x.label_b}, {"gold", x.gold}};
      if (x.item < items.size()) e["sentence"] = items[x.item];
      d.push_back(std::move(e));
    }
    out["pairwise"].push_back(
        {{"model_a", p.model_a}, {"model_b", p.model_b}, {"alpha", opt(p.alpha)}, {"disagreements", std::move(d)}});
  }
  return out;
}

std::string render_table(const Comparison& c) {
  std::size_t w = 5;
  for (const auto& [name, r] : c.models) w = std::max(w, name.size());
  std::ostringstream os;
  char line[512];
  std::snprintf(line, sizeof line, "%-*s  %5s  %6s %6s %6s  %6s %6s %6s  %6s\n", static_cast<int>(w), "model", "acc",
                "reg.P", "reg.R", "reg.F1", "non.P", "non.R", "non.F1", "alpha");
  os << line;
  for (const auto& [name, r] : c.models) {
    std::snprintf(line, sizeof line, "%-*s  %5.3f  %6s %6s %6s  %6s %6s %6s  %6s\n", static_cast<int>(w),
                  name.c_str(), r.accuracy, cell(r.regulatory.precision).c_str(), cell(r.regulatory.recall).c_str(),
                  cell(r.regulatory.f1).c_str(), cell(r.non_regulatory.precision).c_str(),
                  cell(r.non_regulatory.recall).c_str(), cell(r.non_regulatory.f1).c_str(),
                  cell(r.alpha_vs_gold).c_str());
    os << line;
  }
  for (const auto& p : c.pairs)
    os << "alpha(" << p.model_a << ", " << p.model_b << ") = " << cell(p.alpha) << ", " << p.disagreements.size()
       << " disagreements\n";
  return os.str();
}

GoldSet read_gold_csv(const std::string& path) {
  auto t = csv::read_table_file(path);
  auto c_sent = t.column("sentence", path), c_label = t.column("label", path);
  GoldSet g;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& l = t.rows[r][c_label];
    if (l != "0" && l != "1") throw DataError(path, t.lines[r], "label must be 0 or 1, got '" + l + "'");
    g.sentences.push_back(text::normalize_sentence(t.rows[r][c_sent]));
    g.labels.push_back(l == "1" ? 1 : 0);
  }
  if (g.labels.empty()) throw DataError(path, 0, "no labelled rows");
  return g;
}

std::vector<int> predict_labels(Classifier& clf, const GoldSet& gold, double threshold) {
  auto scores = clf.classify_batch(gold.sentences);
  std::vector<int> out;
  out.reserve(scores.size());
  for (double s : scores) out.push_back(s >= threshold ? 1 : 0);
  return out;
}

}  // namespace lexrule::metrics
