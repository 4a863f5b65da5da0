// Serial reference vs OpenMP paths for the two data-parallel kernels.

#include <benchmark/benchmark.h>

#include <cmath>

#include "lexrule/explain.hpp"
#include "lexrule/parse.hpp"
#include "lexrule/ruleclf.hpp"

namespace {

using namespace lexrule;

const std::vector<parse::ParsedSentence>& corpus(std::size_t copies) {
  static std::vector<parse::ParsedSentence> out = [&] {
    auto base = parse::read_conllu_file(LEXRULE_FIXTURE_DIR "/labelled.conllu");
    std::vector<parse::ParsedSentence> v;
    for (std::size_t i = 0; i < copies; ++i) v.insert(v.end(), base.begin(), base.end());
    return v;
  }();
  return out;
}

const parse::AgentLexicon& lexicon() {
  static auto l = parse::load_lexicon(LEXRULE_DATA_DIR "/agents.txt").lexicon;
  return l;
}

void BM_classify_rule_batch(benchmark::State& state) {
  const auto& sents = corpus(500);
  auto exec = state.range(0) ? rules::Execution::parallel : rules::Execution::serial;
  for (auto _ : state) benchmark::DoNotOptimize(rules::classify_rule_batch(sents, lexicon(), rules::Profile::paper_v1, exec));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(sents.size()));
}
BENCHMARK(BM_classify_rule_batch)->Arg(0)->Arg(1)->ArgNames({"parallel"})->Unit(benchmark::kMillisecond);

// Stand-in for a model with real per-text cost.
class BusyClassifier final : public Classifier {
 public:
  std::vector<double> classify_batch(std::span<const std::string> texts) override {
    std::vector<double> out;
    for (const auto& t : texts) {
      double acc = 0.0;
      for (int r = 0; r < 2000; ++r)
        for (char c : t) acc += std::sin(acc + static_cast<unsigned char>(c));
      out.push_back(t.find("shall") != std::string::npos ? 0.9 : 0.1 + 0.0 * acc);
    }
    return out;
  }
  std::string name() const override { return "busy"; }
};

void BM_explain_scoring(benchmark::State& state) {
  BusyClassifier clf;
  explain::ExplainConfig cfg;
  cfg.n_samples = 500;
  cfg.seed = 7;
  cfg.scoring = state.range(0) ? explain::Scoring::parallel : explain::Scoring::serial;
  const std::string s = "Member States shall lay down the rules on penalties applicable to infringements.";
  for (auto _ : state) benchmark::DoNotOptimize(explain::explain_sentence(s, clf, cfg));
}
BENCHMARK(BM_explain_scoring)->Arg(0)->Arg(1)->ArgNames({"parallel"})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
