#include "lexrule/cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <map>
#include <sstream>

#include "lexrule/classifier.hpp"
#include "lexrule/corpus.hpp"
#include "lexrule/csv.hpp"
#include "lexrule/explain.hpp"
#include "lexrule/metadata_client.hpp"
#include "lexrule/metrics.hpp"
#include "lexrule/parse.hpp"
#include "lexrule/ruleclf.hpp"
#include "lexrule/text.hpp"

namespace lexrule::cli {

namespace fs = std::filesystem;

namespace {

std::string data_file(const char* name) { return std::string(LEXRULE_DATA_DIR) + "/" + name; }

std::string default_lexicon() {
  if (const char* env = std::getenv("LEXRULE_LEXICON"); env && *env) return env;
  return data_file("agents.txt");
}

template <class F>
void write_output(const std::string& path, F&& fill) {
  std::ostringstream os;
  fill(os);
  text::write_file_atomic(path, os.str());
}

class Timer {
 public:
  explicit Timer(std::ostream& err, std::string what) : err_(err), what_(std::move(what)) {}
  ~Timer() {
    auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start_);
    err_ << what_ << ": " << ms.count() << " ms\n";
  }

 private:
  std::ostream& err_;
  std::string what_;
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

nlohmann::json outcome_json(const parse::ParsedSentence& s, const rules::ClassificationOutcome& o) {
  const auto& r = o.rationale;
  nlohmann::json j{{"sentence", s.text()}, {"label", static_cast<int>(o.label)}, {"score", o.score}};
  if (!s.sent_id().empty()) j["sent_id"] = s.sent_id();
  auto put = [&](const char* key, const auto& v) {
    if (v) j[key] = *v;
  };
  put("deontic_verb_index", r.deontic_verb_index);
  put("deontic_aux_lemma", r.deontic_aux_lemma);
  if (r.voice) j["voice"] = rules::to_string(*r.voice);
  put("attribute_token_index", r.attribute_token_index);
  put("attribute_phrase", r.attribute_phrase);
  if (r.failure_reason) j["failure_reason"] = rules::to_string(*r.failure_reason);
  put("failed_candidate_index", r.failed_candidate_index);
  if (r.delegated) {
    j["delegated"] = true;
    j["fallback"] = r.fallback_name;
  }
  return j;
}

struct Options {
  // shared
  std::uint64_t seed = 0;
  std::string out, metadata, lexicon, scheme = "ud_v2", profile = "paper-v1";
  // extract / sentences
  std::string docs, sections, markers_start = data_file("markers_start.txt"),
                              markers_end = data_file("markers_end.txt"),
                              abbreviations = data_file("abbreviations.txt");
  bool no_semicolon = false;
  // sample
  std::string candidates, strata_out;
  std::size_t per_stratum = 0;
  // classify
  std::string conllu, fallback_cmd, rationale_out;
  bool hybrid = false, delegate_always = false, serial = false;
  int fallback_timeout_ms = 30'000;
  // evaluate
  std::string gold, json_out;
  std::vector<std::string> preds;
  // explain
  std::string sentences, model_cmd, predictions, freq_out, position_out;
  explain::ExplainConfig ecfg;
  std::size_t k = 3, min_freq = 5;
  int stability_runs = 0;
  // fetch-metadata
  std::string ids, endpoint = corpus::MetadataClientConfig{}.endpoint, unresolved_out;
  std::size_t batch = 50;
  int interval_ms = 1000;
};

int do_extract(const Options& o, std::ostream& out, std::ostream& err) {
  auto markers = corpus::MarkerDictionary::load(o.markers_start, o.markers_end);
  auto meta = corpus::read_metadata_csv(o.metadata);
  auto docs = corpus::load_documents(o.docs, meta);
  fs::create_directories(o.out);
  std::size_t written = 0, skipped = 0;
  for (const auto& d : docs) {
    try {
      auto section = corpus::extract_regulatory_section(d.full_text, markers);
      text::write_file_atomic((fs::path(o.out) / (d.meta.celex_id + ".txt")).string(), section + "\n");
      ++written;
    } catch (const corpus::NoStartMarker& e) {
      err << d.meta.celex_id << ": skipped, " << e.what() << "\n";
      ++skipped;
    } catch (const corpus::NoEndMarker& e) {
      err << d.meta.celex_id << ": skipped, " << e.what() << "\n";
      ++skipped;
    }
  }
  out << "extracted " << written << " sections, skipped " << skipped << "\n";
  return ok;
}

int do_sentences(const Options& o, std::ostream& out, std::ostream&) {
  auto seg = corpus::SegmenterConfig::load(o.abbreviations);
  seg.split_on_semicolon = !o.no_semicolon;
  auto meta = corpus::read_metadata_csv(o.metadata);
  std::vector<corpus::CandidateSentence> all;
  std::size_t n_sentences = 0;
  for (const auto& m : meta) {
    auto path = (fs::path(o.sections) / (m.celex_id + ".txt")).string();
    if (!fs::exists(path)) continue;
    auto sentences = corpus::segment_sentences(text::read_file(path), seg);
    n_sentences += sentences.size();
    auto c = corpus::filter_deontic(sentences, m.celex_id);
    all.insert(all.end(), std::make_move_iterator(c.begin()), std::make_move_iterator(c.end()));
  }
  write_output(o.out, [&](std::ostream& os) { corpus::write_candidates_csv(os, all); });
  out << n_sentences << " sentences, " << all.size() << " with a deontic token\n";
  return ok;
}

int do_sample(const Options& o, std::ostream& out, std::ostream& err) {
  auto cands = corpus::read_candidates_csv(o.candidates);
  std::map<std::string, corpus::StratumKey> keys;
  for (const auto& m : corpus::read_metadata_csv(o.metadata)) keys.emplace(m.celex_id, corpus::StratumKey{m.adoption_year, m.policy_area});
  auto r = corpus::stratify_sample(cands, keys, o.per_stratum, o.seed);
  write_output(o.out, [&](std::ostream& os) { corpus::write_candidates_csv(os, r.sentences); });
  if (!o.strata_out.empty()) {
    write_output(o.strata_out, [&](std::ostream& os) {
      csv::write_row(os, {"year", "policy_area", "status", "sampled"});
      for (const auto& s : r.strata)
        csv::write_row(os, {std::to_string(s.year), s.policy_area, "sampled", std::to_string(s.sentences.size())});
      for (const auto& k : r.excluded) csv::write_row(os, {std::to_string(k.year), k.policy_area, "excluded", "0"});
    });
  }
  if (r.missing_metadata) err << r.missing_metadata << " candidates had no metadata and were ignored\n";
  out << r.sentences.size() << " sentences from " << r.strata.size() << " strata; " << r.excluded.size()
      << " strata below " << o.per_stratum << " excluded\n";
  return ok;
}

int do_classify(const Options& o, std::ostream& out, std::ostream& err) {
  auto sentences = parse::read_conllu_file(o.conllu, parse::scheme_from_string(o.scheme));
  auto loaded = parse::load_lexicon(o.lexicon);
  for (const auto& w : loaded.warnings) err << "warning: " << w << "\n";
  auto profile = rules::profile_from_string(o.profile);
  std::vector<rules::ClassificationOutcome> outcomes;
  {
    Timer t(err, "classify");
    if (o.hybrid) {
      SubprocessOptions so;
      so.request_timeout = std::chrono::milliseconds(o.fallback_timeout_ms);
      auto fallback = classifier_from_subprocess(split_command(o.fallback_cmd), so);
      outcomes = rules::classify_hybrid_batch(
          sentences, loaded.lexicon, profile, *fallback,
          o.delegate_always ? rules::DelegationPolicy::always : rules::DelegationPolicy::names_and_pronouns);
    } else {
      outcomes = rules::classify_rule_batch(sentences, loaded.lexicon, profile,
                                            o.serial ? rules::Execution::serial : rules::Execution::parallel);
    }
  }
  write_output(o.out, [&](std::ostream& os) { rules::write_outcomes_csv(os, sentences, outcomes); });
  if (!o.rationale_out.empty()) {
    write_output(o.rationale_out, [&](std::ostream& os) {
      for (std::size_t i = 0; i < sentences.size(); ++i) os << outcome_json(sentences[i], outcomes[i]).dump() << "\n";
    });
  }
  std::size_t reg = 0, delegated = 0;
  for (const auto& oc : outcomes) {
    reg += oc.label == rules::Label::regulatory;
    delegated += oc.rationale.delegated;
  }
  out << sentences.size() << " sentences: " << reg << " regulatory, " << sentences.size() - reg
      << " non_regulatory";
  if (o.hybrid) out << " (" << delegated << " delegated)";
  out << "\n";
  return ok;
}

int do_evaluate(const Options& o, std::ostream& out, std::ostream&) {
  auto gold = metrics::read_gold_csv(o.gold);
  std::vector<std::pair<std::string, std::vector<int>>> preds;
  for (const auto& path : o.preds) {
    auto table = PredictionTable::from_csv(path);
    auto name = fs::path(path).stem().string();
    for (int n = 2; std::any_of(preds.begin(), preds.end(), [&](auto& p) { return p.first == name; }); ++n)
      name = fs::path(path).stem().string() + "#" + std::to_string(n);
    preds.emplace_back(name, metrics::predict_labels(table, gold));
  }
  auto cmp = metrics::compare_models(gold.labels, preds);
  auto table = metrics::render_table(cmp);
  out << table;
  if (!o.json_out.empty())
    write_output(o.json_out, [&](std::ostream& os) { os << metrics::to_json(cmp, gold.sentences).dump(2) << "\n"; });
  if (!o.out.empty()) write_output(o.out, [&](std::ostream& os) { os << table; });
  return ok;
}

int do_explain(const Options& o, std::ostream& out, std::ostream& err) {
  auto t = csv::read_table_file(o.sentences);
  std::size_t c_text;
  auto has = [&](const char* n) { return std::find(t.header.begin(), t.header.end(), n) != t.header.end(); };
  c_text = has("sentence") ? t.column("sentence", o.sentences) : t.column("text", o.sentences);
  std::optional<std::size_t> c_label;
  if (has("label")) c_label = t.column("label", o.sentences);

  std::unique_ptr<Classifier> clf;
  if (!o.model_cmd.empty()) clf = classifier_from_subprocess(split_command(o.model_cmd));
  else clf = classifier_from_predictions(o.predictions);

  std::vector<explain::Explanation> expls;
  std::vector<explain::Outcome> outcomes;
  nlohmann::json items = nlohmann::json::array();
  {
    Timer timer(err, "explain");
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      auto cfg = o.ecfg;
      cfg.seed = o.ecfg.seed + i;
      const auto& sentence = t.rows[i][c_text];
      auto e = explain::explain_sentence(sentence, *clf, cfg);
      auto j = explain::to_json(e);
      if (c_label) {
        const auto& l = t.rows[i][*c_label];
        if (l != "0" && l != "1") throw DataError(o.sentences, t.lines[i], "label must be 0 or 1");
        auto oc = explain::outcome_of(l == "1", e.class_scored == explain::ScoredClass::regulatory);
        outcomes.push_back(oc);
        j["outcome"] = explain::to_string(oc);
      }
      if (o.stability_runs >= 2) j["stability"] = explain::to_json(explain::stability_check(sentence, *clf, cfg, o.stability_runs, o.k));
      items.push_back(std::move(j));
      expls.push_back(std::move(e));
      err << "\rexplained " << i + 1 << "/" << t.rows.size() << std::flush;
    }
    err << "\n";
  }
  nlohmann::json doc{{"config",
                      {{"n_samples", o.ecfg.n_samples},
                       {"keep_probability", o.ecfg.keep_probability},
                       {"kernel_width", o.ecfg.kernel_width},
                       {"ridge_lambda", o.ecfg.ridge_lambda},
                       {"ngram", o.ecfg.ngram},
                       {"seed", o.ecfg.seed},
                       {"classifier", clf->name()}}},
                     {"explanations", std::move(items)}};
  write_output(o.out, [&](std::ostream& os) { os << doc.dump(2) << "\n"; });

  if (!o.freq_out.empty() || !o.position_out.empty()) {
    if (!c_label) throw DataError(o.sentences, 1, "aggregate tables need a label column");
    if (!o.freq_out.empty()) {
      auto rows = explain::aggregate_influential(expls, outcomes, o.k, o.min_freq);
      write_output(o.freq_out, [&](std::ostream& os) { explain::write_frequency_csv(os, rows); });
    }
    if (!o.position_out.empty()) {
      auto stats = explain::position_stats(expls, outcomes, o.k);
      write_output(o.position_out, [&](std::ostream& os) { explain::write_position_csv(os, stats); });
    }
  }
  out << "explained " << expls.size() << " sentences\n";
  return ok;
}

int do_fetch_metadata(const Options& o, std::ostream& out, std::ostream& err) {
  auto ids = text::read_phrase_file(o.ids);
  corpus::MetadataClientConfig cfg;
  cfg.endpoint = o.endpoint;
  cfg.ids_per_request = o.batch;
  cfg.min_interval = std::chrono::milliseconds(o.interval_ms);
  auto r = corpus::fetch_metadata(ids, cfg);
  write_output(o.out, [&](std::ostream& os) { corpus::write_metadata_csv(os, r.records); });
  for (const auto& u : r.unresolved) err << u.celex_id << ": " << u.reason << "\n";
  if (!o.unresolved_out.empty()) {
    write_output(o.unresolved_out, [&](std::ostream& os) {
      csv::write_row(os, {"celex_id", "reason"});
      for (const auto& u : r.unresolved) csv::write_row(os, {u.celex_id, u.reason});
    });
  }
  out << r.records.size() << " resolved, " << r.unresolved.size() << " unresolved\n";
  return ok;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Regulatory-statement classification toolkit for EU legislation", "lexrule"};
  app.require_subcommand(1);
  Options o;
  o.lexicon = default_lexicon();
  auto existing = CLI::ExistingFile;

  auto* extract = app.add_subcommand("extract", "Cut the enacting terms out of each act");
  extract->add_option("--docs", o.docs, "Directory of <celex_id>.txt files")->required()->check(CLI::ExistingDirectory);
  extract->add_option("--metadata", o.metadata, "Metadata CSV")->required()->check(existing);
  extract->add_option("--out-dir", o.out, "Directory for the extracted sections")->required();
  extract->add_option("--markers-start", o.markers_start, "Start-marker phrases")->check(existing)->capture_default_str();
  extract->add_option("--markers-end", o.markers_end, "End-marker phrases")->check(existing)->capture_default_str();

  auto* sentences = app.add_subcommand("sentences", "Segment sections and keep deontic candidates");
  sentences->add_option("--sections", o.sections, "Directory of extracted sections")->required()->check(CLI::ExistingDirectory);
  sentences->add_option("--metadata", o.metadata, "Metadata CSV")->required()->check(existing);
  sentences->add_option("--out", o.out, "Candidate CSV")->required();
  sentences->add_option("--abbreviations", o.abbreviations, "Abbreviation list")->check(existing)->capture_default_str();
  sentences->add_flag("--no-semicolon", o.no_semicolon, "Do not split at ';'");

  auto* sample = app.add_subcommand("sample", "Stratified equal-allocation sample by year and policy area");
  sample->add_option("--candidates", o.candidates, "Candidate CSV")->required()->check(existing);
  sample->add_option("--metadata", o.metadata, "Metadata CSV")->required()->check(existing);
  sample->add_option("--per-stratum", o.per_stratum, "Sentences per stratum")->required()->check(CLI::PositiveNumber);
  sample->add_option("--seed", o.seed, "Random seed")->required();
  sample->add_option("--out", o.out, "Sample CSV")->required();
  sample->add_option("--strata-out", o.strata_out, "Per-stratum report CSV");

  auto* classify = app.add_subcommand("classify", "Apply the dependency-tree rules to parsed sentences");
  classify->add_option("--conllu", o.conllu, "CoNLL-U input")->required()->check(existing);
  classify->add_option("--lexicon", o.lexicon, "Agent-noun lexicon (default $LEXRULE_LEXICON)")->check(existing)->capture_default_str();
  classify->add_option("--profile", o.profile, "Rule profile")->check(CLI::IsMember({"paper-v1", "refined"}))->capture_default_str();
  classify->add_option("--deprel-scheme", o.scheme, "Label scheme when the file does not declare one")
      ->check(CLI::IsMember({"ud_v2", "legacy_clear"}))->capture_default_str();
  classify->add_option("--out", o.out, "Outcome CSV")->required();
  classify->add_option("--rationale-out", o.rationale_out, "JSON-lines rationale per sentence");
  auto* hybrid = classify->add_flag("--hybrid", o.hybrid, "Delegate attribute-stage failures to a fallback model");
  auto* fcmd = classify->add_option("--fallback-cmd", o.fallback_cmd, "Fallback prediction process");
  hybrid->needs(fcmd);
  fcmd->needs(hybrid);
  classify->add_flag("--delegate-always", o.delegate_always, "Delegate every attribute-stage failure")->needs(hybrid);
  classify->add_option("--fallback-timeout-ms", o.fallback_timeout_ms, "Per-request timeout")->check(CLI::PositiveNumber)->capture_default_str();
  classify->add_flag("--serial", o.serial, "Single-threaded classification");

  auto* evaluate = app.add_subcommand("evaluate", "Score prediction CSVs against gold labels");
  evaluate->add_option("--gold", o.gold, "Gold CSV (sentence,label)")->required()->check(existing);
  evaluate->add_option("--pred", o.preds, "Prediction CSV (sentence,score); repeatable")->required()->check(existing);
  evaluate->add_option("--json", o.json_out, "JSON report");
  evaluate->add_option("--out", o.out, "Text table");

  auto* expl = app.add_subcommand("explain", "Token-masking attributions for sentences");
  expl->add_option("--sentences", o.sentences, "CSV with a sentence (or text) column and optional label")->required()->check(existing);
  auto* mcmd = expl->add_option("--model-cmd", o.model_cmd, "Prediction process to explain");
  auto* mpred = expl->add_option("--predictions", o.predictions, "Prediction CSV to explain")->check(existing);
  mcmd->excludes(mpred);
  expl->add_option("--seed", o.ecfg.seed, "Random seed")->required();
  expl->add_option("--out", o.out, "Explanation JSON")->required();
  expl->add_option("--n-samples", o.ecfg.n_samples, "Masks per sentence")->capture_default_str();
  expl->add_option("--keep-prob", o.ecfg.keep_probability, "Keep probability per unit")->capture_default_str();
  expl->add_option("--ngram", o.ecfg.ngram, "Tokens per masking unit")->capture_default_str();
  expl->add_option("--kernel-width", o.ecfg.kernel_width, "Kernel width")->capture_default_str();
  expl->add_option("--ridge-lambda", o.ecfg.ridge_lambda, "Ridge penalty")->capture_default_str();
  expl->add_option("--threads", o.ecfg.scoring_threads, "Scoring threads (0 = all)")->capture_default_str();
  expl->add_option("--k", o.k, "Top tokens per sentence")->check(CLI::PositiveNumber)->capture_default_str();
  expl->add_option("--min-freq", o.min_freq, "Frequency cut-off")->capture_default_str();
  expl->add_option("--freq-out", o.freq_out, "Influential-word frequency CSV");
  expl->add_option("--position-out", o.position_out, "Position and length statistics CSV");
  expl->add_option("--stability-runs", o.stability_runs, "Re-run each sentence with this many seeds");

  auto* fetch = app.add_subcommand("fetch-metadata", "Look up year and policy area for CELEX ids");
  fetch->add_option("--ids", o.ids, "File with one CELEX id per line")->required()->check(existing);
  fetch->add_option("--out", o.out, "Metadata CSV")->required();
  fetch->add_option("--endpoint", o.endpoint, "SPARQL endpoint")->capture_default_str();
  fetch->add_option("--batch", o.batch, "Ids per request")->check(CLI::PositiveNumber)->capture_default_str();
  fetch->add_option("--interval-ms", o.interval_ms, "Minimum spacing between requests")->capture_default_str();
  fetch->add_option("--unresolved-out", o.unresolved_out, "CSV of ids that could not be resolved");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
    if (expl->parsed()) {
      if (o.model_cmd.empty() && o.predictions.empty())
        throw CLI::RequiredError("explain needs --model-cmd or --predictions");
      try {
        o.ecfg.validate();
      } catch (const explain::InvalidConfig& e) {
        throw CLI::ValidationError(e.what());
      }
    }
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    for (auto* sub : app.get_subcommands()) out << sub->help();
    return ok;
  } catch (const CLI::ParseError& e) {
    std::ostringstream so, se;
    int rc = app.exit(e, so, se);
    out << so.str();
    err << se.str();
    return rc == 0 ? ok : usage_error;
  }

  try {
    if (extract->parsed()) return do_extract(o, out, err);
    if (sentences->parsed()) return do_sentences(o, out, err);
    if (sample->parsed()) return do_sample(o, out, err);
    if (classify->parsed()) return do_classify(o, out, err);
    if (evaluate->parsed()) return do_evaluate(o, out, err);
    if (expl->parsed()) return do_explain(o, out, err);
    if (fetch->parsed()) return do_fetch_metadata(o, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return data_error;
  }
  return usage_error;
}

}  // namespace lexrule::cli
