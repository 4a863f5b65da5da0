#include "lexrule/ruleclf.hpp"

#include <cstdio>
#include <algorithm>
#include <cctype>
#include <deque>
#include <ostream>

#include "lexrule/csv.hpp"
#include "lexrule/text.hpp"

namespace lexrule::rules {

using parse::ParsedSentence;
using parse::Relation;
using parse::Token;
using parse::Upos;

std::string_view to_string(Label l) {
  return l == Label::regulatory ? "regulatory" : "non_regulatory";
}

std::string_view to_string(Voice v) { return v == Voice::active ? "active" : "passive"; }

std::string_view to_string(FailureReason r) {
  switch (r) {
    case FailureReason::no_deontic_verb: return "no_deontic_verb";
    case FailureReason::no_attribute_found: return "no_attribute_found";
    case FailureReason::pronoun_attribute: return "pronoun_attribute";
    case FailureReason::unknown_agent_noun: return "unknown_agent_noun";
  }
  return "";
}

std::string_view to_string(Profile p) { return p == Profile::paper_v1 ? "paper-v1" : "refined"; }

Profile profile_from_string(std::string_view s) {
  if (s == "paper-v1" || s == "paper_v1") return Profile::paper_v1;
  if (s == "refined") return Profile::refined;
  throw Error("unknown rule profile '" + std::string(s) + "' (expected paper-v1 or refined)");
}

namespace {

bool is_deontic_modal(const Token& t) {
  auto key = text::to_lower_ascii(t.lemma == "_" || t.lemma.empty() ? t.form : t.lemma);
  return key == "shall" || key == "must";
}

std::string modal_lemma(const Token& t) {
  auto key = text::to_lower_ascii(t.lemma);
  return key == "shall" || key == "must" ? key : text::to_lower_ascii(t.form);
}

// Lemma of the preposition introducing a prepositional object, if any.
std::optional<std::string> preposition_of(int idx, const ParsedSentence& s) {
  const Token& t = s.token(idx);
  if (t.deprel.kind != Relation::Kind::prep_obj) return std::nullopt;
  if (t.head != 0) {
    const Token& h = s.token(t.head);
    if (h.deprel.kind == Relation::Kind::prep || h.deprel.kind == Relation::Kind::agent)
      if (h.upos == Upos::ADP || h.upos == Upos::SCONJ || h.upos == Upos::PART)
        return text::to_lower_ascii(h.lemma);
  }
  for (int c : s.children(idx))
    if (s.token(c).deprel.kind == Relation::Kind::prep) return text::to_lower_ascii(s.token(c).lemma);
  return std::nullopt;
}

struct Visit {
  int node;
  int dist;
  bool via_agent;
  bool via_by;
};

bool is_name_like(std::string_view form) {
  for (unsigned char c : form)
    if (std::isalpha(c)) return std::isupper(c) != 0;
  return false;
}

}  // namespace

std::vector<DeonticVerb> find_deontic_verbs(const ParsedSentence& s) {
  const int n = static_cast<int>(s.size());
  std::vector<int> aux_of(static_cast<std::size_t>(n) + 1, 0);
  for (int v = 1; v <= n; ++v) {
    const Token& t = s.token(v);
    if (t.upos != Upos::VERB) continue;
    for (int c : s.children(v)) {
      const Token& d = s.token(c);
      if ((d.deprel.kind == Relation::Kind::aux || d.deprel.kind == Relation::Kind::passive_aux) &&
          is_deontic_modal(d)) {
        aux_of[static_cast<std::size_t>(v)] = c;
        break;
      }
    }
    if (!aux_of[static_cast<std::size_t>(v)] && t.head != 0) {
      const Token& h = s.token(t.head);
      if ((h.upos == Upos::AUX || h.upos == Upos::VERB) && is_deontic_modal(h))
        aux_of[static_cast<std::size_t>(v)] = t.head;
    }
  }
  // Conjoined verbs inherit the modal of their first conjunct.
  for (bool changed = true; changed;) {
    changed = false;
    for (int v = 1; v <= n; ++v) {
      const Token& t = s.token(v);
      if (t.upos != Upos::VERB || aux_of[static_cast<std::size_t>(v)] || t.head == 0) continue;
      if (t.deprel.kind == Relation::Kind::conj && aux_of[static_cast<std::size_t>(t.head)]) {
        aux_of[static_cast<std::size_t>(v)] = aux_of[static_cast<std::size_t>(t.head)];
        changed = true;
      }
    }
  }
  std::vector<DeonticVerb> out;
  for (int v = 1; v <= n; ++v)
    if (aux_of[static_cast<std::size_t>(v)]) out.push_back({v, aux_of[static_cast<std::size_t>(v)]});
  return out;
}

Voice detect_voice(int verb_index, const ParsedSentence& s) {
  for (int c : s.children(verb_index)) {
    auto k = s.token(c).deprel.kind;
    if (k == Relation::Kind::passive_aux || k == Relation::Kind::passive_subj) return Voice::passive;
  }
  return Voice::active;
}

std::string noun_phrase(int token_index, const ParsedSentence& s) {
  auto modifies_span = [&](const Token& t, int lo, int hi) {
    bool rel = t.deprel.kind == Relation::Kind::compound || t.deprel.raw == "amod";
    return rel && t.head >= lo && t.head <= hi;
  };
  int left = token_index;
  while (left > 1 && modifies_span(s.token(left - 1), left, token_index)) --left;
  int right = token_index;
  while (right < static_cast<int>(s.size()) &&
         s.token(right + 1).deprel.kind == Relation::Kind::compound &&
         s.token(right + 1).head >= token_index && s.token(right + 1).head <= right)
    ++right;
  const Token& first = s.token(left);
  const Token& last = s.token(right);
  return s.text().substr(first.start_char, last.start_char + last.form.size() - first.start_char);
}

AttributeSearch find_attribute(int verb_index, Voice voice, const ParsedSentence& s,
                               const parse::AgentLexicon& lexicon, Profile profile) {
  const bool backward = voice == Voice::active;

  // Breadth-first over the undirected tree; the first step picks the side.
  std::vector<Visit> visits;
  std::deque<std::pair<Visit, int>> queue;  // (visit, parent)
  auto edge_flags = [&](int child_in_tree, Visit v) {
    const Token& t = s.token(child_in_tree);
    if (t.deprel.kind == Relation::Kind::agent) v.via_agent = true;
    if (auto prep = preposition_of(child_in_tree, s); prep && *prep == "by") v.via_by = true;
    return v;
  };
  auto neighbours = [&](int node) {
    std::vector<int> out(s.children(node));
    if (int h = s.token(node).head; h != 0) out.push_back(h);
    return out;
  };
  for (int nb : neighbours(verb_index)) {
    if (backward ? nb > verb_index : nb < verb_index) continue;
    int child = s.token(nb).head == verb_index ? nb : verb_index;
    queue.push_back({edge_flags(child, Visit{nb, 1, false, false}), verb_index});
  }
  while (!queue.empty()) {
    auto [v, parent] = queue.front();
    queue.pop_front();
    visits.push_back(v);
    for (int nb : neighbours(v.node)) {
      if (nb == parent) continue;
      int child = s.token(nb).head == v.node ? nb : v.node;
      queue.push_back({edge_flags(child, Visit{nb, v.dist + 1, v.via_agent, v.via_by}), v.node});
    }
  }
  std::sort(visits.begin(), visits.end(), [](const Visit& a, const Visit& b) {
    return a.dist != b.dist ? a.dist < b.dist : a.node < b.node;
  });

  AttributeSearch result;
  std::optional<int> nearest_nominal, nearest_subject, first_non_agent;
  bool rejected_by_profile = false;
  for (const auto& v : visits) {
    const Token& t = s.token(v.node);
    if (!parse::is_nominal(t.upos)) continue;
    if (!nearest_nominal) nearest_nominal = v.node;
    auto k = t.deprel.kind;
    if (!nearest_subject && (k == Relation::Kind::subj || k == Relation::Kind::passive_subj))
      nearest_subject = v.node;

    auto test = parse::is_agent_noun(v.node, s, lexicon);
    if (!test.is_agent) {
      if (t.upos != Upos::PRON && !first_non_agent) first_non_agent = v.node;
      continue;
    }
    if (profile == Profile::refined && voice == Voice::passive && !(v.via_agent || v.via_by)) {
      rejected_by_profile = true;
      continue;
    }
    result.match = AttributeMatch{v.node, noun_phrase(v.node, s), test.matched};
    return result;
  }

  std::optional<int> reference = nearest_subject ? nearest_subject : nearest_nominal;
  if (reference && s.token(*reference).upos == Upos::PRON) {
    result.failure = FailureReason::pronoun_attribute;
    result.failed_candidate_index = reference;
  } else if (first_non_agent) {
    result.failure = FailureReason::unknown_agent_noun;
    bool reference_failed = reference && !parse::is_agent_noun(*reference, s, lexicon).is_agent;
    result.failed_candidate_index = reference_failed ? *reference : *first_non_agent;
  } else {
    result.failure = FailureReason::no_attribute_found;
    if (rejected_by_profile) result.failed_candidate_index = reference;
  }
  return result;
}

ClassificationOutcome classify_rule(const ParsedSentence& s, const parse::AgentLexicon& lexicon,
                                    Profile profile) {
  ClassificationOutcome out;
  auto verbs = find_deontic_verbs(s);
  if (verbs.empty()) {
    out.rationale.failure_reason = FailureReason::no_deontic_verb;
    return out;
  }
  std::optional<Rationale> first_failure;
  for (const auto& dv : verbs) {
    Rationale r;
    r.deontic_verb_index = dv.verb_index;
    r.deontic_aux_lemma = modal_lemma(s.token(dv.aux_index));
    r.voice = detect_voice(dv.verb_index, s);
    auto search = find_attribute(dv.verb_index, *r.voice, s, lexicon, profile);
    if (search.match) {
      r.attribute_token_index = search.match->token_index;
      r.attribute_phrase = search.match->phrase;
      out.label = Label::regulatory;
      out.score = 1.0;
      out.rationale = std::move(r);
      return out;
    }
    if (!first_failure) {
      r.failure_reason = search.failure;
      r.failed_candidate_index = search.failed_candidate_index;
      first_failure = std::move(r);
    }
  }
  out.rationale = std::move(*first_failure);
  return out;
}

std::vector<ClassificationOutcome> classify_rule_batch(std::span<const ParsedSentence> sentences,
                                                       const parse::AgentLexicon& lexicon,
                                                       Profile profile, Execution exec) {
  std::vector<ClassificationOutcome> out(sentences.size());
  const auto n = static_cast<std::ptrdiff_t>(sentences.size());
  if (exec == Execution::serial) {
    for (std::ptrdiff_t i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = classify_rule(sentences[static_cast<std::size_t>(i)], lexicon, profile);
    return out;
  }
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < n; ++i)
    out[static_cast<std::size_t>(i)] = classify_rule(sentences[static_cast<std::size_t>(i)], lexicon, profile);
  return out;
}

bool should_delegate(const ClassificationOutcome& rule_outcome, const ParsedSentence& s,
                     DelegationPolicy policy) {
  if (rule_outcome.label == Label::regulatory) return false;
  const auto& r = rule_outcome.rationale;
  if (!r.failure_reason || *r.failure_reason == FailureReason::no_deontic_verb) return false;
  if (policy == DelegationPolicy::always) return true;
  if (*r.failure_reason != FailureReason::unknown_agent_noun) return true;
  return r.failed_candidate_index && is_name_like(s.token(*r.failed_candidate_index).form);
}

namespace {

ClassificationOutcome delegated(ClassificationOutcome rule_outcome, double p, const std::string& name) {
  if (!(p >= 0.0 && p <= 1.0))
    throw FallbackUnavailable(name + ": score outside [0,1]: " + std::to_string(p));
  rule_outcome.score = p;
  rule_outcome.label = p >= 0.5 ? Label::regulatory : Label::non_regulatory;
  rule_outcome.rationale.delegated = true;
  rule_outcome.rationale.fallback_name = name;
  return rule_outcome;
}

}  // namespace

ClassificationOutcome classify_hybrid(const ParsedSentence& s, const parse::AgentLexicon& lexicon,
                                      Profile profile, Classifier& fallback, DelegationPolicy policy) {
  auto outcome = classify_rule(s, lexicon, profile);
  if (!should_delegate(outcome, s, policy)) return outcome;
  std::string text = s.text();
  auto scores = fallback.classify_batch(std::span<const std::string>(&text, 1));
  if (scores.size() != 1) throw FallbackUnavailable(fallback.name() + ": wrong number of scores");
  return delegated(std::move(outcome), scores[0], fallback.name());
}

std::vector<ClassificationOutcome> classify_hybrid_batch(std::span<const ParsedSentence> sentences,
                                                         const parse::AgentLexicon& lexicon,
                                                         Profile profile, Classifier& fallback,
                                                         DelegationPolicy policy) {
  auto outcomes = classify_rule_batch(sentences, lexicon, profile);
  std::vector<std::size_t> pending;
  std::vector<std::string> texts;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    if (!should_delegate(outcomes[i], sentences[i], policy)) continue;
    pending.push_back(i);
    texts.push_back(sentences[i].text());
  }
  if (pending.empty()) return outcomes;
  auto scores = fallback.classify_batch(texts);
  if (scores.size() != texts.size()) throw FallbackUnavailable(fallback.name() + ": wrong number of scores");
  for (std::size_t k = 0; k < pending.size(); ++k)
    outcomes[pending[k]] = delegated(std::move(outcomes[pending[k]]), scores[k], fallback.name());
  return outcomes;
}

RuleClassifier::RuleClassifier(std::span<const ParsedSentence> sentences,
                               const parse::AgentLexicon& lexicon, Profile profile)
    : profile_(profile) {
  auto outcomes = classify_rule_batch(sentences, lexicon, profile);
  for (std::size_t i = 0; i < sentences.size(); ++i)
    scores_.emplace(text::normalize_sentence(sentences[i].text()), outcomes[i].score);
}

std::vector<double> RuleClassifier::classify_batch(std::span<const std::string> texts) {
  std::vector<double> out;
  out.reserve(texts.size());
  for (const auto& t : texts) {
    auto it = scores_.find(text::normalize_sentence(t));
    if (it == scores_.end()) throw MissingPrediction(t);
    out.push_back(it->second);
  }
  return out;
}

std::string RuleClassifier::name() const { return "dep-rules(" + std::string(to_string(profile_)) + ")"; }

void write_outcomes_csv(std::ostream& out, std::span<const ParsedSentence> sentences,
                        std::span<const ClassificationOutcome> outcomes) {
  csv::write_row(out, {"sentence", "label", "score", "failure_reason", "attribute_phrase"});
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    const auto& o = outcomes[i];
    char score[32];
    std::snprintf(score, sizeof score, "%.17g", o.score);
    csv::write_row(out, {sentences[i].text(), o.label == Label::regulatory ? "1" : "0", score,
                         o.rationale.failure_reason ? std::string(to_string(*o.rationale.failure_reason)) : "",
                         o.rationale.attribute_phrase.value_or("")});
  }
}

}  // namespace lexrule::rules
