#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lexrule/classifier.hpp"
#include "lexrule/parse.hpp"

namespace lexrule::rules {

enum class Label { non_regulatory = 0, regulatory = 1 };
enum class Voice { active, passive };
enum class FailureReason { no_deontic_verb, no_attribute_found, pronoun_attribute, unknown_agent_noun };

/// paper_v1: any agent noun on the directional path is the attribute.
/// refined: passive-voice attributes must hang off an agent relation or a
/// "by" prepositional object.
enum class Profile { paper_v1, refined };

enum class DelegationPolicy {
  /// Delegate pronoun and no-attribute failures, and unknown agent nouns
  /// written like names (title case or all caps); keep the rule verdict for
  /// lower-case common nouns.
  names_and_pronouns,
  /// Delegate every attribute-stage failure.
  always,
};

std::string_view to_string(Label l);
std::string_view to_string(Voice v);
std::string_view to_string(FailureReason r);
std::string_view to_string(Profile p);
Profile profile_from_string(std::string_view s);

struct Rationale {
  std::optional<int> deontic_verb_index;
  std::optional<std::string> deontic_aux_lemma;
  std::optional<Voice> voice;
  std::optional<int> attribute_token_index;
  std::optional<std::string> attribute_phrase;
  std::optional<FailureReason> failure_reason;
  /// Nominal the failure refers to (the pronoun, or the non-agent noun).
  std::optional<int> failed_candidate_index;
  /// Set by classify_hybrid when the fallback decided.
  bool delegated = false;
  std::string fallback_name;

  bool operator==(const Rationale&) const = default;
};

struct ClassificationOutcome {
  Label label = Label::non_regulatory;
  double score = 0.0;
  Rationale rationale;

  bool operator==(const ClassificationOutcome&) const = default;
};

struct DeonticVerb {
  int verb_index;
  int aux_index;
  bool operator==(const DeonticVerb&) const = default;
};

/// Lexical verbs governed by "shall"/"must" (as aux dependent, or as head
/// for parses that hang the verb under the modal), plus verbs conjoined to
/// one of those. Ascending verb index.
std::vector<DeonticVerb> find_deontic_verbs(const parse::ParsedSentence& s);

Voice detect_voice(int verb_index, const parse::ParsedSentence& s);

struct AttributeMatch {
  int token_index;
  std::string phrase;          // surface noun phrase, e.g. "authorized operators"
  std::string agent_evidence;  // lexicon phrase or proper-noun form
};

struct AttributeSearch {
  std::optional<AttributeMatch> match;
  std::optional<FailureReason> failure;
  std::optional<int> failed_candidate_index;
};

/// Breadth-first search of the tree from the verb, restricted to paths whose
/// first step lies before the verb (active) or after it (passive). Nominals
/// are tried nearest first, ties by token index.
AttributeSearch find_attribute(int verb_index, Voice voice, const parse::ParsedSentence& s,
                               const parse::AgentLexicon& lexicon, Profile profile);

/// Surface noun phrase of a nominal: the token with its contiguous compound,
/// amod and flat modifiers.
std::string noun_phrase(int token_index, const parse::ParsedSentence& s);

ClassificationOutcome classify_rule(const parse::ParsedSentence& s,
                                    const parse::AgentLexicon& lexicon, Profile profile);

enum class Execution { serial, parallel };

/// classify_rule over many sentences. The parallel path is an OpenMP loop;
/// both produce identical results.
std::vector<ClassificationOutcome> classify_rule_batch(std::span<const parse::ParsedSentence> sentences,
                                                       const parse::AgentLexicon& lexicon,
                                                       Profile profile,
                                                       Execution exec = Execution::parallel);

/// Whether a rule outcome is handed to the fallback under `policy`.
bool should_delegate(const ClassificationOutcome& rule_outcome, const parse::ParsedSentence& s,
                     DelegationPolicy policy);

ClassificationOutcome classify_hybrid(const parse::ParsedSentence& s,
                                      const parse::AgentLexicon& lexicon, Profile profile,
                                      Classifier& fallback,
                                      DelegationPolicy policy = DelegationPolicy::names_and_pronouns);

/// classify_hybrid over many sentences with a single fallback batch call.
std::vector<ClassificationOutcome> classify_hybrid_batch(
    std::span<const parse::ParsedSentence> sentences, const parse::AgentLexicon& lexicon,
    Profile profile, Classifier& fallback,
    DelegationPolicy policy = DelegationPolicy::names_and_pronouns);

/// The rule engine behind the Classifier surface: scores known sentences
/// (matched by normalised text) with hard 0/1.
class RuleClassifier final : public Classifier {
 public:
  RuleClassifier(std::span<const parse::ParsedSentence> sentences,
                 const parse::AgentLexicon& lexicon, Profile profile);

  std::vector<double> classify_batch(std::span<const std::string> texts) override;
  std::string name() const override;

 private:
  std::unordered_map<std::string, double> scores_;
  Profile profile_;
};

/// Outcome CSV: sentence,label,score,failure_reason,attribute_phrase.
void write_outcomes_csv(std::ostream& out, std::span<const parse::ParsedSentence> sentences,
                        std::span<const ClassificationOutcome> outcomes);

}  // namespace lexrule::rules
