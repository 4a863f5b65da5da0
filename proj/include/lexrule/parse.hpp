#pragma once

#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "lexrule/error.hpp"

namespace lexrule::parse {

enum class Upos {
  ADJ, ADP, ADV, AUX, CCONJ, DET, INTJ, NOUN, NUM, PART, PRON, PROPN, PUNCT, SCONJ, SYM, VERB, X
};

std::string_view to_string(Upos u);
/// Unknown tags (spaCy's SPACE, for instance) map to X.
Upos upos_from_string(std::string_view s);

enum class Scheme { ud_v2, legacy_clear };

std::string_view to_string(Scheme s);
Scheme scheme_from_string(std::string_view s);

/// Canonical dependency relation shared by both label schemes.
struct Relation {
  enum class Kind {
    aux,           // aux
    passive_aux,   // aux:pass, auxpass
    subj,          // nsubj
    passive_subj,  // nsubj:pass, csubj:pass, nsubjpass, csubjpass
    agent,         // obl:agent, agent
    prep,          // case (UD), prep (legacy): the preposition itself
    prep_obj,      // obl, nmod (UD), pobj (legacy): object of a preposition
    compound,      // compound, flat, flat:name, nn
    conj,          // conj
    other,
  };
  Kind kind = Kind::other;
  std::string raw;  // label as read

  bool operator==(const Relation&) const = default;
};

/// Total: unknown labels give Kind::other with the raw label kept.
Relation map_label(std::string_view raw_deprel, Scheme scheme);

struct Token {
  int index = 0;  // 1-based
  std::string form;
  std::string lemma;
  Upos upos = Upos::X;
  std::string xpos = "_";
  std::string feats = "_";
  int head = 0;  // 0 = root
  Relation deprel;
  std::string deps = "_";
  std::string misc = "_";
  std::size_t start_char = 0;  // byte offset into the sentence text
};

/// A dependency tree over one sentence. Construction validates the tree,
/// after which the object is immutable.
class ParsedSentence {
 public:
  ParsedSentence(std::string text, std::vector<Token> tokens, Scheme scheme,
                 std::string sent_id = {});

  const std::string& text() const noexcept { return text_; }
  const std::string& sent_id() const noexcept { return sent_id_; }
  Scheme scheme() const noexcept { return scheme_; }
  std::size_t size() const noexcept { return tokens_.size(); }
  const std::vector<Token>& tokens() const noexcept { return tokens_; }

  /// Token by 1-based index.
  const Token& token(int index) const { return tokens_.at(static_cast<std::size_t>(index - 1)); }
  /// Dependents of a token, ascending index. Index 0 gives the root(s).
  const std::vector<int>& children(int index) const {
    return children_.at(static_cast<std::size_t>(index));
  }
  int root() const noexcept { return children_[0].front(); }

 private:
  std::string text_;
  std::vector<Token> tokens_;
  std::vector<std::vector<int>> children_;
  Scheme scheme_;
  std::string sent_id_;
};

class MalformedConllu : public DataError {
 public:
  using DataError::DataError;
};

/// Reads CoNLL-U blocks. `# text =` supplies the sentence text and
/// `# scheme =` overrides `default_scheme` from that point on. Multiword
/// ranges and empty nodes are skipped.
std::vector<ParsedSentence> read_conllu(std::istream& in, const std::string& source_name,
                                        Scheme default_scheme = Scheme::ud_v2);
std::vector<ParsedSentence> read_conllu_file(const std::string& path,
                                             Scheme default_scheme = Scheme::ud_v2);

void write_conllu(std::ostream& out, const std::vector<ParsedSentence>& sentences);

class AgentLexicon {
 public:
  AgentLexicon() = default;
  explicit AgentLexicon(const std::vector<std::string>& phrases);

  /// `phrase` must already be lower-cased and single-spaced.
  bool contains(std::string_view phrase) const { return entries_.contains(std::string(phrase)); }
  std::size_t size() const noexcept { return entries_.size(); }
  bool erase(const std::string& phrase) { return entries_.erase(phrase) > 0; }

  static std::string normalize(std::string_view phrase);

 private:
  std::unordered_set<std::string> entries_;
};

struct LoadedLexicon {
  AgentLexicon lexicon;
  std::size_t entries = 0;
  std::vector<std::string> warnings;  // e.g. an empty lexicon
};

LoadedLexicon load_lexicon(const std::string& path);

struct AgentTest {
  bool is_agent = false;
  std::string matched;  // lexicon phrase, or the proper-noun form
};

/// Agenthood of a nominal: PROPN always; PRON never; otherwise the lemma,
/// or the lemma phrase of the token with its contiguous compound/flat
/// modifiers (any suffix of up to four words ending at the token), is in the
/// lexicon. Non-nominals are never agents.
AgentTest is_agent_noun(int token_index, const ParsedSentence& sentence,
                        const AgentLexicon& lexicon);

bool is_nominal(Upos u);

}  // namespace lexrule::parse
