#include <algorithm>

#include "lexrule/parse.hpp"
#include "lexrule/text.hpp"

namespace lexrule::parse {

AgentLexicon::AgentLexicon(const std::vector<std::string>& phrases) {
  for (const auto& p : phrases) {
    auto n = normalize(p);
    if (!n.empty()) entries_.insert(std::move(n));
  }
}

std::string AgentLexicon::normalize(std::string_view phrase) {
  return text::to_lower_ascii(text::collapse_whitespace(phrase));
}

LoadedLexicon load_lexicon(const std::string& path) {
  LoadedLexicon out{AgentLexicon(text::read_phrase_file(path)), 0, {}};
  out.entries = out.lexicon.size();
  if (out.entries == 0) out.warnings.push_back(path + ": lexicon is empty; only proper nouns will count as agents");
  return out;
}

namespace {

std::string lemma_key(const Token& t) {
  const std::string& base = (t.lemma.empty() || t.lemma == "_" || t.lemma == "-PRON-") ? t.form : t.lemma;
  return text::to_lower_ascii(base);
}

}  // namespace

AgentTest is_agent_noun(int token_index, const ParsedSentence& s, const AgentLexicon& lexicon) {
  const Token& tok = s.token(token_index);
  if (tok.upos == Upos::PRON || !is_nominal(tok.upos)) return {};
  if (tok.upos == Upos::PROPN) return {true, tok.form};

  // Contiguous compound modifiers to the left (possibly chained) and flat
  // continuations to the right.
  auto inside = [&](int idx, int lo, int hi) { return idx >= lo && idx <= hi; };
  int left = token_index;
  while (left > 1) {
    const Token& prev = s.token(left - 1);
    if (prev.deprel.kind != Relation::Kind::compound || !inside(prev.head, left, token_index)) break;
    --left;
  }
  int right = token_index;
  while (right < static_cast<int>(s.size())) {
    const Token& next = s.token(right + 1);
    if (next.deprel.kind != Relation::Kind::compound || !inside(next.head, token_index, right)) break;
    ++right;
  }

  constexpr int kMaxWords = 4;
  for (int width = std::min(kMaxWords, right - left + 1); width >= 1; --width) {
    for (int lo = std::max(left, token_index - width + 1); lo <= token_index; ++lo) {
      int hi = lo + width - 1;
      if (hi > right) break;
      std::string phrase;
      for (int i = lo; i <= hi; ++i) {
        if (i > lo) phrase += ' ';
        phrase += lemma_key(s.token(i));
      }
      if (lexicon.contains(phrase)) return {true, phrase};
    }
  }
  return {};
}

}  // namespace lexrule::parse
