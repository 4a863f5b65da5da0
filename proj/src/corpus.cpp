#include "lexrule/corpus.hpp"

#include <algorithm>
#include <filesystem>
#include <numeric>
#include <set>
#include <tuple>

#include "lexrule/csv.hpp"
#include "lexrule/rng.hpp"
#include "lexrule/text.hpp"

namespace lexrule::corpus {

std::string_view to_string(LegalForm f) {
  switch (f) {
    case LegalForm::regulation: return "regulation";
    case LegalForm::directive: return "directive";
    case LegalForm::decision: return "decision";
    case LegalForm::other: return "other";
  }
  return "other";
}

LegalForm legal_form_from_string(std::string_view s) {
  std::string l = text::to_lower_ascii(s);
  if (l == "regulation") return LegalForm::regulation;
  if (l == "directive") return LegalForm::directive;
  if (l == "decision") return LegalForm::decision;
  if (l == "other") return LegalForm::other;
  throw Error("unknown legal form '" + std::string(s) + "'");
}

LegalForm legal_form_from_celex(std::string_view celex_id) {
  // Sector digit, four-digit year, type letter(s), number: 32020R0723.
  if (celex_id.size() < 6 || celex_id[0] != '3') return LegalForm::other;
  switch (celex_id[5]) {
    case 'R': return LegalForm::regulation;
    case 'L': return LegalForm::directive;
    case 'D': return LegalForm::decision;
    default: return LegalForm::other;
  }
}

void validate(const DocumentMetadata& m) {
  if (m.celex_id.empty()) throw Error("empty celex_id");
  if (m.adoption_year < 1952 || m.adoption_year > 2100)
    throw Error(m.celex_id + ": adoption_year " + std::to_string(m.adoption_year) +
                " outside [1952, 2100]");
}

MarkerDictionary MarkerDictionary::load(const std::string& start_path,
                                        const std::string& end_path) {
  MarkerDictionary d{text::read_phrase_file(start_path), text::read_phrase_file(end_path)};
  if (d.start.empty()) throw Error(start_path + ": no start phrases");
  if (d.end.empty()) throw Error(end_path + ": no end phrases");
  return d;
}

std::string extract_regulatory_section(std::string_view full_text,
                                       const MarkerDictionary& markers) {
  std::size_t best = std::string_view::npos, section_begin = 0;
  for (const auto& phrase : markers.start) {
    auto pos = full_text.find(phrase);
    if (pos < best) {
      best = pos;
      section_begin = pos + phrase.size();
    }
  }
  if (best == std::string_view::npos) throw NoStartMarker();

  std::size_t section_end = std::string_view::npos;
  for (const auto& phrase : markers.end)
    section_end = std::min(section_end, full_text.find(phrase, section_begin));
  if (section_end == std::string_view::npos) throw NoEndMarker();

  std::string section = text::trim(full_text.substr(section_begin, section_end - section_begin));
  if (!section.empty() && section.front() == ':') section = text::trim(section.substr(1));
  return section;
}

SegmenterConfig SegmenterConfig::load(const std::string& abbreviations_path) {
  return SegmenterConfig{text::read_phrase_file(abbreviations_path), true};
}

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f'; }

bool is_digit(char c) { return c >= '0' && c <= '9'; }

// "1.", "12.", "1a.", "(1).", "(a).", "a." style enumeration markers.
bool is_list_marker(std::string_view tok) {
  if (tok.size() < 2 || tok.back() != '.') return false;
  tok.remove_suffix(1);
  if (tok.size() >= 2 && tok.front() == '(' && tok.back() == ')') tok = tok.substr(1, tok.size() - 2);
  if (tok.empty()) return false;
  if (is_digit(tok[0])) {
    std::size_t i = 0;
    while (i < tok.size() && is_digit(tok[i])) ++i;
    return i == tok.size() || (i + 1 == tok.size() && tok[i] >= 'a' && tok[i] <= 'z');
  }
  return tok.size() == 1 && tok[0] >= 'a' && tok[0] <= 'z';
}

}  // namespace

std::vector<std::string> segment_sentences(std::string_view s, const SegmenterConfig& cfg) {
  std::vector<std::string> out;
  std::size_t sentence_begin = 0;
  auto emit = [&](std::size_t end) {
    std::string t = text::trim(s.substr(sentence_begin, end - sentence_begin));
    if (!t.empty()) out.push_back(std::move(t));
    sentence_begin = end;
  };

  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (c != '.' && c != '?' && c != '!' && c != ';') continue;
    if (i + 1 < s.size() && !is_space(s[i + 1])) continue;
    if (c == ';' && !cfg.split_on_semicolon) continue;

    if (c == '.') {
      std::size_t tok_begin = i;
      while (tok_begin > sentence_begin && !is_space(s[tok_begin - 1])) --tok_begin;
      std::string_view tok = s.substr(tok_begin, i + 1 - tok_begin);
      std::string_view bare = tok;
      while (!bare.empty() && (bare.front() == '(' || bare.front() == '[' || bare.front() == '"'))
        bare.remove_prefix(1);
      if (std::find(cfg.abbreviations.begin(), cfg.abbreviations.end(), bare) !=
          cfg.abbreviations.end())
        continue;
      bool opens_sentence = text::trim(s.substr(sentence_begin, tok_begin - sentence_begin)).empty();
      std::size_t j = tok_begin;
      while (j > sentence_begin && (s[j - 1] == ' ' || s[j - 1] == '\t')) --j;
      bool opens_line = j > 0 && s[j - 1] == '\n';
      if ((opens_sentence || opens_line) && is_list_marker(tok)) continue;
    }
    emit(i + 1);
  }
  emit(s.size());
  return out;
}

std::vector<std::string> deontic_tokens(std::string_view sentence) {
  std::vector<std::string> found;
  std::string lower = text::to_lower_ascii(sentence);
  for (std::size_t i = 0; i < lower.size(); ++i) {
    if (i > 0 && text::is_word_byte(static_cast<unsigned char>(lower[i - 1]))) continue;
    for (std::string_view word : {std::string_view("shall"), std::string_view("must")}) {
      if (lower.compare(i, word.size(), word) != 0) continue;
      std::size_t after = i + word.size();
      if (after < lower.size() && text::is_word_byte(static_cast<unsigned char>(lower[after])))
        continue;
      found.emplace_back(word);
    }
  }
  return found;
}

std::vector<CandidateSentence> filter_deontic(const std::vector<std::string>& sentences,
                                              const std::string& doc_id) {
  std::vector<CandidateSentence> out;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    auto tokens = deontic_tokens(sentences[i]);
    if (tokens.empty()) continue;
    out.push_back(CandidateSentence{doc_id, i, sentences[i], std::move(tokens)});
  }
  return out;
}

SampleResult stratify_sample(const std::vector<CandidateSentence>& candidates,
                             const std::map<std::string, StratumKey>& metadata,
                             std::size_t per_stratum, std::uint64_t seed) {
  if (per_stratum < 1) throw Error("per_stratum must be >= 1");

  SampleResult result;
  std::map<StratumKey, std::vector<const CandidateSentence*>> groups;
  for (const auto& c : candidates) {
    auto it = metadata.find(c.doc_id);
    if (it == metadata.end()) {
      ++result.missing_metadata;
      continue;
    }
    groups[it->second].push_back(&c);
  }

  Rng rng(seed);
  for (auto& [key, members] : groups) {
    if (members.size() < per_stratum) {
      result.excluded.push_back(key);
      continue;
    }
    std::sort(members.begin(), members.end(), [](const CandidateSentence* x, const CandidateSentence* y) {
      return std::tie(x->doc_id, x->index_in_doc, x->text) < std::tie(y->doc_id, y->index_in_doc, y->text);
    });
    std::vector<std::size_t> idx(members.size());
    std::iota(idx.begin(), idx.end(), 0);
    Stratum stratum{key.year, key.policy_area, {}};
    for (std::size_t i = 0; i < per_stratum; ++i) {
      std::size_t j = i + static_cast<std::size_t>(rng.below(idx.size() - i));
      std::swap(idx[i], idx[j]);
      stratum.sentences.push_back(*members[idx[i]]);
      result.sentences.push_back(*members[idx[i]]);
    }
    result.strata.push_back(std::move(stratum));
  }
  return result;
}

std::vector<DocumentMetadata> read_metadata_csv(const std::string& path) {
  auto t = csv::read_table_file(path);
  auto c_id = t.column("celex_id", path), c_year = t.column("adoption_year", path),
       c_area = t.column("policy_area", path), c_form = t.column("legal_form", path);
  std::vector<DocumentMetadata> out;
  std::set<std::string> seen;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    try {
      DocumentMetadata m;
      m.celex_id = text::trim(row[c_id]);
      std::size_t used = 0;
      m.adoption_year = std::stoi(row[c_year], &used);
      if (used != row[c_year].size()) throw Error("bad adoption_year '" + row[c_year] + "'");
      m.policy_area = text::trim(row[c_area]);
      m.legal_form = legal_form_from_string(text::trim(row[c_form]));
      validate(m);
      if (!seen.insert(m.celex_id).second) throw Error("duplicate celex_id " + m.celex_id);
      out.push_back(std::move(m));
    } catch (const std::logic_error& e) {
      throw DataError(path, t.lines[r], std::string("bad adoption_year: ") + e.what());
    } catch (const Error& e) {
      throw DataError(path, t.lines[r], e.what());
    }
  }
  return out;
}

void write_metadata_csv(std::ostream& out, const std::vector<DocumentMetadata>& rows) {
  csv::write_row(out, {"celex_id", "adoption_year", "policy_area", "legal_form"});
  for (const auto& m : rows)
    csv::write_row(out, {m.celex_id, std::to_string(m.adoption_year), m.policy_area,
                         std::string(to_string(m.legal_form))});
}

std::vector<LegalDocument> load_documents(const std::string& dir,
                                          const std::vector<DocumentMetadata>& meta) {
  std::vector<LegalDocument> docs;
  docs.reserve(meta.size());
  for (const auto& m : meta) {
    auto path = (std::filesystem::path(dir) / (m.celex_id + ".txt")).string();
    docs.push_back(LegalDocument{m, text::read_file(path)});
  }
  return docs;
}

std::vector<CandidateSentence> read_candidates_csv(const std::string& path) {
  auto t = csv::read_table_file(path);
  auto c_doc = t.column("doc_id", path), c_idx = t.column("index_in_doc", path),
       c_text = t.column("text", path);
  std::vector<CandidateSentence> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    CandidateSentence c;
    c.doc_id = row[c_doc];
    try {
      c.index_in_doc = std::stoul(row[c_idx]);
    } catch (const std::logic_error&) {
      throw DataError(path, t.lines[r], "bad index_in_doc '" + row[c_idx] + "'");
    }
    c.text = row[c_text];
    c.deontic_tokens = deontic_tokens(c.text);
    if (c.deontic_tokens.empty())
      throw DataError(path, t.lines[r], "candidate sentence has no deontic token");
    out.push_back(std::move(c));
  }
  return out;
}

void write_candidates_csv(std::ostream& out, const std::vector<CandidateSentence>& rows) {
  csv::write_row(out, {"doc_id", "index_in_doc", "text"});
  for (const auto& c : rows) csv::write_row(out, {c.doc_id, std::to_string(c.index_in_doc), c.text});
}

}  // namespace lexrule::corpus
