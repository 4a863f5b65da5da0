#include <array>
#include <fstream>
#include <sstream>

#include "lexrule/parse.hpp"
#include "lexrule/text.hpp"

namespace lexrule::parse {

namespace {

constexpr std::array<std::string_view, 17> kUposNames = {
    "ADJ", "ADP", "ADV", "AUX", "CCONJ", "DET", "INTJ", "NOUN", "NUM",
    "PART", "PRON", "PROPN", "PUNCT", "SCONJ", "SYM", "VERB", "X"};

struct LabelEntry {
  std::string_view label;
  Relation::Kind kind;
};

constexpr std::array<LabelEntry, 15> kUdLabels = {{
    {"aux", Relation::Kind::aux},
    {"aux:pass", Relation::Kind::passive_aux},
    {"nsubj", Relation::Kind::subj},
    {"nsubj:pass", Relation::Kind::passive_subj},
    {"csubj:pass", Relation::Kind::passive_subj},
    {"obl:agent", Relation::Kind::agent},
    {"case", Relation::Kind::prep},
    {"obl", Relation::Kind::prep_obj},
    {"nmod", Relation::Kind::prep_obj},
    {"compound", Relation::Kind::compound},
    {"flat", Relation::Kind::compound},
    {"flat:name", Relation::Kind::compound},
    {"flat:foreign", Relation::Kind::compound},
    {"conj", Relation::Kind::conj},
    {"nsubj:outer", Relation::Kind::subj},
}};

constexpr std::array<LabelEntry, 11> kLegacyLabels = {{
    {"aux", Relation::Kind::aux},
    {"auxpass", Relation::Kind::passive_aux},
    {"nsubj", Relation::Kind::subj},
    {"nsubjpass", Relation::Kind::passive_subj},
    {"csubjpass", Relation::Kind::passive_subj},
    {"agent", Relation::Kind::agent},
    {"prep", Relation::Kind::prep},
    {"pobj", Relation::Kind::prep_obj},
    {"compound", Relation::Kind::compound},
    {"nn", Relation::Kind::compound},
    {"conj", Relation::Kind::conj},
}};

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t b = 0;
  for (;;) {
    auto e = line.find('\t', b);
    out.push_back(line.substr(b, e == std::string::npos ? std::string::npos : e - b));
    if (e == std::string::npos) break;
    b = e + 1;
  }
  return out;
}

bool parse_int(const std::string& s, int& out) {
  if (s.empty()) return false;
  int v = 0;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
    v = v * 10 + (c - '0');
    if (v > 1'000'000) return false;
  }
  out = v;
  return true;
}

bool space_after_no(const std::string& misc) {
  std::istringstream ss(misc);
  std::string item;
  while (std::getline(ss, item, '|'))
    if (item == "SpaceAfter=No") return true;
  return false;
}

struct Block {
  std::string text;
  bool has_text = false;
  std::string sent_id;
  std::vector<Token> tokens;
  std::size_t first_line = 0;
};

// Offsets by locating each form in the text; if any form is missing, fall
// back to cumulative lengths with single spaces (SpaceAfter=No honoured)
// and rebuild the text from the forms.
void assign_offsets(Block& b) {
  if (b.has_text) {
    std::size_t cursor = 0;
    bool ok = true;
    std::vector<std::size_t> offsets;
    for (const auto& t : b.tokens) {
      auto pos = b.text.find(t.form, cursor);
      if (pos == std::string::npos || t.form.empty()) {
        ok = false;
        break;
      }
      offsets.push_back(pos);
      cursor = pos + t.form.size();
    }
    if (ok) {
      for (std::size_t i = 0; i < b.tokens.size(); ++i) b.tokens[i].start_char = offsets[i];
      return;
    }
  }
  std::string rebuilt;
  for (std::size_t i = 0; i < b.tokens.size(); ++i) {
    b.tokens[i].start_char = rebuilt.size();
    rebuilt += b.tokens[i].form;
    if (i + 1 < b.tokens.size() && !space_after_no(b.tokens[i].misc)) rebuilt += ' ';
  }
  b.text = std::move(rebuilt);
}

}  // namespace

std::string_view to_string(Upos u) { return kUposNames[static_cast<std::size_t>(u)]; }

Upos upos_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kUposNames.size(); ++i)
    if (kUposNames[i] == s) return static_cast<Upos>(i);
  return Upos::X;
}

std::string_view to_string(Scheme s) { return s == Scheme::ud_v2 ? "ud_v2" : "legacy_clear"; }

Scheme scheme_from_string(std::string_view s) {
  if (s == "ud_v2" || s == "ud-v2") return Scheme::ud_v2;
  if (s == "legacy_clear" || s == "legacy-clear") return Scheme::legacy_clear;
  throw Error("unknown dependency label scheme '" + std::string(s) + "'");
}

Relation map_label(std::string_view raw, Scheme scheme) {
  auto lookup = [&](const auto& table) {
    for (const auto& e : table)
      if (e.label == raw) return Relation{e.kind, std::string(raw)};
    return Relation{Relation::Kind::other, std::string(raw)};
  };
  return scheme == Scheme::ud_v2 ? lookup(kUdLabels) : lookup(kLegacyLabels);
}

bool is_nominal(Upos u) { return u == Upos::NOUN || u == Upos::PROPN || u == Upos::PRON; }

ParsedSentence::ParsedSentence(std::string text, std::vector<Token> tokens, Scheme scheme,
                               std::string sent_id)
    : text_(std::move(text)), tokens_(std::move(tokens)), scheme_(scheme), sent_id_(std::move(sent_id)) {
  const int n = static_cast<int>(tokens_.size());
  if (n == 0) throw Error("sentence has no tokens");
  children_.assign(static_cast<std::size_t>(n) + 1, {});
  for (int i = 0; i < n; ++i) {
    const Token& t = tokens_[static_cast<std::size_t>(i)];
    if (t.index != i + 1) throw Error("token ids must run 1..n, found " + std::to_string(t.index));
    if (t.head < 0 || t.head > n) throw Error("head out of range at token " + std::to_string(t.index));
    if (t.head == t.index) throw Error("self-loop at token " + std::to_string(t.index));
    if (i > 0 && t.start_char <= tokens_[static_cast<std::size_t>(i - 1)].start_char)
      throw Error("token offsets not increasing at token " + std::to_string(t.index));
    children_[static_cast<std::size_t>(t.head)].push_back(t.index);
  }
  if (children_[0].size() != 1)
    throw Error("expected exactly one root, found " + std::to_string(children_[0].size()));
  // Every token must reach the root without revisiting a node.
  for (int i = 1; i <= n; ++i) {
    int steps = 0;
    for (int cur = i; cur != 0; cur = tokens_[static_cast<std::size_t>(cur - 1)].head)
      if (++steps > n) throw Error("cycle through token " + std::to_string(i));
  }
}

std::vector<ParsedSentence> read_conllu(std::istream& in, const std::string& source,
                                        Scheme default_scheme) {
  std::vector<ParsedSentence> out;
  Scheme scheme = default_scheme;
  Block block;
  std::string line;
  std::size_t line_no = 0;

  auto flush = [&] {
    if (block.tokens.empty()) {
      block = Block{};
      return;
    }
    assign_offsets(block);
    try {
      out.emplace_back(std::move(block.text), std::move(block.tokens), scheme, block.sent_id);
    } catch (const MalformedConllu&) {
      throw;
    } catch (const Error& e) {
      throw MalformedConllu(source, block.first_line, e.what());
    }
    block = Block{};
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty()) {
      flush();
      continue;
    }
    if (line[0] == '#') {
      auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      std::string key = text::trim(line.substr(1, eq - 1));
      std::string value = text::trim(line.substr(eq + 1));
      if (key == "text") {
        block.text = value;
        block.has_text = true;
      } else if (key == "sent_id") {
        block.sent_id = value;
      } else if (key == "scheme") {
        try {
          scheme = scheme_from_string(value);
        } catch (const Error& e) {
          throw MalformedConllu(source, line_no, e.what());
        }
      }
      continue;
    }
    auto cols = split_tabs(line);
    if (cols.size() != 10)
      throw MalformedConllu(source, line_no,
                            "expected 10 tab-separated columns, got " + std::to_string(cols.size()));
    if (cols[0].find('-') != std::string::npos || cols[0].find('.') != std::string::npos)
      continue;  // multiword token range or empty node
    Token t;
    if (!parse_int(cols[0], t.index)) throw MalformedConllu(source, line_no, "bad token id '" + cols[0] + "'");
    if (!parse_int(cols[6], t.head)) throw MalformedConllu(source, line_no, "bad head '" + cols[6] + "'");
    t.form = cols[1];
    t.lemma = cols[2];
    t.upos = upos_from_string(cols[3]);
    t.xpos = cols[4];
    t.feats = cols[5];
    t.deprel = map_label(cols[7], scheme);
    t.deps = cols[8];
    t.misc = cols[9];
    if (block.tokens.empty()) block.first_line = line_no;
    block.tokens.push_back(std::move(t));
  }
  flush();
  return out;
}

std::vector<ParsedSentence> read_conllu_file(const std::string& path, Scheme default_scheme) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return read_conllu(in, path, default_scheme);
}

void write_conllu(std::ostream& out, const std::vector<ParsedSentence>& sentences) {
  std::optional<Scheme> current;
  for (const auto& s : sentences) {
    if (current != s.scheme()) {
      out << "# scheme = " << to_string(s.scheme()) << '\n';
      current = s.scheme();
    }
    if (!s.sent_id().empty()) out << "# sent_id = " << s.sent_id() << '\n';
    out << "# text = " << s.text() << '\n';
    for (const auto& t : s.tokens()) {
      out << t.index << '\t' << t.form << '\t' << t.lemma << '\t' << to_string(t.upos) << '\t'
          << t.xpos << '\t' << t.feats << '\t' << t.head << '\t' << t.deprel.raw << '\t' << t.deps
          << '\t' << t.misc << '\n';
    }
    out << '\n';
  }
}

}  // namespace lexrule::parse
