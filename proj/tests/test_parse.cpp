#include <doctest.h>

#include <sstream>

#include "lexrule/parse.hpp"
#include "support.hpp"

using namespace lexrule;
using namespace lexrule::parse;
using testsupport::fixture;
using Kind = Relation::Kind;

namespace {

std::string block(const std::string& text, std::initializer_list<std::string> rows) {
  std::string s = "# text = " + text + "\n";
  for (const auto& r : rows) s += r + "\n";
  return s + "\n";
}

}  // namespace

TEST_SUITE("parse") {
  TEST_CASE("read_conllu basics") {
    auto v = read_conllu_file(fixture("ud_examples.conllu"));
    REQUIRE(v.size() == 5);
    const auto& s = v[0];
    CHECK(s.text() == "Citizens must separate recyclables.");
    CHECK(s.sent_id() == "ud-1");
    CHECK(s.size() == 5);
    CHECK(s.root() == 3);
    CHECK(s.token(1).lemma == "citizen");
    CHECK(s.token(1).upos == Upos::NOUN);
    CHECK(s.token(5).start_char == 34);
    CHECK(s.children(3) == std::vector<int>{1, 2, 4, 5});
    std::istringstream empty;
    CHECK(read_conllu(empty, "empty").empty());
  }

  TEST_CASE("offsets point at each form and increase") {
    for (const auto& file : {"ud_examples.conllu", "reference_examples.conllu", "labelled.conllu"}) {
      for (const auto& s : read_conllu_file(fixture(file))) {
        std::size_t prev = 0;
        for (const auto& t : s.tokens()) {
          CHECK(s.text().compare(t.start_char, t.form.size(), t.form) == 0);
          if (t.index > 1) CHECK(t.start_char > prev);
          prev = t.start_char;
        }
      }
    }
  }

  TEST_CASE("ranges and empty nodes are skipped; text is rebuilt from SpaceAfter") {
    auto v = read_conllu_file(fixture("ud_examples.conllu"));
    const auto& s = v[4];
    CHECK(s.size() == 7);
    CHECK(s.text() == "Operators' staff must not smoke.");
    CHECK(s.token(3).form == "staff");
    CHECK(s.token(3).start_char == 11);
  }

  TEST_CASE("malformed input") {
    SUBCASE("nine columns") {
      std::istringstream in(block("A b", {"1\tA\ta\tNOUN\t_\t_\t0\troot\t_"}));
      try {
        read_conllu(in, "nine.conllu");
        FAIL("expected MalformedConllu");
      } catch (const MalformedConllu& e) {
        CHECK(e.line() == 2);
      }
    }
    SUBCASE("two roots") {
      std::istringstream in(block("A b", {"1\tA\ta\tNOUN\t_\t_\t0\troot\t_\t_", "2\tb\tb\tNOUN\t_\t_\t0\troot\t_\t_"}));
      CHECK_THROWS_AS(read_conllu(in, "m"), MalformedConllu);
    }
    SUBCASE("cycle") {
      std::istringstream in(block("A b c", {"1\tA\ta\tNOUN\t_\t_\t0\troot\t_\t_", "2\tb\tb\tNOUN\t_\t_\t3\tdep\t_\t_",
                                            "3\tc\tc\tNOUN\t_\t_\t2\tdep\t_\t_"}));
      CHECK_THROWS_AS(read_conllu(in, "m"), MalformedConllu);
    }
    SUBCASE("self loop and out-of-range head") {
      std::istringstream a(block("A b", {"1\tA\ta\tNOUN\t_\t_\t0\troot\t_\t_", "2\tb\tb\tNOUN\t_\t_\t2\tdep\t_\t_"}));
      CHECK_THROWS_AS(read_conllu(a, "m"), MalformedConllu);
      std::istringstream b(block("A b", {"1\tA\ta\tNOUN\t_\t_\t0\troot\t_\t_", "2\tb\tb\tNOUN\t_\t_\t9\tdep\t_\t_"}));
      CHECK_THROWS_AS(read_conllu(b, "m"), MalformedConllu);
    }
    SUBCASE("ids out of sequence") {
      std::istringstream in(block("A b", {"1\tA\ta\tNOUN\t_\t_\t0\troot\t_\t_", "3\tb\tb\tNOUN\t_\t_\t1\tdep\t_\t_"}));
      CHECK_THROWS_AS(read_conllu(in, "m"), MalformedConllu);
    }
  }

  TEST_CASE("round trip preserves tokens, heads and labels") {
    for (const auto& file : {"ud_examples.conllu", "reference_examples.conllu", "labelled.conllu"}) {
      auto a = read_conllu_file(fixture(file), Scheme::legacy_clear);
      std::ostringstream out;
      write_conllu(out, a);
      std::istringstream in(out.str());
      auto b = read_conllu(in, "again", Scheme::legacy_clear);
      REQUIRE(a.size() == b.size());
      for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].text() == b[i].text());
        CHECK(a[i].scheme() == b[i].scheme());
        REQUIRE(a[i].size() == b[i].size());
        for (int t = 1; t <= static_cast<int>(a[i].size()); ++t) {
          CHECK(a[i].token(t).head == b[i].token(t).head);
          CHECK(a[i].token(t).deprel == b[i].token(t).deprel);
          CHECK(a[i].token(t).start_char == b[i].token(t).start_char);
        }
      }
    }
  }

  TEST_CASE("scheme comment overrides the default") {
    auto v = read_conllu_file(fixture("reference_examples.conllu"), Scheme::ud_v2);
    CHECK(v[0].scheme() == Scheme::legacy_clear);
    CHECK(v[9].token(7).deprel.kind == Kind::prep_obj);  // pobj "operators"
    CHECK(v[9].token(5).deprel.kind == Kind::agent);
  }

  TEST_CASE("map_label") {
    CHECK(map_label("nsubjpass", Scheme::legacy_clear).kind == Kind::passive_subj);
    CHECK(map_label("auxpass", Scheme::legacy_clear).kind == Kind::passive_aux);
    CHECK(map_label("agent", Scheme::legacy_clear).kind == Kind::agent);
    CHECK(map_label("pobj", Scheme::legacy_clear).kind == Kind::prep_obj);
    CHECK(map_label("obl:agent", Scheme::ud_v2).kind == Kind::agent);
    CHECK(map_label("aux:pass", Scheme::ud_v2).kind == Kind::passive_aux);
    CHECK(map_label("nsubj:pass", Scheme::ud_v2).kind == Kind::passive_subj);
    CHECK(map_label("flat:name", Scheme::ud_v2).kind == Kind::compound);
    auto w = map_label("weird:rel", Scheme::ud_v2);
    CHECK(w.kind == Kind::other);
    CHECK(w.raw == "weird:rel");
    CHECK(map_label("", Scheme::legacy_clear).kind == Kind::other);
    CHECK(scheme_from_string("legacy-clear") == Scheme::legacy_clear);
    CHECK_THROWS(scheme_from_string("penn"));
    CHECK(upos_from_string("SPACE") == Upos::X);
  }

  TEST_CASE("load_lexicon") {
    testsupport::TempDir d;
    auto l = load_lexicon(d.write("l.txt", "citizen\nMember  State\noperator\n"));
    CHECK(l.entries == 3);
    CHECK(l.lexicon.contains("member state"));
    auto dup = load_lexicon(d.write("d.txt", "# c\ncitizen\n citizen \nCitizen\n"));
    CHECK(dup.entries == 1);
    auto empty = load_lexicon(d.write("e.txt", "# nothing\n"));
    CHECK(empty.entries == 0);
    CHECK_FALSE(empty.warnings.empty());
    CHECK_THROWS_AS(load_lexicon(d.file("absent.txt")), IoError);
  }

  TEST_CASE("shipped lexicon snapshot") {
    const auto& lex = testsupport::shipped_lexicon();
    CHECK(lex.size() > 1000);
    for (auto w : {"citizen", "worker", "operator", "manufacturer", "importer", "applicant", "authority"})
      CHECK_MESSAGE(lex.contains(w), w);
    for (auto w : {"decision", "regulation", "exchange", "directive"}) CHECK_FALSE_MESSAGE(lex.contains(w), w);
  }

  TEST_CASE("is_agent_noun") {
    auto pe = read_conllu_file(fixture("reference_examples.conllu"));
    const auto& lex = testsupport::shipped_lexicon();
    CHECK(is_agent_noun(1, pe[1], lex).is_agent);          // Citizens
    CHECK(is_agent_noun(1, pe[1], lex).matched == "citizen");
    CHECK_FALSE(is_agent_noun(1, pe[4], lex).is_agent);    // It
    CHECK_FALSE(is_agent_noun(3, pe[8], lex).is_agent);    // exchange
    CHECK_FALSE(is_agent_noun(2, pe[6], lex).is_agent);    // ISSB, hand-tagged NOUN
    CHECK(is_agent_noun(15, pe[8], lex).is_agent);         // NEAFC, PROPN
    CHECK_FALSE(is_agent_noun(3, pe[1], lex).is_agent);    // separate: not a nominal

    auto ud = read_conllu_file(fixture("ud_examples.conllu"));
    AgentLexicon phrase_only({"member state"});
    auto r = is_agent_noun(3, ud[3], phrase_only);
    CHECK(r.is_agent);
    CHECK(r.matched == "member state");
    CHECK_FALSE(is_agent_noun(3, ud[3], AgentLexicon({"member"})).is_agent);
  }

  TEST_CASE("agenthood only grows with the lexicon") {
    auto all = read_conllu_file(fixture("labelled.conllu"));
    AgentLexicon small({"citizen", "operator"});
    const auto& big = testsupport::shipped_lexicon();
    for (const auto& s : all)
      for (const auto& t : s.tokens())
        if (is_nominal(t.upos) && is_agent_noun(t.index, s, small).is_agent) CHECK(is_agent_noun(t.index, s, big).is_agent);
  }
}
