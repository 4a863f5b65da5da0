#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "lexrule/parse.hpp"
#include "lexrule/text.hpp"

namespace testsupport {

inline std::string fixture(const std::string& name) { return std::string(LEXRULE_FIXTURE_DIR) + "/" + name; }
inline std::string data(const std::string& name) { return std::string(LEXRULE_TEST_DATA_DIR) + "/" + name; }

inline const lexrule::parse::AgentLexicon& shipped_lexicon() {
  static const auto lex = lexrule::parse::load_lexicon(data("agents.txt")).lexicon;
  return lex;
}

inline lexrule::parse::ParsedSentence parse_one(const std::string& conllu) {
  std::istringstream in(conllu);
  auto v = lexrule::parse::read_conllu(in, "inline");
  if (v.size() != 1) throw std::runtime_error("expected one sentence");
  return v.front();
}

/// Fresh directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::mt19937_64 gen{std::random_device{}()};
    path_ = std::filesystem::temp_directory_path() / ("lexrule-test-" + std::to_string(gen()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::string file(const std::string& name) const { return (path_ / name).string(); }
  std::string write(const std::string& name, const std::string& content) const {
    std::ofstream(path_ / name, std::ios::binary) << content;
    return file(name);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace testsupport

#include <map>
#include <vector>

#include "lexrule/corpus.hpp"

namespace testsupport {

struct SyntheticCorpus {
  std::vector<lexrule::corpus::CandidateSentence> candidates;
  std::map<std::string, lexrule::corpus::StratumKey> metadata;
};

/// 52 years x 20 policy areas, one document per stratum. Strata hold
/// 7..15 candidates except `undersized` of them, which hold 1..6.
inline SyntheticCorpus synthetic_corpus(std::size_t undersized, std::uint64_t layout_seed = 1) {
  SyntheticCorpus c;
  std::mt19937_64 gen(layout_seed);
  std::vector<std::size_t> small_slots;
  for (std::size_t i = 0; i < undersized; ++i) small_slots.push_back((i * 173 + 11) % 1040);
  std::size_t slot = 0;
  for (int year = 1971; year < 1971 + 52; ++year) {
    for (int area = 1; area <= 20; ++area, ++slot) {
      char code[3];
      std::snprintf(code, sizeof code, "%02d", area);
      std::string doc = "3" + std::to_string(year) + "R" + std::to_string(1000 + area);
      c.metadata[doc] = {year, code};
      bool small = std::find(small_slots.begin(), small_slots.end(), slot) != small_slots.end();
      std::size_t n = small ? 1 + gen() % 6 : 7 + gen() % 9;
      for (std::size_t i = 0; i < n; ++i)
        c.candidates.push_back({doc, i, doc + " sentence " + std::to_string(i) + " shall apply.", {"shall"}});
    }
  }
  return c;
}

}  // namespace testsupport
