#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "lexrule/error.hpp"

namespace lexrule::corpus {

enum class LegalForm { regulation, directive, decision, other };

std::string_view to_string(LegalForm f);
LegalForm legal_form_from_string(std::string_view s);
/// Form implied by the CELEX type letter (sector 3: R, L, D).
LegalForm legal_form_from_celex(std::string_view celex_id);

struct DocumentMetadata {
  std::string celex_id;
  int adoption_year = 0;
  std::string policy_area;
  LegalForm legal_form = LegalForm::other;
};

struct LegalDocument {
  DocumentMetadata meta;
  std::string full_text;
};

struct CandidateSentence {
  std::string doc_id;
  std::size_t index_in_doc = 0;
  std::string text;
  std::vector<std::string> deontic_tokens;  // "shall" / "must", in order of occurrence
};

struct Stratum {
  int year = 0;
  std::string policy_area;
  std::vector<CandidateSentence> sentences;
};

class NoStartMarker : public Error {
 public:
  NoStartMarker() : Error("no start marker found") {}
};
class NoEndMarker : public Error {
 public:
  NoEndMarker() : Error("no end marker found after the start marker") {}
};

struct MarkerDictionary {
  std::vector<std::string> start;
  std::vector<std::string> end;

  static MarkerDictionary load(const std::string& start_path, const std::string& end_path);
};

/// Text strictly between the end of the earliest start phrase and the
/// earliest end phrase after it, trimmed of whitespace and a leading ':'.
std::string extract_regulatory_section(std::string_view full_text,
                                       const MarkerDictionary& markers);

struct SegmenterConfig {
  std::vector<std::string> abbreviations;
  bool split_on_semicolon = true;

  static SegmenterConfig load(const std::string& abbreviations_path);
};

/// Rule-based sentence splitter. Boundaries fall after '.', '?', '!' or ';'
/// followed by whitespace, except after a listed abbreviation or a numbered
/// list marker ("1.", "(a).") opening the current sentence or a line.
std::vector<std::string> segment_sentences(std::string_view section_text,
                                           const SegmenterConfig& cfg);

/// Whole-word, case-insensitive occurrences of "shall"/"must", lower-cased.
std::vector<std::string> deontic_tokens(std::string_view sentence);

/// Keeps sentences containing at least one deontic token. `index_in_doc`
/// is the position in `sentences`.
std::vector<CandidateSentence> filter_deontic(const std::vector<std::string>& sentences,
                                              const std::string& doc_id = {});

struct StratumKey {
  int year;
  std::string policy_area;
  auto operator<=>(const StratumKey&) const = default;
};

struct SampleResult {
  std::vector<CandidateSentence> sentences;
  std::vector<Stratum> strata;            // the sampled strata, sorted
  std::vector<StratumKey> excluded;       // strata below per_stratum
  std::size_t missing_metadata = 0;       // candidates whose doc had no metadata
};

/// Equal-allocation stratified sample without replacement.
SampleResult stratify_sample(const std::vector<CandidateSentence>& candidates,
                             const std::map<std::string, StratumKey>& metadata,
                             std::size_t per_stratum, std::uint64_t seed);

// --- file formats ---------------------------------------------------------

/// Metadata CSV: celex_id,adoption_year,policy_area,legal_form.
std::vector<DocumentMetadata> read_metadata_csv(const std::string& path);
void write_metadata_csv(std::ostream& out, const std::vector<DocumentMetadata>& rows);

/// Loads `<dir>/<celex_id>.txt` for every metadata row.
std::vector<LegalDocument> load_documents(const std::string& dir,
                                          const std::vector<DocumentMetadata>& meta);

/// Candidate CSV: doc_id,index_in_doc,text.
std::vector<CandidateSentence> read_candidates_csv(const std::string& path);
void write_candidates_csv(std::ostream& out, const std::vector<CandidateSentence>& rows);

void validate(const DocumentMetadata& m);

}  // namespace lexrule::corpus
