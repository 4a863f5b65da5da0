#pragma once

#include <chrono>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lexrule/corpus.hpp"

namespace lexrule::corpus {

class NetworkError : public Error {
 public:
  using Error::Error;
};
class MalformedResponse : public Error {
 public:
  using Error::Error;
};

struct MetadataClientConfig {
  /// SPARQL endpoint, e.g. https://publications.europa.eu/webapi/rdf/sparql
  std::string endpoint = "https://publications.europa.eu/webapi/rdf/sparql";
  std::size_t ids_per_request = 50;
  /// Minimum spacing between consecutive requests.
  std::chrono::milliseconds min_interval{1000};
  std::chrono::seconds timeout{30};
};

struct UnresolvedId {
  std::string celex_id;
  std::string reason;
};

struct MetadataFetchResult {
  std::vector<DocumentMetadata> records;  // request order
  std::vector<UnresolvedId> unresolved;   // request order
};

/// SPARQL SELECT returning ?celex ?date ?dir for the given CELEX ids.
std::string build_metadata_query(std::span<const std::string> celex_ids);

/// Interprets an application/sparql-results+json body. Policy area is the
/// first two digits of the lowest directory code; legal form comes from the
/// CELEX type letter. Ids absent from the bindings, or lacking a date or a
/// directory code, are reported unresolved.
MetadataFetchResult parse_metadata_response(std::string_view body,
                                            std::span<const std::string> celex_ids);

/// Queries the endpoint in batches of `ids_per_request`, sequentially and
/// rate limited. Throws NetworkError or MalformedResponse.
MetadataFetchResult fetch_metadata(std::span<const std::string> celex_ids,
                                   const MetadataClientConfig& cfg = {});

}  // namespace lexrule::corpus
