#include "lexrule/metadata_client.hpp"

#include <httplib.h>

#include <algorithm>
#include <map>
#include <json.hpp>
#include <thread>

namespace lexrule::corpus {

namespace {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Endpoint split_url(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw NetworkError("endpoint is not a URL: " + url);
  auto path_begin = url.find('/', scheme_end + 3);
  if (path_begin == std::string::npos) return {url, "/"};
  return {url.substr(0, path_begin), url.substr(path_begin)};
}

bool valid_celex_char(char c) {
  return (c >= '0' && c <= '9') || (c >= 'A' && c <= 'Z') || c == '(' || c == ')' || c == '_';
}

struct Partial {
  std::string date;
  std::string dir;  // lowest directory code seen
};

}  // namespace

std::string build_metadata_query(std::span<const std::string> celex_ids) {
  std::string q =
      "PREFIX cdm: <http://publications.europa.eu/ontology/cdm#>\n"
      "SELECT DISTINCT ?celex ?date ?dir WHERE {\n"
      "  ?work cdm:resource_legal_id_celex ?celex .\n"
      "  OPTIONAL { ?work cdm:work_date_document ?date . }\n"
      "  OPTIONAL { ?work cdm:resource_legal_is_about_concept_directory-code ?dir . }\n"
      "  FILTER(str(?celex) IN (";
  for (std::size_t i = 0; i < celex_ids.size(); ++i) {
    const auto& id = celex_ids[i];
    if (id.empty() || !std::all_of(id.begin(), id.end(), valid_celex_char))
      throw Error("invalid CELEX id '" + id + "'");
    if (i) q += ", ";
    q += "\"" + id + "\"";
  }
  q += "))\n}\n";
  return q;
}

MetadataFetchResult parse_metadata_response(std::string_view body,
                                            std::span<const std::string> celex_ids) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    throw MalformedResponse(std::string("response is not JSON: ") + e.what());
  }
  if (!doc.contains("results") || !doc["results"].contains("bindings") ||
      !doc["results"]["bindings"].is_array())
    throw MalformedResponse("response lacks results.bindings");

  std::map<std::string, Partial> found;
  for (const auto& b : doc["results"]["bindings"]) {
    auto value = [&](const char* var) -> std::string {
      if (!b.contains(var)) return {};
      const auto& v = b[var];
      if (!v.is_object() || !v.contains("value") || !v["value"].is_string())
        throw MalformedResponse(std::string("binding for ?") + var + " has no string value");
      return v["value"].get<std::string>();
    };
    std::string celex = value("celex");
    if (celex.empty()) throw MalformedResponse("binding without ?celex");
    auto& p = found[celex];
    if (auto date = value("date"); !date.empty() && (p.date.empty() || date < p.date)) p.date = date;
    if (auto dir = value("dir"); !dir.empty()) {
      auto code = dir.substr(dir.find_last_of('/') + 1);
      if (p.dir.empty() || code < p.dir) p.dir = code;
    }
  }

  MetadataFetchResult out;
  for (const auto& id : celex_ids) {
    auto it = found.find(id);
    if (it == found.end()) {
      out.unresolved.push_back({id, "not found"});
      continue;
    }
    const auto& p = it->second;
    if (p.date.size() < 4) {
      out.unresolved.push_back({id, "no adoption date"});
      continue;
    }
    if (p.dir.size() < 2) {
      out.unresolved.push_back({id, "no directory code"});
      continue;
    }
    DocumentMetadata m;
    m.celex_id = id;
    try {
      m.adoption_year = std::stoi(p.date.substr(0, 4));
    } catch (const std::logic_error&) {
      throw MalformedResponse("bad date '" + p.date + "' for " + id);
    }
    m.policy_area = p.dir.substr(0, 2);
    m.legal_form = legal_form_from_celex(id);
    try {
      validate(m);
    } catch (const Error& e) {
      out.unresolved.push_back({id, e.what()});
      continue;
    }
    out.records.push_back(std::move(m));
  }
  return out;
}

MetadataFetchResult fetch_metadata(std::span<const std::string> celex_ids,
                                   const MetadataClientConfig& cfg) {
  MetadataFetchResult all;
  if (celex_ids.empty()) return all;

  auto [origin, path] = split_url(cfg.endpoint);
  httplib::Client client(origin);
  client.set_connection_timeout(cfg.timeout);
  client.set_read_timeout(cfg.timeout);
  client.set_follow_location(true);

  const std::size_t step = std::max<std::size_t>(1, cfg.ids_per_request);
  auto last_request = std::chrono::steady_clock::time_point{};
  for (std::size_t begin = 0; begin < celex_ids.size(); begin += step) {
    auto batch = celex_ids.subspan(begin, std::min(step, celex_ids.size() - begin));
    if (begin > 0) std::this_thread::sleep_until(last_request + cfg.min_interval);
    last_request = std::chrono::steady_clock::now();

    httplib::Params form{{"query", build_metadata_query(batch)}};
    httplib::Headers headers{{"Accept", "application/sparql-results+json"}};
    auto res = client.Post(path, headers, form);
    if (!res) throw NetworkError(cfg.endpoint + ": " + httplib::to_string(res.error()));
    if (res->status != 200)
      throw NetworkError(cfg.endpoint + ": HTTP " + std::to_string(res->status));

    auto part = parse_metadata_response(res->body, batch);
    std::move(part.records.begin(), part.records.end(), std::back_inserter(all.records));
    std::move(part.unresolved.begin(), part.unresolved.end(), std::back_inserter(all.unresolved));
  }
  return all;
}

}  // namespace lexrule::corpus
