#include <doctest.h>
#include <httplib.h>

#include <atomic>
#include <json.hpp>
#include <regex>
#include <thread>

#include "lexrule/metadata_client.hpp"

using namespace lexrule;
using namespace lexrule::corpus;

namespace {

nlohmann::json binding(const std::string& celex, const std::string& date, const std::string& dir) {
  nlohmann::json b{{"celex", {{"type", "literal"}, {"value", celex}}}};
  if (!date.empty()) b["date"] = {{"type", "literal"}, {"value", date}};
  if (!dir.empty()) b["dir"] = {{"type", "uri"}, {"value", "http://publications.europa.eu/resource/authority/fd_555/" + dir}};
  return b;
}

// Local stand-in for the SPARQL endpoint. Knows a fixed set of works and
// answers only for the ids named in the query's FILTER clause.
class FakeEndpoint {
 public:
  FakeEndpoint() {
    server_.Post("/sparql", [this](const httplib::Request& req, httplib::Response& res) {
      ++requests_;
      accept_ = req.get_header_value("Accept");
      if (mode_ == "error") {
        res.status = 500;
        return;
      }
      if (mode_ == "garbage") {
        res.set_content("<html>oops</html>", "text/html");
        return;
      }
      std::string q = req.get_param_value("query");
      nlohmann::json bindings = nlohmann::json::array();
      std::regex id_re("\"([0-9A-Z()_]+)\"");
      std::vector<std::string> asked;
      for (std::sregex_iterator it(q.begin(), q.end(), id_re), end; it != end; ++it) asked.push_back((*it)[1]);
      batch_sizes_.push_back(asked.size());
      // Reverse order on purpose: results must come back in request order anyway.
      for (auto it = asked.rbegin(); it != asked.rend(); ++it) {
        const auto& id = *it;
        if (id == "32020R0723") {
          bindings.push_back(binding(id, "2020-05-29", "03.05.20.00"));
          bindings.push_back(binding(id, "2020-06-02", "02.10.30.00"));
        } else if (id == "32019L0904") {
          bindings.push_back(binding(id, "2019-06-05", "15.10.30.30"));
        } else if (id == "32018D0001") {
          bindings.push_back(binding(id, "2018-01-03", ""));
        } else if (id.rfind("3201", 0) == 0) {
          bindings.push_back(binding(id, "2015-01-01", "11.20.00.00"));
        }
      }
      res.set_content(nlohmann::json{{"head", {{"vars", {"celex", "date", "dir"}}}}, {"results", {{"bindings", bindings}}}}.dump(),
                      "application/sparql-results+json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeEndpoint() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/sparql"; }

  std::string mode_;
  std::atomic<int> requests_{0};
  std::vector<std::size_t> batch_sizes_;
  std::string accept_;

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

}  // namespace

TEST_SUITE("metadata") {
  TEST_CASE("query names every id and rejects injection") {
    std::vector<std::string> ids{"32020R0723", "32019L0904"};
    auto q = build_metadata_query(ids);
    CHECK(q.find("\"32020R0723\", \"32019L0904\"") != std::string::npos);
    CHECK(q.find("SELECT") != std::string::npos);
    std::vector<std::string> bad{"3\"}) DROP"};
    CHECK_THROWS_AS(build_metadata_query(bad), Error);
  }

  TEST_CASE("response parsing picks the earliest date and lowest directory code") {
    nlohmann::json body{{"results",
                         {{"bindings",
                           {binding("32020R0723", "2020-06-02", "03.05.20.00"),
                            binding("32020R0723", "2020-05-29", "02.10.30.00")}}}}};
    std::vector<std::string> ids{"32020R0723", "32099R9999"};
    auto r = parse_metadata_response(body.dump(), ids);
    REQUIRE(r.records.size() == 1);
    CHECK(r.records[0].adoption_year == 2020);
    CHECK(r.records[0].policy_area == "02");
    CHECK(r.records[0].legal_form == LegalForm::regulation);
    REQUIRE(r.unresolved.size() == 1);
    CHECK(r.unresolved[0].celex_id == "32099R9999");
    CHECK_THROWS_AS(parse_metadata_response("not json", ids), MalformedResponse);
    CHECK_THROWS_AS(parse_metadata_response("{\"results\":{}}", ids), MalformedResponse);
  }

  TEST_CASE("fetch against a local endpoint") {
    FakeEndpoint ep;
    MetadataClientConfig cfg;
    cfg.endpoint = ep.url();
    cfg.min_interval = std::chrono::milliseconds(40);

    SUBCASE("known id resolves to a regulation; order and unresolved ids are kept") {
      std::vector<std::string> ids{"32020R0723", "32099R0001", "32019L0904", "32018D0001"};
      auto r = fetch_metadata(ids, cfg);
      REQUIRE(r.records.size() == 2);
      CHECK(r.records[0].celex_id == "32020R0723");
      CHECK(r.records[0].legal_form == LegalForm::regulation);
      CHECK(r.records[0].policy_area == "02");
      CHECK(r.records[1].celex_id == "32019L0904");
      CHECK(r.records[1].policy_area == "15");
      REQUIRE(r.unresolved.size() == 2);
      CHECK(r.unresolved[0].celex_id == "32099R0001");
      CHECK(r.unresolved[1].celex_id == "32018D0001");
      CHECK(r.unresolved[1].reason == "no directory code");
      CHECK(ep.accept_ == "application/sparql-results+json");
    }
    SUBCASE("empty list makes no request") {
      CHECK(fetch_metadata({}, cfg).records.empty());
      CHECK(ep.requests_ == 0);
    }
    SUBCASE("batches are bounded and rate limited") {
      std::vector<std::string> ids;
      for (int i = 0; i < 7; ++i) ids.push_back("3201" + std::to_string(i) + "R000" + std::to_string(i));
      cfg.ids_per_request = 3;
      auto t0 = std::chrono::steady_clock::now();
      auto r = fetch_metadata(ids, cfg);
      auto elapsed = std::chrono::steady_clock::now() - t0;
      CHECK(ep.batch_sizes_ == std::vector<std::size_t>{3, 3, 1});
      CHECK(elapsed >= std::chrono::milliseconds(80));
      REQUIRE(r.records.size() == 7);
      for (std::size_t i = 0; i < ids.size(); ++i) CHECK(r.records[i].celex_id == ids[i]);
    }
    SUBCASE("server errors and garbage") {
      std::vector<std::string> ids{"32020R0723"};
      ep.mode_ = "error";
      CHECK_THROWS_AS(fetch_metadata(ids, cfg), NetworkError);
      ep.mode_ = "garbage";
      CHECK_THROWS_AS(fetch_metadata(ids, cfg), MalformedResponse);
    }
  }

  TEST_CASE("unreachable endpoint is a network error") {
    int port;
    {
      httplib::Server s;
      port = s.bind_to_any_port("127.0.0.1");
    }
    MetadataClientConfig cfg;
    cfg.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/sparql";
    cfg.timeout = std::chrono::seconds(2);
    std::vector<std::string> ids{"32020R0723"};
    CHECK_THROWS_AS(fetch_metadata(ids, cfg), NetworkError);
    cfg.endpoint = "not a url";
    CHECK_THROWS_AS(fetch_metadata(ids, cfg), NetworkError);
  }
}
