// Test double for the prediction subprocess protocol.
//
//   stub_fallback const P           answer P to every request
//   stub_fallback keyword W PY PN   PY if the text contains W, else PN
//   stub_fallback reverse N P       buffer N requests, answer them in reverse
//   stub_fallback malformed         answer with a non-JSON line
//   stub_fallback stray P           print a banner line before answering
//   stub_fallback hang              read requests, never answer
//   stub_fallback exit              exit after the first request
//   stub_fallback wrong-id P        answer with an id nobody asked for
//   stub_fallback log FILE P        like const, appending "quit" to FILE on shutdown

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

using nlohmann::json;

namespace {

void reply(long long id, double p) {
  std::cout << json{{"id", id}, {"p_regulatory", p}}.dump() << "\n" << std::flush;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> a(argv + 1, argv + argc);
  if (a.empty()) return 2;
  const std::string mode = a[0];
  std::vector<std::pair<long long, double>> held;
  bool bannered = false;
  std::string line;
  while (std::getline(std::cin, line)) {
    auto msg = json::parse(line);
    if (msg.contains("cmd")) {
      if (mode == "log") std::ofstream(a[1], std::ios::app) << "quit\n";
      return 0;
    }
    long long id = msg["id"].get<long long>();
    std::string text = msg["text"].get<std::string>();
    if (mode == "const") {
      reply(id, std::stod(a[1]));
    } else if (mode == "log") {
      reply(id, std::stod(a[2]));
    } else if (mode == "keyword") {
      reply(id, text.find(a[1]) != std::string::npos ? std::stod(a[2]) : std::stod(a[3]));
    } else if (mode == "reverse") {
      held.emplace_back(id, std::stod(a[2]) + 0.01 * static_cast<double>(held.size()));
      if (held.size() == std::stoul(a[1])) {
        for (auto it = held.rbegin(); it != held.rend(); ++it) reply(it->first, it->second);
        held.clear();
      }
    } else if (mode == "malformed") {
      std::cout << "this is not json\n" << std::flush;
    } else if (mode == "stray") {
      if (!bannered) std::cout << "model loaded\n";
      bannered = true;
      reply(id, std::stod(a[1]));
    } else if (mode == "hang") {
      std::this_thread::sleep_for(std::chrono::hours(1));
    } else if (mode == "exit") {
      return 3;
    } else if (mode == "wrong-id") {
      reply(id + 1000, std::stod(a[1]));
    } else {
      return 2;
    }
  }
  return 0;
}
