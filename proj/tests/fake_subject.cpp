// Misbehaving line-protocol subjects for exercising the external runner.
//
//   fake_subject true              answers true to every request
//   fake_subject reverse N         reads N requests, answers them in reverse
//   fake_subject die-after N       answers N requests, then exits
//   fake_subject hang              reads requests, never answers
//   fake_subject garbage           replies with a non-JSON line
//   fake_subject unknown           replies with an id that was never sent
//   fake_subject duplicate         answers every request twice
//   fake_subject huge              writes a line longer than the protocol limit
#include <cstdlib>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include "quantiscene/json_fwd.hpp"

namespace {

void answer(const std::string& id, bool value) {
  quantiscene::Json j;
  j["id"] = id;
  j["answer"] = value;
  std::cout << j.dump() << std::endl;
}

std::string request_id(const std::string& line) {
  return quantiscene::Json::parse(line).at("id").get<std::string>();
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: fake_subject MODE [N]\n";
    return 2;
  }
  const std::string mode = argv[1];
  const long n = argc > 2 ? std::atol(argv[2]) : 0;
  std::string line;
  std::vector<std::string> held;
  long answered = 0;
  while (std::getline(std::cin, line)) {
    const std::string id = request_id(line);
    if (mode == "true") {
      answer(id, true);
    } else if (mode == "reverse") {
      held.push_back(id);
      if (static_cast<long>(held.size()) == n) {
        for (auto it = held.rbegin(); it != held.rend(); ++it) answer(*it, true);
        held.clear();
      }
    } else if (mode == "die-after") {
      if (answered == n) return 1;
      answer(id, true);
      ++answered;
    } else if (mode == "hang") {
      std::this_thread::sleep_for(std::chrono::hours(1));
    } else if (mode == "garbage") {
      std::cout << "this is not json" << std::endl;
    } else if (mode == "unknown") {
      answer("no-such-id", true);
    } else if (mode == "duplicate") {
      answer(id, true);
      answer(id, true);
    } else if (mode == "huge") {
      std::cout << std::string(2u << 20, 'x') << std::flush;
      std::this_thread::sleep_for(std::chrono::seconds(5));
      return 0;
    } else {
      std::cerr << "unknown mode " << mode << '\n';
      return 2;
    }
  }
  return 0;
}
