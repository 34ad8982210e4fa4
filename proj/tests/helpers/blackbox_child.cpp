// Child-process black box for exercising the line-delimited JSON protocol.
// Modes (argv[1]): sphere (default), malformed, die, slow, wrong-count.
// argv[2] (optional): number of constraint values for sphere mode.

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <string>
#include <thread>

#include <nlohmann/json.hpp>

int main(int argc, char** argv) {
  const std::string mode = argc > 1 ? argv[1] : "sphere";
  const int n_constraints = argc > 2 ? std::atoi(argv[2]) : 0;

  if (mode == "die") return 3;

  std::string line;
  while (std::getline(std::cin, line)) {
    if (mode == "malformed") {
      std::cout << "this is not json\n" << std::flush;
      continue;
    }
    if (mode == "slow") {
      std::this_thread::sleep_for(std::chrono::seconds(5));
    }

    nlohmann::json req = nlohmann::json::parse(line);
    const auto x = req.at("point").at("x").get<std::vector<double>>();
    const auto z = req.at("point").at("z").get<std::vector<long long>>();
    const auto c = req.at("point").at("c").get<std::vector<int>>();

    double f = 0.0;
    for (double v : x) f += v * v;
    for (long long v : z) f += static_cast<double>(v * v);
    for (int v : c) f += v;

    nlohmann::json resp;
    resp["f"] = f;
    resp["g"] = nlohmann::json::array();
    const int ng = mode == "wrong-count" ? n_constraints + 1 : n_constraints;
    for (int i = 0; i < ng; ++i) {
      resp["g"].push_back(x.empty() ? -1.0 : x[0] - 0.5);
    }
    std::cout << resp.dump() << "\n" << std::flush;
  }
  return 0;
}
