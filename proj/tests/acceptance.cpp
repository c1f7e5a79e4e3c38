// Prints one PASS/FAIL line per acceptance criterion; exits nonzero on any FAIL.
#include <algorithm>
#include <cstdio>
#include <iostream>
#include <map>
#include <string>
#include <thread>

#include "verify.hpp"

using miqp::tools::CheckResult;

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  const bool quick = argc > 1 && std::string(argv[1]) == "quick";
  const int threads = static_cast<int>(std::clamp(std::thread::hardware_concurrency(), 1u, 4u));
  const auto checks = miqp::tools::run_verification(
      quick ? miqp::tools::VerifyLevel::Quick : miqp::tools::VerifyLevel::Full, &std::cerr,
      threads);

  std::map<int, std::vector<const CheckResult*>> by_criterion;
  for (const CheckResult& c : checks) by_criterion[c.criterion].push_back(&c);

  bool all = true;
  for (int id = 1; id <= 9; ++id) {
    const auto it = by_criterion.find(id);
    if (it == by_criterion.end()) {
      std::printf("criterion %d: FAIL (no check ran)\n", id);
      all = false;
      continue;
    }
    bool passed = true;
    std::string summary;
    for (const CheckResult* c : it->second) {
      passed = passed && c->passed;
      if (!summary.empty()) summary += "; ";
      summary += c->name + " worst=" + num(c->worst) +
                 (c->at_least ? " min=" : " limit=") + num(c->limit);
    }
    all = all && passed;
    std::printf("criterion %d: %s %s\n", id, passed ? "PASS" : "FAIL", summary.c_str());
  }
  if (const auto it = by_criterion.find(0); it != by_criterion.end()) {
    for (const CheckResult* c : it->second) {
      std::printf("extra: %s\n", miqp::tools::format_check(*c).c_str());
      all = all && c->passed;
    }
  }
  std::fflush(stdout);
  return all ? 0 : 1;
}
