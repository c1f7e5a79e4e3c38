#include "miqp/tolerances.hpp"

#include <charconv>
#include <cstdlib>
#include <mutex>
#include <string>

#include "miqp/error.hpp"

namespace miqp {
namespace {

double parse_number(std::string_view text) {
  double value = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || !(value > 0.0)) {
    throw Error(ErrorCode::InvalidArgument,
                "tolerance must be a positive number, got '" + std::string(text) + "'");
  }
  return value;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

std::mutex& tol_mutex() {
  static std::mutex m;
  return m;
}

Tolerances& tol_storage() {
  static Tolerances tol = [] {
    Tolerances t;
    if (const char* env = std::getenv("MIQP_OA_TOL"); env != nullptr && *env != '\0') {
      t = parse_tolerances(env, t);
    }
    return t;
  }();
  return tol;
}

}  // namespace

Tolerances parse_tolerances(std::string_view spec, Tolerances base) {
  spec = trim(spec);
  if (spec.find('=') == std::string_view::npos) {
    base.factorization = parse_number(spec);
    return base;
  }
  while (!spec.empty()) {
    const auto comma = spec.find(',');
    auto item = trim(spec.substr(0, comma));
    spec = comma == std::string_view::npos ? std::string_view{} : spec.substr(comma + 1);
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::InvalidArgument, "expected key=value in '" + std::string(item) + "'");
    }
    const auto key = trim(item.substr(0, eq));
    const double value = parse_number(trim(item.substr(eq + 1)));
    if (key == "factorization") base.factorization = value;
    else if (key == "psd") base.psd_slack = value;
    else if (key == "support") base.support = value;
    else if (key == "kkt") base.kkt = value;
    else if (key == "integrality") base.integrality = value;
    else if (key == "cut") base.cut_violation = value;
    else throw Error(ErrorCode::InvalidArgument, "unknown tolerance key '" + std::string(key) + "'");
  }
  return base;
}

const Tolerances& tolerances() {
  std::lock_guard lock(tol_mutex());
  return tol_storage();
}

void set_tolerances(const Tolerances& tol) {
  std::lock_guard lock(tol_mutex());
  tol_storage() = tol;
}

}  // namespace miqp
