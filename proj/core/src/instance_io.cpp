#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "miqp/error.hpp"
#include "miqp/instance.hpp"

namespace miqp {

namespace {

std::string fmt_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_vector(std::ostream& os, const Vector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? " " : "") << fmt_double(v(i));
  os << '\n';
}

void write_triplets(std::ostream& os, const SparseMatrix& m) {
  for (int r = 0; r < m.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(m, r); it; ++it) {
      os << it.row() << ' ' << it.col() << ' ' << fmt_double(it.value()) << '\n';
    }
  }
}

struct Line {
  int number;
  std::vector<std::string> tokens;
  std::string rest;  // text after the first token, for free-form metadata values
};

[[noreturn]] void parse_fail(int line, const std::string& what) {
  std::ostringstream os;
  os << "line " << line << ": " << what;
  throw Error(ErrorCode::ParseError, os.str());
}

double parse_double(const std::string& tok, int line, const char* field) {
  double v = 0.0;
  const char* first = tok.data();
  const char* last = first + tok.size();
  if (!tok.empty() && *first == '+') ++first;
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last || !std::isfinite(v)) {
    parse_fail(line, std::string("invalid number '") + tok + "' in " + field);
  }
  return v;
}

long parse_int(const std::string& tok, int line, const char* field) {
  long v = 0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
    parse_fail(line, std::string("invalid integer '") + tok + "' in " + field);
  }
  return v;
}

std::vector<double> collect_numbers(const std::vector<Line>& lines, const char* field) {
  std::vector<double> out;
  for (const auto& l : lines) {
    for (const auto& t : l.tokens) out.push_back(parse_double(t, l.number, field));
  }
  return out;
}

Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

SparseMatrix parse_triplets(const std::vector<Line>& lines, int rows, int cols,
                            const char* field) {
  std::vector<Eigen::Triplet<double>> trip;
  for (const auto& l : lines) {
    if (l.tokens.size() != 3) parse_fail(l.number, std::string(field) + " expects 'row col value'");
    const long r = parse_int(l.tokens[0], l.number, field);
    const long c = parse_int(l.tokens[1], l.number, field);
    if (r < 0 || r >= rows || c < 0 || c >= cols) {
      std::ostringstream os;
      os << field << " index (" << r << ", " << c << ") outside " << rows << " x " << cols;
      throw Error(ErrorCode::DimensionMismatch, "line " + std::to_string(l.number) + ": " + os.str());
    }
    trip.emplace_back(static_cast<int>(r), static_cast<int>(c),
                      parse_double(l.tokens[2], l.number, field));
  }
  SparseMatrix m(rows, cols);
  m.setFromTriplets(trip.begin(), trip.end());
  m.makeCompressed();
  return m;
}

}  // namespace

std::string format_instance(const MiqpInstance& inst) {
  std::ostringstream os;
  os << "# miqp instance\n[dimensions]\n";
  os << "n " << inst.n << "\nm1 " << inst.m1() << "\nm2 " << inst.m2() << '\n';
  if (inst.k) os << "[k]\n" << *inst.k << '\n';
  os << "[metadata]\n";
  if (!inst.name.empty()) os << "name " << inst.name << '\n';
  if (inst.seed) os << "seed " << *inst.seed << '\n';
  if (!inst.generator.empty()) os << "generator " << inst.generator << '\n';
  os << "[Q]\n";
  for (int i = 0; i < inst.n; ++i) write_vector(os, inst.Q.row(i).transpose());
  os << "[g]\n";
  write_vector(os, inst.g);
  os << "[h]\n";
  write_vector(os, inst.h);
  os << "[A]\n";
  write_triplets(os, inst.A);
  os << "[b]\n";
  write_vector(os, inst.b);
  os << "[C]\n";
  write_triplets(os, inst.C);
  os << "[D]\n";
  write_triplets(os, inst.D);
  return os.str();
}

void write_instance(const MiqpInstance& inst, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot open " + path.string() + " for writing");
  out << format_instance(inst);
  if (!out) throw Error(ErrorCode::InvalidArgument, "failed writing " + path.string());
}

MiqpInstance parse_instance(const std::string& text) {
  std::map<std::string, std::vector<Line>> sections;
  std::map<std::string, int> header_line;
  std::string current;
  std::istringstream in(text);
  std::string raw;
  int number = 0;
  while (std::getline(in, raw)) {
    ++number;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    while (!raw.empty() && (raw.back() == '\r' || raw.back() == ' ' || raw.back() == '\t')) {
      raw.pop_back();
    }
    const auto start = raw.find_first_not_of(" \t");
    if (start == std::string::npos) continue;
    raw.erase(0, start);
    if (raw.front() == '[') {
      if (raw.back() != ']') parse_fail(number, "malformed section header");
      current = raw.substr(1, raw.size() - 2);
      if (header_line.count(current)) parse_fail(number, "duplicate section [" + current + "]");
      header_line[current] = number;
      sections[current];
      continue;
    }
    if (current.empty()) parse_fail(number, "data before the first section header");
    Line line{number, {}, {}};
    std::istringstream ls(raw);
    for (std::string tok; ls >> tok;) line.tokens.push_back(tok);
    if (const auto sp = raw.find_first_of(" \t"); sp != std::string::npos) {
      line.rest = raw.substr(raw.find_first_not_of(" \t", sp));
    }
    sections[current].push_back(std::move(line));
  }

  static const char* known[] = {"dimensions", "k", "metadata", "Q", "g", "h", "A", "b", "C", "D"};
  for (const auto& [name, _] : sections) {
    if (std::find(std::begin(known), std::end(known), name) == std::end(known)) {
      parse_fail(header_line[name], "unknown section [" + name + "]");
    }
  }
  for (const char* required : {"dimensions", "Q", "g", "h"}) {
    if (!sections.count(required)) {
      parse_fail(number, std::string("missing section [") + required + "]");
    }
  }

  MiqpInstance inst;
  long n = -1, m1 = 0, m2 = 0;
  for (const auto& l : sections["dimensions"]) {
    if (l.tokens.size() != 2) parse_fail(l.number, "dimensions expects 'key value'");
    const long v = parse_int(l.tokens[1], l.number, "dimensions");
    if (v < 0) parse_fail(l.number, "negative dimension");
    if (l.tokens[0] == "n") n = v;
    else if (l.tokens[0] == "m1") m1 = v;
    else if (l.tokens[0] == "m2") m2 = v;
    else parse_fail(l.number, "unknown dimension '" + l.tokens[0] + "'");
  }
  if (n < 1) parse_fail(header_line["dimensions"], "dimension n missing or zero");
  inst.n = static_cast<int>(n);

  if (sections.count("k")) {
    const auto& ks = sections["k"];
    if (ks.size() != 1 || ks[0].tokens.size() != 1) {
      parse_fail(header_line["k"], "[k] expects a single integer");
    }
    const long k = parse_int(ks[0].tokens[0], ks[0].number, "k");
    if (k < 1 || k > n) parse_fail(ks[0].number, "k must lie in [1, n]");
    inst.k = static_cast<int>(k);
  }

  for (const auto& l : sections["metadata"]) {
    const std::string& key = l.tokens[0];
    if (key == "name") inst.name = l.rest;
    else if (key == "generator") inst.generator = l.rest;
    else if (key == "seed") {
      if (l.tokens.size() != 2) parse_fail(l.number, "seed expects one value");
      std::uint64_t s = 0;
      const auto& t = l.tokens[1];
      const auto res = std::from_chars(t.data(), t.data() + t.size(), s);
      if (res.ec != std::errc() || res.ptr != t.data() + t.size()) {
        parse_fail(l.number, "invalid seed '" + t + "'");
      }
      inst.seed = s;
    } else {
      parse_fail(l.number, "unknown metadata key '" + key + "'");
    }
  }

  const auto& qlines = sections["Q"];
  if (static_cast<long>(qlines.size()) != n) {
    parse_fail(header_line["Q"], "Q needs " + std::to_string(n) + " rows, found " +
                                     std::to_string(qlines.size()));
  }
  inst.Q = Matrix(n, n);
  for (long i = 0; i < n; ++i) {
    const auto& l = qlines[static_cast<std::size_t>(i)];
    if (static_cast<long>(l.tokens.size()) != n) {
      parse_fail(l.number, "Q row " + std::to_string(i) + " needs " + std::to_string(n) + " entries");
    }
    for (long j = 0; j < n; ++j) {
      inst.Q(i, j) = parse_double(l.tokens[static_cast<std::size_t>(j)], l.number, "Q");
    }
  }
  const double qscale = std::max(1.0, inst.Q.cwiseAbs().maxCoeff());
  for (long i = 0; i < n; ++i) {
    for (long j = i + 1; j < n; ++j) {
      if (std::abs(inst.Q(i, j) - inst.Q(j, i)) > 1e-12 * qscale) {
        std::ostringstream os;
        os << "Q is not symmetric: Q(" << i << "," << j << ") = " << inst.Q(i, j) << " but Q("
           << j << "," << i << ") = " << inst.Q(j, i);
        parse_fail(qlines[static_cast<std::size_t>(i)].number, os.str());
      }
    }
  }

  const auto vec_section = [&](const char* name, long len) {
    const std::vector<double> v = collect_numbers(sections[name], name);
    if (static_cast<long>(v.size()) != len) {
      throw Error(ErrorCode::DimensionMismatch,
                  std::string("section [") + name + "] has " + std::to_string(v.size()) +
                      " entries, expected " + std::to_string(len));
    }
    return to_vector(v);
  };
  inst.g = vec_section("g", n);
  inst.h = vec_section("h", n);
  inst.b = vec_section("b", m1);
  inst.A = parse_triplets(sections["A"], static_cast<int>(m1), static_cast<int>(n), "A");
  inst.C = parse_triplets(sections["C"], static_cast<int>(m2), static_cast<int>(n), "C");
  inst.D = parse_triplets(sections["D"], static_cast<int>(m2), static_cast<int>(n), "D");
  validate_structure(inst);
  return inst;
}

MiqpInstance read_instance(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_instance(buf.str());
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.detail());
  }
}

bool operator==(const MiqpInstance& a, const MiqpInstance& b) {
  const auto same_sparse = [](const SparseMatrix& x, const SparseMatrix& y) {
    return x.rows() == y.rows() && x.cols() == y.cols() && Matrix(x) == Matrix(y);
  };
  return a.n == b.n && a.Q == b.Q && a.g == b.g && a.h == b.h && a.b == b.b &&
         same_sparse(a.A, b.A) && same_sparse(a.C, b.C) && same_sparse(a.D, b.D) && a.k == b.k &&
         a.name == b.name && a.seed == b.seed && a.generator == b.generator;
}

}  // namespace miqp
