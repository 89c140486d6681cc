#pragma once

// File formats: OEIS-style b-files, polynomial JSON, run manifests.
// Big integers always travel as decimal strings.

#include "gerry/analysis.hpp"
#include "gerry/assemble.hpp"

#include <json.hpp>

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace gerry {

inline constexpr const char* engine_version = "1.0.0";

struct FormatError : std::runtime_error {
  int line;  // 1-based, 0 when not tied to a line
  FormatError(const std::string& source, int ln, const std::string& what)
      : std::runtime_error(source + (ln > 0 ? ":" + std::to_string(ln) : std::string()) + ": " + what), line(ln) {}
};

using json = nlohmann::ordered_json;

inline uint64_t fnv1a64(std::string_view s) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) h = (h ^ c) * 1099511628211ull;
  return h;
}

inline std::string hex64(uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(path, 0, "cannot open");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path);
}

// ---------------------------------------------------------------------------
// b-files: "n a(n)" per line, '#' comments and blank lines ignored.

struct BEntry {
  int n = 0;
  std::string text;  // value as written
  std::optional<bigint> exact;
  real value = 0;
};

namespace io_detail {

inline bool is_integer_text(const std::string& s) {
  size_t i = (!s.empty() && (s[0] == '-' || s[0] == '+')) ? 1 : 0;
  if (i >= s.size()) return false;
  for (; i < s.size(); ++i)
    if (s[i] < '0' || s[i] > '9') return false;
  return true;
}

inline bool is_real_text(const std::string& s) {
  if (s.empty()) return false;
  char* end = nullptr;
  std::strtod(s.c_str(), &end);
  return end && *end == '\0';
}

}  // namespace io_detail

inline std::vector<BEntry> parse_bfile(const std::string& text, const std::string& source = "<input>") {
  std::vector<BEntry> out;
  std::istringstream in(text);
  std::string line;
  int ln = 0;
  while (std::getline(in, line)) {
    ++ln;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    std::string a, b, extra;
    if (!(ls >> a >> b)) throw FormatError(source, ln, "expected \"n a(n)\"");
    if (ls >> extra) throw FormatError(source, ln, "trailing text \"" + extra + "\"");
    if (!io_detail::is_integer_text(a)) throw FormatError(source, ln, "index \"" + a + "\" is not an integer");
    BEntry e;
    try {
      e.n = std::stoi(a);
    } catch (const std::exception&) {
      throw FormatError(source, ln, "index out of range");
    }
    e.text = b;
    if (io_detail::is_integer_text(b)) {
      e.exact = bigint(b[0] == '+' ? b.substr(1) : b);
      e.value = real(*e.exact);
    } else if (io_detail::is_real_text(b)) {
      e.value = real(b);
    } else {
      throw FormatError(source, ln, "value \"" + b + "\" is not a number");
    }
    if (!out.empty() && e.n != out.back().n + 1)
      throw FormatError(source, ln, "index " + std::to_string(e.n) + " does not follow " + std::to_string(out.back().n));
    out.push_back(std::move(e));
  }
  return out;
}

inline std::vector<BEntry> read_bfile(const std::string& path) { return parse_bfile(read_text(path), path); }

inline SeriesSample to_sample(const std::vector<BEntry>& v) {
  SeriesSample s;
  for (const auto& e : v) s.terms.push_back({e.n, e.value, -1, e.exact});
  return s;
}

inline std::string format_bfile(const std::vector<std::pair<int, bigint>>& rows, const std::vector<std::string>& header = {}) {
  std::ostringstream os;
  for (const auto& h : header) os << "# " << h << '\n';
  for (const auto& [n, v] : rows) os << n << ' ' << v.str() << '\n';
  return os.str();
}

// ---------------------------------------------------------------------------
// Manifests. The embedded part is a pure function of inputs and results;
// timings and thread counts go to a sidecar so outputs stay byte-identical.

inline json manifest_core(const std::string& command, const json& params, const RunInfo* info) {
  json m;
  m["command"] = command;
  m["parameters"] = params;
  m["engine_version"] = engine_version;
  if (info) {
    json ps = json::array();
    for (uint64_t p : info->primes) ps.push_back(std::to_string(p));
    m["prime_bits"] = info->bit_width;
    m["primes"] = ps;
    m["stable"] = info->stable;
  }
  return m;
}

inline json manifest_sidecar(const json& core, const std::string& output_name, const std::string& output_text,
                             int threads, double wall, double cpu, size_t peak_bytes) {
  json m = core;
  m["output"] = output_name;
  m["output_fnv1a64"] = hex64(fnv1a64(output_text));
  m["threads"] = threads;
  m["wall_seconds"] = wall;
  m["cpu_seconds"] = cpu;
  m["table_bytes_estimate"] = peak_bytes;
  return m;
}

inline std::string sidecar_path(const std::string& output) { return output + ".manifest.json"; }

// ---------------------------------------------------------------------------
// Polynomial JSON: {"L", "coeffs": [k = 1..L^2-1], "manifest"}.

inline json polynomial_json(int L, const std::vector<bigint>& g, const json& manifest,
                            const std::vector<bigint>* panel = nullptr) {
  json j;
  j["L"] = L;
  json c = json::array();
  for (int k = 1; k < L * L; ++k) c.push_back(k < static_cast<int>(g.size()) ? g[k].str() : std::string("0"));
  j["coeffs"] = c;
  if (panel) {
    json p = json::array();
    for (size_t k = 1; k < panel->size(); ++k) p.push_back((*panel)[k].str());
    j["panel_coeffs"] = p;
  }
  j["manifest"] = manifest;
  return j;
}

struct PolynomialFile {
  int L = 0;
  std::vector<bigint> g;  // g[0..L^2], ends zero
  json manifest;
};

inline PolynomialFile parse_polynomial_json(const std::string& text, const std::string& source = "<input>") {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(source, 0, e.what());
  }
  if (!j.is_object() || !j.contains("L") || !j["L"].is_number_integer() || !j.contains("coeffs") ||
      !j["coeffs"].is_array())
    throw FormatError(source, 0, "expected an object with integer \"L\" and array \"coeffs\"");
  PolynomialFile pf;
  pf.L = j["L"].get<int>();
  pf.g.push_back(0);
  if (pf.L < 1 || static_cast<int>(j["coeffs"].size()) != pf.L * pf.L - 1)
    throw FormatError(source, 0, "expected L^2-1 coefficients");
  for (const auto& c : j["coeffs"]) {
    if (!c.is_string() || !io_detail::is_integer_text(c.get<std::string>()))
      throw FormatError(source, 0, "coefficient " + std::to_string(pf.g.size()) + " is not a decimal string");
    pf.g.push_back(bigint(c.get<std::string>()));
  }
  pf.g.push_back(0);
  if (j.contains("manifest")) pf.manifest = j["manifest"];
  return pf;
}

// Trails as [[L, value], ...] for plotting.
inline json trail_json(const Trail& t) {
  json a = json::array();
  for (const auto& [n, v] : t) a.push_back(json::array({n, static_cast<double>(v)}));
  return a;
}

inline std::string real_text(const real& v, int digits = 20) {
  std::ostringstream os;
  os << std::setprecision(digits) << v;
  return os.str();
}

}  // namespace gerry
