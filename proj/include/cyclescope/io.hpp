#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "cyclescope/error.hpp"
#include "cyclescope/graph.hpp"

namespace cyclescope::io {

namespace detail {

inline std::string_view trim(std::string_view s) {
  auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

inline std::int64_t parse_int(std::string_view tok, std::size_t line) {
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc{} || ptr != tok.data() + tok.size())
    throw Error(Errc::ParseError,
                "line " + std::to_string(line) + ": not an integer: '" + std::string(tok) + "'");
  return value;
}

inline double parse_double(std::string_view tok, std::size_t line) {
  try {
    std::size_t used = 0;
    double v = std::stod(std::string(tok), &used);
    if (used != tok.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw Error(Errc::ParseError,
                "line " + std::to_string(line) + ": not a number: '" + std::string(tok) + "'");
  }
}

inline std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace detail

/// One `source<TAB>target` pair per line, 0-based; `#` lines and blank lines
/// are skipped. Any whitespace is accepted as the separator.
inline Digraph read_edge_list(std::istream& in, SelfLoopPolicy loops = SelfLoopPolicy::Reject,
                              std::optional<std::size_t> n = std::nullopt) {
  std::vector<EdgePair> pairs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto body = detail::trim(line);
    if (body.empty() || body.front() == '#') continue;
    auto toks = detail::split_ws(body);
    if (toks.size() != 2)
      throw Error(Errc::ParseError, "line " + std::to_string(lineno) +
                                        ": expected 'source<TAB>target'");
    pairs.emplace_back(detail::parse_int(toks[0], lineno), detail::parse_int(toks[1], lineno));
  }
  return from_edge_list(pairs, n, loops);
}

/// Reads a `coordinate general` Matrix Market file with pattern, real or
/// integer field. A nonzero at (i, j) is the edge i -> j (converted to 0-based).
inline Digraph read_matrix_market(std::istream& in, SelfLoopPolicy loops = SelfLoopPolicy::Reject) {
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw Error(Errc::ParseError, "empty Matrix Market stream");
  ++lineno;
  auto header = detail::split_ws(detail::trim(line));
  if (header.size() < 5 || detail::lower(header[0]) != "%%matrixmarket" ||
      detail::lower(header[1]) != "matrix")
    throw Error(Errc::ParseError, "missing %%MatrixMarket matrix header");
  const auto format = detail::lower(header[2]);
  const auto field = detail::lower(header[3]);
  const auto symmetry = detail::lower(header[4]);
  if (format != "coordinate")
    throw Error(Errc::ParseError, "only coordinate format is supported, got " + format);
  if (field != "pattern" && field != "real" && field != "integer")
    throw Error(Errc::ParseError, "unsupported field " + field);
  if (symmetry != "general")
    throw Error(Errc::ParseError, "only general symmetry is supported, got " + symmetry);

  std::optional<std::int64_t> rows, cols, nnz;
  std::vector<EdgePair> pairs;
  while (std::getline(in, line)) {
    ++lineno;
    auto body = detail::trim(line);
    if (body.empty() || body.front() == '%') continue;
    auto toks = detail::split_ws(body);
    if (!rows) {
      if (toks.size() != 3) throw Error(Errc::ParseError, "bad size line");
      rows = detail::parse_int(toks[0], lineno);
      cols = detail::parse_int(toks[1], lineno);
      nnz = detail::parse_int(toks[2], lineno);
      if (*rows != *cols)
        throw Error(Errc::ParseError, "adjacency matrix must be square");
      pairs.reserve(static_cast<std::size_t>(std::max<std::int64_t>(*nnz, 0)));
      continue;
    }
    const std::size_t want = field == "pattern" ? 2 : 3;
    if (toks.size() != want)
      throw Error(Errc::ParseError, "line " + std::to_string(lineno) + ": wrong entry width");
    auto i = detail::parse_int(toks[0], lineno);
    auto j = detail::parse_int(toks[1], lineno);
    if (i < 1 || j < 1 || i > *rows || j > *cols)
      throw Error(Errc::IndexOutOfRange, "line " + std::to_string(lineno) + ": entry out of range");
    if (want == 3 && detail::parse_double(toks[2], lineno) == 0.0) continue;
    pairs.emplace_back(i - 1, j - 1);
  }
  if (!rows) throw Error(Errc::ParseError, "missing size line");
  return from_edge_list(pairs, static_cast<std::size_t>(*rows), loops);
}

inline void write_edge_list(std::ostream& out, const Digraph& g) {
  out << "# n=" << g.num_vertices() << " m=" << g.num_edges() << "\n";
  for (Vertex u = 0; u < g.num_vertices(); ++u)
    for (Vertex v : g.out_neighbors(u)) out << u << '\t' << v << '\n';
}

/// Reads back the vertex count written by write_edge_list, so trailing
/// isolated vertices survive a round trip. Falls back to the max index.
inline Digraph read_edge_list_with_header(std::istream& in,
                                          SelfLoopPolicy loops = SelfLoopPolicy::Reject) {
  std::stringstream buffer;
  buffer << in.rdbuf();
  std::string text = buffer.str();
  std::optional<std::size_t> n;
  if (text.rfind("# n=", 0) == 0) {
    auto end = text.find_first_of(" \n", 4);
    n = static_cast<std::size_t>(detail::parse_int(std::string_view(text).substr(4, end - 4), 1));
  }
  std::istringstream body(text);
  return read_edge_list(body, loops, n);
}

/// Picks the reader from the extension: `.mtx` is Matrix Market, anything
/// else a TSV edge list.
inline Digraph read_graph_file(const std::filesystem::path& path,
                               SelfLoopPolicy loops = SelfLoopPolicy::Reject) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  if (path.extension() == ".mtx") return read_matrix_market(in, loops);
  return read_edge_list_with_header(in, loops);
}

}  // namespace cyclescope::io
