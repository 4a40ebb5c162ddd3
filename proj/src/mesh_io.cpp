#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string_view>

#include "robin/error.hpp"
#include "robin/geometry.hpp"

namespace robin {

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

[[noreturn]] void fail(int line_no, const std::string& msg) {
  throw Error(ErrorKind::ParseError, "line " + std::to_string(line_no) + ": " + msg);
}

template <class T>
T parse_number(std::string_view tok, int line_no) {
  T value{};
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    fail(line_no, "cannot parse '" + std::string(tok) + "'");
  }
  return value;
}

}  // namespace

Mesh parse_mesh(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;

  long long n_nodes = -1, n_tris = -1, n_edges = -1;
  std::vector<Point> nodes;
  std::vector<Triangle> tris;
  std::vector<Edge> edges;

  while (std::getline(in, line)) {
    ++line_no;
    auto tokens = split_ws(line);
    if (tokens.empty() || tokens[0].front() == '#') continue;

    if (n_nodes < 0) {
      if (tokens.size() != 3) fail(line_no, "header needs <n_nodes> <n_triangles> <n_boundary_edges>");
      n_nodes = parse_number<long long>(tokens[0], line_no);
      n_tris = parse_number<long long>(tokens[1], line_no);
      n_edges = parse_number<long long>(tokens[2], line_no);
      if (n_nodes < 0 || n_tris < 0 || n_edges < 0) fail(line_no, "negative count in header");
      nodes.reserve(n_nodes);
      tris.reserve(n_tris);
      edges.reserve(n_edges);
    } else if (static_cast<long long>(nodes.size()) < n_nodes) {
      if (tokens.size() != 2) fail(line_no, "node line needs 2 coordinates");
      nodes.push_back({parse_number<double>(tokens[0], line_no), parse_number<double>(tokens[1], line_no)});
    } else if (static_cast<long long>(tris.size()) < n_tris) {
      if (tokens.size() != 3) fail(line_no, "triangle line needs 3 indices");
      Triangle t{};
      for (int k = 0; k < 3; ++k) {
        t[k] = parse_number<int>(tokens[k], line_no);
        if (t[k] < 0 || t[k] >= n_nodes) fail(line_no, "triangle index " + std::to_string(t[k]) + " out of range");
      }
      tris.push_back(t);
    } else if (static_cast<long long>(edges.size()) < n_edges) {
      if (tokens.size() != 2) fail(line_no, "boundary edge line needs 2 indices");
      Edge e{};
      for (int k = 0; k < 2; ++k) {
        e[k] = parse_number<int>(tokens[k], line_no);
        if (e[k] < 0 || e[k] >= n_nodes) fail(line_no, "boundary edge index " + std::to_string(e[k]) + " out of range");
      }
      edges.push_back(e);
    } else {
      fail(line_no, "unexpected trailing data");
    }
  }
  if (n_nodes < 0) fail(line_no, "missing header");
  if (static_cast<long long>(nodes.size()) != n_nodes || static_cast<long long>(tris.size()) != n_tris ||
      static_cast<long long>(edges.size()) != n_edges) {
    fail(line_no, "file ends before all declared records were read");
  }
  return Mesh(std::move(nodes), std::move(tris), std::move(edges));
}

Mesh load_mesh(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_mesh(buf.str());
}

std::string format_mesh(const Mesh& mesh) {
  std::string out;
  char buf[96];
  std::snprintf(buf, sizeof buf, "%zu %zu %zu\n", mesh.num_nodes(), mesh.num_triangles(), mesh.boundary_edges().size());
  out += buf;
  for (const auto& p : mesh.nodes()) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g\n", p.x, p.y);
    out += buf;
  }
  for (const auto& t : mesh.triangles()) {
    std::snprintf(buf, sizeof buf, "%d %d %d\n", t[0], t[1], t[2]);
    out += buf;
  }
  for (const auto& e : mesh.boundary_edges()) {
    std::snprintf(buf, sizeof buf, "%d %d\n", e[0], e[1]);
    out += buf;
  }
  return out;
}

void save_mesh(const Mesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out << format_mesh(mesh);
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

}  // namespace robin
