#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "fmc/mesh.hpp"

namespace fmc {

namespace {

struct Line {
  std::size_t number;
  std::vector<std::string> tokens;
};

// Non-empty lines with comments stripped, tokenized on whitespace.
std::vector<Line> tokenize(std::istream& in) {
  std::vector<Line> lines;
  std::string raw;
  std::size_t number = 0;
  while (std::getline(in, raw)) {
    ++number;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    std::istringstream ss(raw);
    Line line{number, {}};
    for (std::string tok; ss >> tok;) line.tokens.push_back(tok);
    if (!line.tokens.empty()) lines.push_back(std::move(line));
  }
  return lines;
}

[[noreturn]] void fail(std::size_t line, const std::string& what) {
  throw MeshError("mesh file line " + std::to_string(line) + ": " + what);
}

double to_double(const Line& l, const std::string& tok) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(tok, &used);
  } catch (const std::exception&) {
    fail(l.number, "expected a number, got '" + tok + "'");
  }
  if (used != tok.size()) fail(l.number, "expected a number, got '" + tok + "'");
  return v;
}

long to_int(const Line& l, const std::string& tok) {
  std::size_t used = 0;
  long v = 0;
  try {
    v = std::stol(tok, &used);
  } catch (const std::exception&) {
    fail(l.number, "expected an integer, got '" + tok + "'");
  }
  if (used != tok.size())
    fail(l.number, "expected an integer, got '" + tok + "'");
  return v;
}

std::size_t expect_header(const std::vector<Line>& lines, std::size_t at,
                          const std::string& key, std::size_t last_line) {
  if (at >= lines.size())
    fail(last_line, "unexpected end of file, expected '" + key + "'");
  const Line& l = lines[at];
  if (l.tokens.size() != 2 || l.tokens[0] != key)
    fail(l.number, "expected '" + key + " <count>'");
  const long n = to_int(l, l.tokens[1]);
  if (n < 0) fail(l.number, "negative count");
  return static_cast<std::size_t>(n);
}

}  // namespace

Mesh read_mesh(std::istream& in) {
  const auto lines = tokenize(in);
  if (lines.empty()) throw MeshError("mesh file is empty");
  const std::size_t last = lines.back().number;

  std::size_t at = 0;
  const auto dim = static_cast<int>(expect_header(lines, at++, "dim", last));
  if (dim < 1 || dim > 3) fail(lines[0].number, "dim must be 1, 2 or 3");

  const std::size_t n_nodes = expect_header(lines, at++, "nodes", last);
  std::vector<Point> nodes(n_nodes, Point{0.0, 0.0, 0.0});
  for (std::size_t i = 0; i < n_nodes; ++i, ++at) {
    if (at >= lines.size()) fail(last, "unexpected end of file in nodes");
    const Line& l = lines[at];
    if (l.tokens.size() != static_cast<std::size_t>(dim))
      fail(l.number, "expected " + std::to_string(dim) + " coordinates");
    for (int c = 0; c < dim; ++c) nodes[i][c] = to_double(l, l.tokens[c]);
  }

  const std::size_t n_elems = expect_header(lines, at++, "elements", last);
  std::vector<Simplex> elems(n_elems, Simplex{-1, -1, -1, -1});
  for (std::size_t e = 0; e < n_elems; ++e, ++at) {
    if (at >= lines.size()) fail(last, "unexpected end of file in elements");
    const Line& l = lines[at];
    if (l.tokens.size() != static_cast<std::size_t>(dim + 1))
      fail(l.number, "expected " + std::to_string(dim + 1) + " node indices");
    for (int k = 0; k <= dim; ++k) {
      const long idx = to_int(l, l.tokens[k]);
      if (idx < 0 || static_cast<std::size_t>(idx) >= n_nodes)
        fail(l.number, "element references node " + std::to_string(idx) +
                           " of " + std::to_string(n_nodes));
      elems[e][k] = static_cast<int>(idx);
    }
  }

  std::vector<int> boundary;
  if (at >= lines.size()) fail(last, "unexpected end of file, expected 'boundary'");
  if (lines[at].tokens.size() != 1 || lines[at].tokens[0] != "boundary")
    fail(lines[at].number, "expected 'boundary'");
  ++at;
  if (at < lines.size()) {
    const Line& l = lines[at++];
    for (const auto& tok : l.tokens) {
      const long idx = to_int(l, tok);
      if (idx < 0 || static_cast<std::size_t>(idx) >= n_nodes)
        fail(l.number, "boundary references node " + std::to_string(idx) +
                           " of " + std::to_string(n_nodes));
      boundary.push_back(static_cast<int>(idx));
    }
  }
  if (at < lines.size()) fail(lines[at].number, "trailing content");

  try {
    return Mesh::from_arrays(dim, std::move(nodes), std::move(elems),
                             std::move(boundary));
  } catch (const MeshError& err) {
    throw MeshError(std::string("invalid mesh file: ") + err.what());
  }
}

Mesh read_mesh(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MeshError("cannot open mesh file " + path.string());
  return read_mesh(in);
}

void write_mesh(const Mesh& mesh, std::ostream& out) {
  const int dim = mesh.dim();
  out << "dim " << dim << '\n';
  out << "nodes " << mesh.num_nodes() << '\n';
  out << std::setprecision(17);
  for (const auto& p : mesh.nodes()) {
    for (int c = 0; c < dim; ++c) out << (c ? " " : "") << p[c];
    out << '\n';
  }
  out << "elements " << mesh.num_elements() << '\n';
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const auto verts = mesh.element(e);
    for (int k = 0; k <= dim; ++k) out << (k ? " " : "") << verts[k];
    out << '\n';
  }
  out << "boundary\n";
  const auto& b = mesh.boundary_nodes();
  for (std::size_t i = 0; i < b.size(); ++i) out << (i ? " " : "") << b[i];
  out << '\n';
}

void write_mesh(const Mesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw MeshError("cannot write mesh file " + path.string());
  write_mesh(mesh, out);
}

}  // namespace fmc
