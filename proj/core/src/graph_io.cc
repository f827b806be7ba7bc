#include "amp/graph_io.h"

#include <istream>
#include <optional>
#include <ostream>
#include <sstream>

#include "amp/error.h"

namespace amp {

namespace {

struct Line {
  long long number;
  std::string text;
};

class LineReader {
 public:
  LineReader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

  // Next non-blank, non-comment line, or false at end of input.
  bool next(Line& out) {
    if (pending_) {
      out = *pending_;
      pending_.reset();
      return true;
    }
    std::string text;
    while (std::getline(in_, text)) {
      ++number_;
      auto first = text.find_first_not_of(" \t\r");
      if (first == std::string::npos || text[first] == '#') continue;
      out = {number_, text};
      return true;
    }
    return false;
  }

  void push_back(Line line) { pending_ = std::move(line); }

  [[noreturn]] void fail(long long line, const std::string& what) const {
    throw ParseError(source_, line, what);
  }

  const std::string& source() const { return source_; }

 private:
  std::istream& in_;
  std::string source_;
  long long number_ = 0;
  std::optional<Line> pending_;
};

bool starts_with_word(const std::string& text, const std::string& word) {
  std::istringstream ss(text);
  std::string first;
  ss >> first;
  return first == word;
}

// Reads one graph block. Edge lines continue until end of input or a line
// whose first word is `stop_word`.
Graph read_graph_block(LineReader& reader, const std::string& stop_word) {
  Line line;
  if (!reader.next(line)) reader.fail(0, "missing header line");
  std::istringstream header(line.text);
  long long n = -1;
  long long d_in = -1;
  std::string extra;
  if (!(header >> n >> d_in) || (header >> extra) || n < 0 || d_in < 1) {
    reader.fail(line.number, "expected header `n d_in`");
  }
  std::vector<double> features;
  features.reserve(static_cast<std::size_t>(n * d_in));
  for (long long v = 0; v < n; ++v) {
    if (!reader.next(line)) reader.fail(line.number, "missing feature line for node " + std::to_string(v));
    std::istringstream row(line.text);
    for (long long j = 0; j < d_in; ++j) {
      double x;
      if (!(row >> x)) reader.fail(line.number, "expected " + std::to_string(d_in) + " features");
      features.push_back(x);
    }
    if (row >> extra) reader.fail(line.number, "too many feature values");
  }
  std::vector<std::pair<NodeId, NodeId>> edges;
  while (reader.next(line)) {
    if (!stop_word.empty() && starts_with_word(line.text, stop_word)) {
      reader.push_back(line);
      break;
    }
    std::istringstream row(line.text);
    long long u;
    long long v;
    if (!(row >> u >> v) || (row >> extra)) reader.fail(line.number, "expected edge `u v`");
    if (u < 0 || v < 0 || u >= n || v >= n || u == v) {
      reader.fail(line.number, "invalid edge " + std::to_string(u) + " " + std::to_string(v));
    }
    edges.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
  }
  return Graph::from_edges(static_cast<int>(n), edges, std::move(features),
                           static_cast<int>(d_in));
}

}  // namespace

Graph read_graph(std::istream& in, const std::string& source) {
  LineReader reader(in, source);
  return read_graph_block(reader, "");
}

void write_graph(std::ostream& out, const Graph& g) {
  out << g.num_nodes() << ' ' << g.feature_width() << '\n';
  std::ostringstream row;
  row.precision(17);
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    auto f = g.features(v);
    for (std::size_t j = 0; j < f.size(); ++j) {
      if (j) out << ' ';
      row.str("");
      row << f[j];
      out << row.str();
    }
    out << '\n';
  }
  for (auto [u, v] : g.edge_list()) out << u << ' ' << v << '\n';
}

std::vector<FixedConstruction> read_fixed_constructions(std::istream& in,
                                                        const std::string& source) {
  LineReader reader(in, source);
  std::vector<FixedConstruction> out;
  Line line;
  while (reader.next(line)) {
    std::istringstream head(line.text);
    std::string keyword;
    FixedConstruction fc;
    int count = 0;
    if (!(head >> keyword >> fc.name >> fc.hardness >> count) || keyword != "construction" ||
        count < 1) {
      reader.fail(line.number, "expected `construction <name> <hardness> <count>`");
    }
    if (fc.hardness != "1wl" && fc.hardness != "max" && fc.hardness != "mean") {
      reader.fail(line.number, "unknown hardness `" + fc.hardness + "`");
    }
    for (int i = 0; i < count; ++i) {
      Graph g = read_graph_block(reader, "label");
      if (!reader.next(line) || !starts_with_word(line.text, "label")) {
        reader.fail(line.number, "missing label line");
      }
      std::istringstream labels(line.text);
      std::string kind;
      labels >> keyword >> kind;
      if (kind == "graph") {
        int c;
        if (!(labels >> c)) reader.fail(line.number, "expected graph class");
        g = g.with_graph_label(c);
      } else if (kind == "node") {
        std::vector<int> node_labels;
        int c;
        while (labels >> c) node_labels.push_back(c);
        if (static_cast<int>(node_labels.size()) != g.num_nodes()) {
          reader.fail(line.number, "node label count does not match node count");
        }
        g = g.with_node_labels(std::move(node_labels));
      } else {
        reader.fail(line.number, "label kind must be `graph` or `node`");
      }
      fc.graphs.push_back(std::move(g));
    }
    out.push_back(std::move(fc));
  }
  return out;
}

}  // namespace amp
