#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "amp/graph.h"

namespace amp {

// Line-oriented text format:
//   n d_in
//   <n lines of d_in reals>
//   <edge lines "u v", 0-indexed>
// Blank lines and lines starting with '#' are ignored.
Graph read_graph(std::istream& in, const std::string& source = "<stream>");
void write_graph(std::ostream& out, const Graph& g);

// A fixed construction: a named pair of graphs that some aggregation scheme
// cannot tell apart. Each graph is the text format above followed by a line
// `label <node-labels...>` or `label graph <class>`.
struct FixedConstruction {
  std::string name;
  // "1wl" for pairs that color refinement cannot separate, "max" / "mean"
  // for pairs that max / mean neighbor aggregation cannot separate.
  std::string hardness;
  std::vector<Graph> graphs;
};

// File layout: blocks introduced by `construction <name> <hardness> <count>`.
std::vector<FixedConstruction> read_fixed_constructions(std::istream& in,
                                                        const std::string& source);

}  // namespace amp
