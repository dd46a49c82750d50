#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sogtok/graph.hpp"

namespace sogtok {

// Graph file: one JSON object per line,
//   {"id": "...", "nodes": [{"text": "..."}, {}], "edges": [[0,1]], "label": 1, "smiles": "CCO"}
// `label` and `smiles` are optional. When `nodes` is absent and `smiles` is
// present the topology is taken from the SMILES string. Blank lines are skipped.
// Throws SyntaxError (with line/column) for malformed JSON or wrong field types
// and SemanticError for records that violate the graph invariants.
std::vector<Graph> parse_graph_file(std::string_view bytes,
                                    std::size_t max_nodes = kDefaultMaxNodes);

std::vector<Graph> read_graph_file(const std::string& path,
                                   std::size_t max_nodes = kDefaultMaxNodes);

// Inverse of parse_graph_file; graph_text is written as `smiles`.
std::string format_graph_file(std::span<const Graph> graphs);

// Edge list: header `n=<count>` followed by one `i j` pair per line.
Graph parse_edge_list(std::string_view text, std::string id = {},
                      std::size_t max_nodes = kDefaultMaxNodes);

// Two-column CSV (`id,label`, `id,split`, ...). A first line starting with
// `id,` is a header and skipped.
std::map<std::string, std::string> parse_two_column_csv(std::string_view text);

std::map<std::string, int> parse_label_csv(std::string_view text);

// Returns copies of `graphs` with labels taken from `labels` where the id matches.
std::vector<Graph> join_labels(std::span<const Graph> graphs, const std::map<std::string, int>& labels);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace sogtok
