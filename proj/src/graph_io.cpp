#include "sogtok/graph_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sogtok/error.hpp"
#include "sogtok/smiles.hpp"

namespace sogtok {
namespace {

using json = nlohmann::json;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t line_no = 1;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    const std::string_view line = text.substr(0, nl);
    fn(line, line_no);
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
    ++line_no;
  }
}

[[noreturn]] void type_error(std::size_t line, const std::string& message) {
  throw Error(ErrorCode::kSyntaxError, message, line, 1);
}

Graph graph_from_record(const json& record, std::size_t line, std::size_t max_nodes) {
  if (!record.is_object()) type_error(line, "record is not a JSON object");

  Graph::Spec spec;
  if (!record.contains("id") || !record["id"].is_string()) type_error(line, "field 'id' must be a string");
  spec.id = record["id"].get<std::string>();

  if (record.contains("label") && !record["label"].is_null()) {
    const auto& label = record["label"];
    if (label.is_boolean()) {
      spec.label = label.get<bool>() ? 1 : 0;
    } else if (label.is_number_integer()) {
      spec.label = label.get<int>();
    } else {
      type_error(line, "field 'label' must be an integer");
    }
  }
  if (record.contains("smiles") && !record["smiles"].is_null()) {
    if (!record["smiles"].is_string()) type_error(line, "field 'smiles' must be a string");
    spec.graph_text = record["smiles"].get<std::string>();
  }

  if (!record.contains("nodes")) {
    if (!spec.graph_text) type_error(line, "record needs 'nodes' or 'smiles'");
    try {
      Graph mol = to_graph(parse_smiles(*spec.graph_text), spec.id);
      spec.nodes = mol.nodes();
      spec.edges = mol.edges();
    } catch (const Error& e) {
      throw Error(ErrorCode::kSemanticError, std::string("bad smiles: ") + e.what(), line, 1);
    }
  } else {
    const auto& nodes = record["nodes"];
    if (!nodes.is_array()) type_error(line, "field 'nodes' must be an array");
    for (const auto& node : nodes) {
      NodeRecord rec;
      if (node.is_object()) {
        if (node.contains("text") && !node["text"].is_null()) {
          if (!node["text"].is_string()) type_error(line, "node 'text' must be a string");
          rec.text = node["text"].get<std::string>();
        }
      } else if (node.is_string()) {
        rec.text = node.get<std::string>();
      } else {
        type_error(line, "each node must be an object");
      }
      spec.nodes.push_back(std::move(rec));
    }
    if (!record.contains("edges")) type_error(line, "missing field 'edges'");
    const auto& edges = record["edges"];
    if (!edges.is_array()) type_error(line, "field 'edges' must be an array");
    for (const auto& edge : edges) {
      if (!edge.is_array() || edge.size() != 2 || !edge[0].is_number_integer() ||
          !edge[1].is_number_integer()) {
        type_error(line, "each edge must be a two-element integer array");
      }
      const auto u = edge[0].get<long long>();
      const auto v = edge[1].get<long long>();
      if (u < 0 || v < 0 || static_cast<std::size_t>(u) >= spec.nodes.size() ||
          static_cast<std::size_t>(v) >= spec.nodes.size()) {
        throw Error(ErrorCode::kSemanticError,
                    "edge [" + std::to_string(u) + "," + std::to_string(v) + "] out of range for " +
                        std::to_string(spec.nodes.size()) + " nodes",
                    line, 1);
      }
      spec.edges.push_back(Edge{static_cast<NodeIndex>(u), static_cast<NodeIndex>(v)});
    }
  }

  try {
    return Graph::create(std::move(spec), max_nodes);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kGraphTooLarge) throw Error(e.code(), e.what(), line, 1);
    throw Error(ErrorCode::kSemanticError, e.what(), line, 1);
  }
}

}  // namespace

std::vector<Graph> parse_graph_file(std::string_view bytes, std::size_t max_nodes) {
  std::vector<Graph> graphs;
  for_each_line(bytes, [&](std::string_view raw, std::size_t line_no) {
    const std::string_view line = trim(raw);
    if (line.empty()) return;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      const std::size_t column = e.byte == 0 ? 1 : e.byte;
      throw Error(ErrorCode::kSyntaxError, e.what(), line_no, column);
    }
    graphs.push_back(graph_from_record(record, line_no, max_nodes));
  });
  return graphs;
}

std::vector<Graph> read_graph_file(const std::string& path, std::size_t max_nodes) {
  return parse_graph_file(read_file(path), max_nodes);
}

std::string format_graph_file(std::span<const Graph> graphs) {
  std::string out;
  for (const Graph& g : graphs) {
    json record = json::object();
    record["id"] = g.id();
    json nodes = json::array();
    for (const auto& node : g.nodes()) {
      json n = json::object();
      if (node.text) n["text"] = *node.text;
      nodes.push_back(std::move(n));
    }
    record["nodes"] = std::move(nodes);
    json edges = json::array();
    for (const Edge& e : g.edges()) edges.push_back({e.u, e.v});
    record["edges"] = std::move(edges);
    if (g.label()) record["label"] = *g.label();
    if (g.graph_text()) record["smiles"] = *g.graph_text();
    out += record.dump();
    out += '\n';
  }
  return out;
}

Graph parse_edge_list(std::string_view text, std::string id, std::size_t max_nodes) {
  std::optional<std::size_t> n;
  Graph::Spec spec;
  spec.id = std::move(id);
  for_each_line(text, [&](std::string_view raw, std::size_t line_no) {
    const std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') return;
    if (!n) {
      std::size_t count = 0;
      if (!line.starts_with("n=")) {
        throw Error(ErrorCode::kSyntaxError, "expected header 'n=<count>'", line_no, 1);
      }
      const auto body = line.substr(2);
      auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), count);
      if (ec != std::errc() || ptr != body.data() + body.size()) {
        throw Error(ErrorCode::kSyntaxError, "bad node count", line_no, 3);
      }
      n = count;
      return;
    }
    std::istringstream in{std::string(line)};
    long long u = -1;
    long long v = -1;
    std::string extra;
    if (!(in >> u >> v) || (in >> extra)) {
      throw Error(ErrorCode::kSyntaxError, "expected 'i j'", line_no, 1);
    }
    if (u < 0 || v < 0 || static_cast<std::size_t>(u) >= *n || static_cast<std::size_t>(v) >= *n) {
      throw Error(ErrorCode::kSemanticError, "edge index out of range", line_no, 1);
    }
    spec.edges.push_back(Edge{static_cast<NodeIndex>(u), static_cast<NodeIndex>(v)});
  });
  if (!n) throw Error(ErrorCode::kSyntaxError, "missing header 'n=<count>'", 1, 1);
  spec.nodes.resize(*n);
  try {
    return Graph::create(std::move(spec), max_nodes);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kGraphTooLarge) throw;
    throw Error(ErrorCode::kSemanticError, e.what());
  }
}

std::map<std::string, std::string> parse_two_column_csv(std::string_view text) {
  std::map<std::string, std::string> rows;
  bool first = true;
  for_each_line(text, [&](std::string_view raw, std::size_t line_no) {
    const std::string_view line = trim(raw);
    if (line.empty()) return;
    const bool header = first && line.starts_with("id,");
    first = false;
    if (header) return;
    const std::size_t comma = line.find(',');
    if (comma == std::string_view::npos) {
      throw Error(ErrorCode::kSyntaxError, "expected two comma-separated columns", line_no, 1);
    }
    rows[std::string(trim(line.substr(0, comma)))] = std::string(trim(line.substr(comma + 1)));
  });
  return rows;
}

std::map<std::string, int> parse_label_csv(std::string_view text) {
  std::map<std::string, int> labels;
  for (const auto& [id, value] : parse_two_column_csv(text)) {
    int label = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), label);
    if (ec != std::errc() || ptr != value.data() + value.size()) {
      throw Error(ErrorCode::kSyntaxError, "label for '" + id + "' is not an integer");
    }
    labels[id] = label;
  }
  return labels;
}

std::vector<Graph> join_labels(std::span<const Graph> graphs, const std::map<std::string, int>& labels) {
  std::vector<Graph> out;
  out.reserve(graphs.size());
  for (const Graph& g : graphs) {
    const auto it = labels.find(g.id());
    out.push_back(it == labels.end() ? g : g.with_label(it->second));
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIOFailure, "cannot open '" + path + "' for reading");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIOFailure, "cannot open '" + path + "' for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error(ErrorCode::kIOFailure, "write to '" + path + "' failed");
}

}  // namespace sogtok
