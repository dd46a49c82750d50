#include <doctest.h>

#include <functional>

#include "sogtok/error.hpp"
#include "sogtok/graph_io.hpp"

using namespace sogtok;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::kIOFailure;
}

}  // namespace

TEST_CASE("graph file records") {
  const auto graphs = parse_graph_file(R"({"id":"g1","nodes":[{"text":"a"},{"text":"b"}],"edges":[[0,1]],"label":1})"
                                       "\n\n"
                                       R"({"id":"m","smiles":"C1CC1"})");
  REQUIRE(graphs.size() == 2);
  CHECK(graphs[0].num_nodes() == 2);
  CHECK(graphs[0].num_edges() == 1);
  CHECK(graphs[0].label() == 1);
  CHECK(graphs[0].nodes()[1].text == "b");
  CHECK(graphs[1].num_edges() == 3);
  CHECK(graphs[1].graph_text() == "C1CC1");
  CHECK(parse_graph_file(format_graph_file(graphs)) == graphs);
}

TEST_CASE("graph file errors") {
  CHECK(code_of([] { parse_graph_file(R"({"id":"x","nodes":[{},{}],"edges":[[0,5]]})"); }) ==
        ErrorCode::kSemanticError);
  CHECK(code_of([] { parse_graph_file(R"({"id":"x","nodes":[],"edges":[]})"); }) == ErrorCode::kSemanticError);
  try {
    parse_graph_file("{\"id\":\"ok\",\"nodes\":[{}],\"edges\":[]}\n{\"id\": oops}");
    FAIL("expected SyntaxError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kSyntaxError);
    CHECK(e.line() == 2);
    CHECK(e.column() > 0);
  }
}

TEST_CASE("edge list and label csv") {
  const Graph g = parse_edge_list("n=4\n0 1\n1 2\n2 3\n", "p4");
  CHECK(g.num_nodes() == 4);
  CHECK(g.num_edges() == 3);
  CHECK(code_of([] { parse_edge_list("0 1\n"); }) == ErrorCode::kSyntaxError);
  const auto labels = parse_label_csv("id,label\na,1\nb,0\n");
  CHECK(labels.at("a") == 1);
  CHECK(labels.at("b") == 0);
  const std::vector<Graph> gs{g.with_id("a")};
  CHECK(join_labels(gs, labels)[0].label() == 1);
}

TEST_CASE("missing files raise IOFailure") {
  CHECK(code_of([] { read_file("/nonexistent/dir/file.jsonl"); }) == ErrorCode::kIOFailure);
  CHECK(exit_code_for(ErrorCode::kIOFailure) == 1);
  CHECK(exit_code_for(ErrorCode::kNonFiniteLoss) == 3);
  CHECK(exit_code_for(ErrorCode::kInvalidConfig) == 2);
}
