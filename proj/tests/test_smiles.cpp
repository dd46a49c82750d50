#include <doctest.h>

#include <functional>

#include "sogtok/error.hpp"
#include "sogtok/graph.hpp"
#include "sogtok/smiles.hpp"
#include "smiles_corpus.hpp"

using namespace sogtok;
using namespace sogtok::testing;

namespace {

Error error_of(std::string_view s) {
  try {
    parse_smiles(s);
  } catch (const Error& e) {
    return e;
  }
  FAIL("no error for " << s);
  return Error(ErrorCode::kIOFailure, "");
}

}  // namespace

TEST_CASE("hand-verified SMILES corpus") {
  for (const auto& e : kCorpus) {
    CAPTURE(e.smiles);
    const SmilesMolecule m = parse_smiles(e.smiles);
    CHECK(m.atoms.size() == e.atoms);
    CHECK(m.bonds.size() == e.bonds);
    CHECK(ring_count(m) == e.rings);
    const Graph g = to_graph(m);
    CHECK(g.num_edges() == e.bonds);
    CHECK(g.graph_text() == std::string(e.smiles));
    if (std::string_view(e.smiles).find('.') == std::string_view::npos) CHECK(is_connected(g));
  }
}

TEST_CASE("SMILES details") {
  const auto benzene = parse_smiles("c1ccccc1");
  for (const auto& a : benzene.atoms) CHECK(a.aromatic);
  const auto cl = parse_smiles("ClC(Cl)Cl");
  CHECK(cl.atoms[0].symbol == "Cl");
  CHECK(cl.atoms[1].symbol == "C");
  const auto tri = to_graph(parse_smiles("C1CC1"));
  CHECK(tri.has_edge(0, 2));
  CHECK(to_graph(parse_smiles("C")).num_nodes() == 1);
  const auto co2 = parse_smiles("O=C=O");
  CHECK(co2.bonds[0].order == BondOrder::kDouble);
}

TEST_CASE("SMILES errors carry positions") {
  const Error unclosed = error_of("C1CC");
  CHECK(unclosed.code() == ErrorCode::kUnclosedRing);
  CHECK(unclosed.column() == 1);
  const Error open_branch = error_of("CC(C");
  CHECK(open_branch.code() == ErrorCode::kUnbalancedBranch);
  CHECK(open_branch.column() == 2);
  const Error close_branch = error_of("CC)C");
  CHECK(close_branch.code() == ErrorCode::kUnbalancedBranch);
  CHECK(close_branch.column() == 2);
  const Error unsupported = error_of("CXC");
  CHECK(unsupported.code() == ErrorCode::kUnsupportedToken);
  CHECK(unsupported.column() == 1);
}
