#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "sogtok/graph.hpp"

namespace sogtok {

enum class BondOrder : std::uint8_t { kSingle = 1, kDouble = 2, kTriple = 3, kAromatic = 4 };

struct SmilesAtom {
  std::string symbol;  // element symbol with canonical capitalisation, e.g. "C", "Cl"
  bool aromatic = false;
};

struct SmilesBond {
  std::size_t a = 0;
  std::size_t b = 0;
  BondOrder order = BondOrder::kSingle;
};

struct SmilesMolecule {
  std::string source;
  std::vector<SmilesAtom> atoms;
  std::vector<SmilesBond> bonds;
};

// Topology-level SMILES reader. Accepts organic-subset atoms (B C N O P S F
// Cl Br I), aromatic lower-case atoms, bracket atoms, bonds `- = # : / \`,
// branches, ring closures `0-9` and `%nn`, and `.` component separators.
// Isotopes, chirality, hydrogen counts, charges and atom classes inside
// brackets are accepted and dropped.
//
// Errors: UnsupportedToken, UnbalancedBranch, UnclosedRing and SyntaxError,
// each carrying the 0-based character offset in Error::column().
SmilesMolecule parse_smiles(std::string_view smiles);

// One node per atom (text = element symbol), one edge per bond; graph_text is
// the source SMILES.
Graph to_graph(const SmilesMolecule& molecule, std::string id = {});

// Independent cycles: bonds - atoms + connected components.
std::size_t ring_count(const SmilesMolecule& molecule);

}  // namespace sogtok
