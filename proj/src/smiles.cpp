#include "sogtok/smiles.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <utility>

#include "sogtok/error.hpp"

namespace sogtok {
namespace {

constexpr std::array<std::string_view, 118> kElements = {
    "H",  "He", "Li", "Be", "B",  "C",  "N",  "O",  "F",  "Ne", "Na", "Mg", "Al", "Si", "P",
    "S",  "Cl", "Ar", "K",  "Ca", "Sc", "Ti", "V",  "Cr", "Mn", "Fe", "Co", "Ni", "Cu", "Zn",
    "Ga", "Ge", "As", "Se", "Br", "Kr", "Rb", "Sr", "Y",  "Zr", "Nb", "Mo", "Tc", "Ru", "Rh",
    "Pd", "Ag", "Cd", "In", "Sn", "Sb", "Te", "I",  "Xe", "Cs", "Ba", "La", "Ce", "Pr", "Nd",
    "Pm", "Sm", "Eu", "Gd", "Tb", "Dy", "Ho", "Er", "Tm", "Yb", "Lu", "Hf", "Ta", "W",  "Re",
    "Os", "Ir", "Pt", "Au", "Hg", "Tl", "Pb", "Bi", "Po", "At", "Rn", "Fr", "Ra", "Ac", "Th",
    "Pa", "U",  "Np", "Pu", "Am", "Cm", "Bk", "Cf", "Es", "Fm", "Md", "No", "Lr", "Rf", "Db",
    "Sg", "Bh", "Hs", "Mt", "Ds", "Rg", "Cn", "Nh", "Fl", "Mc", "Lv", "Ts", "Og"};

bool is_element(std::string_view symbol) {
  return std::find(kElements.begin(), kElements.end(), symbol) != kElements.end();
}

struct RingBond {
  std::size_t atom;
  std::optional<BondOrder> order;
  std::size_t position;
};

struct OpenBranch {
  std::size_t atom;
  std::size_t position;
};

class SmilesReader {
 public:
  explicit SmilesReader(std::string_view text) : text_(text) { mol_.source = std::string(text); }

  SmilesMolecule run() {
    while (pos_ < text_.size()) step();
    if (pending_) {
      throw Error(ErrorCode::kSyntaxError, "dangling bond at end of SMILES", 0, pending_pos_);
    }
    if (!branches_.empty()) {
      throw Error(ErrorCode::kUnbalancedBranch, "unclosed '('", 0, branches_.back().position);
    }
    if (!rings_.empty()) {
      const auto& [digit, ring] = *rings_.begin();
      throw Error(ErrorCode::kUnclosedRing, "ring closure " + std::to_string(digit) + " never closed",
                  0, ring.position);
    }
    if (mol_.atoms.empty()) throw Error(ErrorCode::kSyntaxError, "SMILES has no atoms");
    return std::move(mol_);
  }

 private:
  void step() {
    const char c = text_[pos_];
    switch (c) {
      case '(': open_branch(); return;
      case ')': close_branch(); return;
      case '-': set_bond(BondOrder::kSingle); return;
      case '=': set_bond(BondOrder::kDouble); return;
      case '#': set_bond(BondOrder::kTriple); return;
      case ':': set_bond(BondOrder::kAromatic); return;
      case '/':
      case '\\': set_bond(BondOrder::kSingle); return;
      case '.': dot(); return;
      case '%': ring_closure(); return;
      case '[': bracket_atom(); return;
      default: break;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      ring_closure();
      return;
    }
    organic_atom();
  }

  void open_branch() {
    if (!prev_) throw Error(ErrorCode::kUnbalancedBranch, "'(' without a preceding atom", 0, pos_);
    if (pending_) throw Error(ErrorCode::kSyntaxError, "bond before '('", 0, pending_pos_);
    branches_.push_back({*prev_, pos_});
    ++pos_;
    branch_just_opened_ = true;
  }

  void close_branch() {
    if (branches_.empty()) throw Error(ErrorCode::kUnbalancedBranch, "unmatched ')'", 0, pos_);
    if (pending_) throw Error(ErrorCode::kSyntaxError, "dangling bond before ')'", 0, pending_pos_);
    if (branch_just_opened_) throw Error(ErrorCode::kSyntaxError, "empty branch", 0, pos_);
    prev_ = branches_.back().atom;
    branches_.pop_back();
    ++pos_;
  }

  void set_bond(BondOrder order) {
    if (pending_) throw Error(ErrorCode::kSyntaxError, "two consecutive bond symbols", 0, pos_);
    if (!prev_) throw Error(ErrorCode::kSyntaxError, "bond without a preceding atom", 0, pos_);
    pending_ = order;
    pending_pos_ = pos_;
    ++pos_;
  }

  void dot() {
    if (pending_) throw Error(ErrorCode::kSyntaxError, "bond before '.'", 0, pending_pos_);
    if (!prev_ || !branches_.empty()) throw Error(ErrorCode::kSyntaxError, "misplaced '.'", 0, pos_);
    prev_.reset();
    ++pos_;
  }

  void ring_closure() {
    const std::size_t start = pos_;
    int digit = 0;
    if (text_[pos_] == '%') {
      if (pos_ + 2 >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])) ||
          !std::isdigit(static_cast<unsigned char>(text_[pos_ + 2]))) {
        throw Error(ErrorCode::kUnsupportedToken, "'%' needs two digits", 0, pos_);
      }
      digit = (text_[pos_ + 1] - '0') * 10 + (text_[pos_ + 2] - '0');
      pos_ += 3;
    } else {
      digit = text_[pos_] - '0';
      ++pos_;
    }
    if (!prev_) throw Error(ErrorCode::kSyntaxError, "ring closure without an atom", 0, start);

    auto it = rings_.find(digit);
    if (it == rings_.end()) {
      rings_.emplace(digit, RingBond{*prev_, pending_, start});
      pending_.reset();
      return;
    }
    const RingBond open = it->second;
    rings_.erase(it);
    std::optional<BondOrder> order = open.order;
    if (pending_) {
      if (order && *order != *pending_) {
        throw Error(ErrorCode::kSyntaxError, "conflicting ring-closure bond orders", 0, start);
      }
      order = pending_;
    }
    pending_.reset();
    if (open.atom == *prev_) {
      throw Error(ErrorCode::kSyntaxError, "ring closure bonds an atom to itself", 0, start);
    }
    add_bond(open.atom, *prev_, order, start);
  }

  void bracket_atom() {
    const std::size_t start = pos_;
    ++pos_;
    auto peek = [&]() -> char { return pos_ < text_.size() ? text_[pos_] : '\0'; };
    auto is_digit = [](char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; };
    auto is_upper = [](char c) { return std::isupper(static_cast<unsigned char>(c)) != 0; };
    auto is_lower = [](char c) { return std::islower(static_cast<unsigned char>(c)) != 0; };

    while (is_digit(peek())) ++pos_;  // isotope

    SmilesAtom atom;
    const char first = peek();
    if (is_upper(first)) {
      std::string two{first};
      if (pos_ + 1 < text_.size() && is_lower(text_[pos_ + 1])) {
        two.push_back(text_[pos_ + 1]);
      }
      if (two.size() == 2 && is_element(two)) {
        atom.symbol = two;
        pos_ += 2;
      } else if (is_element(std::string_view(&first, 1))) {
        atom.symbol = std::string(1, first);
        pos_ += 1;
      } else {
        throw Error(ErrorCode::kUnsupportedToken, "unknown element in bracket atom", 0, pos_);
      }
    } else if (is_lower(first)) {
      atom.aromatic = true;
      const std::string_view rest = text_.substr(pos_);
      if (rest.starts_with("se") || rest.starts_with("as") || rest.starts_with("te")) {
        atom.symbol = std::string(1, static_cast<char>(std::toupper(first))) + rest[1];
        pos_ += 2;
      } else if (std::string_view("bcnops").find(first) != std::string_view::npos) {
        atom.symbol = std::string(1, static_cast<char>(std::toupper(first)));
        pos_ += 1;
      } else {
        throw Error(ErrorCode::kUnsupportedToken, "unknown aromatic symbol in bracket atom", 0, pos_);
      }
    } else {
      throw Error(ErrorCode::kUnsupportedToken, "bracket atom needs an element symbol", 0, pos_);
    }

    if (peek() == '@') {
      ++pos_;
      if (peek() == '@') ++pos_;
      while (is_upper(peek()) && peek() != 'H') ++pos_;
      while (is_digit(peek())) ++pos_;
    }
    if (peek() == 'H') {
      ++pos_;
      while (is_digit(peek())) ++pos_;
    }
    if (peek() == '+' || peek() == '-') {
      const char sign = peek();
      ++pos_;
      if (is_digit(peek())) {
        while (is_digit(peek())) ++pos_;
      } else {
        while (peek() == sign) ++pos_;
      }
    }
    if (peek() == ':') {
      ++pos_;
      while (is_digit(peek())) ++pos_;
    }
    if (peek() != ']') {
      if (pos_ >= text_.size()) throw Error(ErrorCode::kSyntaxError, "unclosed '['", 0, start);
      throw Error(ErrorCode::kUnsupportedToken, "unexpected character in bracket atom", 0, pos_);
    }
    ++pos_;
    add_atom(std::move(atom));
  }

  void organic_atom() {
    const char c = text_[pos_];
    const char next = pos_ + 1 < text_.size() ? text_[pos_ + 1] : '\0';
    SmilesAtom atom;
    if (c == 'C' && next == 'l') {
      atom.symbol = "Cl";
      pos_ += 2;
    } else if (c == 'B' && next == 'r') {
      atom.symbol = "Br";
      pos_ += 2;
    } else if (std::string_view("BCNOPSFI").find(c) != std::string_view::npos) {
      atom.symbol = std::string(1, c);
      pos_ += 1;
    } else if (std::string_view("bcnops").find(c) != std::string_view::npos) {
      atom.symbol = std::string(1, static_cast<char>(std::toupper(c)));
      atom.aromatic = true;
      pos_ += 1;
    } else {
      throw Error(ErrorCode::kUnsupportedToken,
                  std::string("unsupported character '") + c + "'", 0, pos_);
    }
    add_atom(std::move(atom));
  }

  void add_atom(SmilesAtom atom) {
    const std::size_t index = mol_.atoms.size();
    mol_.atoms.push_back(std::move(atom));
    if (prev_) add_bond(*prev_, index, pending_, pending_pos_);
    pending_.reset();
    prev_ = index;
    branch_just_opened_ = false;
  }

  void add_bond(std::size_t a, std::size_t b, std::optional<BondOrder> order, std::size_t where) {
    const auto key = std::minmax(a, b);
    if (!bonded_.insert(key).second) {
      throw Error(ErrorCode::kSyntaxError, "duplicate bond between atoms " + std::to_string(a) +
                                               " and " + std::to_string(b), 0, where);
    }
    BondOrder resolved = BondOrder::kSingle;
    if (order) {
      resolved = *order;
    } else if (mol_.atoms[a].aromatic && mol_.atoms[b].aromatic) {
      resolved = BondOrder::kAromatic;
    }
    mol_.bonds.push_back(SmilesBond{a, b, resolved});
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  SmilesMolecule mol_;
  std::optional<std::size_t> prev_;
  std::optional<BondOrder> pending_;
  std::size_t pending_pos_ = 0;
  bool branch_just_opened_ = false;
  std::vector<OpenBranch> branches_;
  std::map<int, RingBond> rings_;
  std::set<std::pair<std::size_t, std::size_t>> bonded_;
};

}  // namespace

SmilesMolecule parse_smiles(std::string_view smiles) { return SmilesReader(smiles).run(); }

Graph to_graph(const SmilesMolecule& molecule, std::string id) {
  Graph::Spec spec;
  spec.id = std::move(id);
  spec.nodes.reserve(molecule.atoms.size());
  for (const auto& atom : molecule.atoms) {
    NodeRecord node;
    node.text = atom.aromatic ? std::string(1, static_cast<char>(std::tolower(atom.symbol[0]))) +
                                    atom.symbol.substr(1)
                              : atom.symbol;
    spec.nodes.push_back(std::move(node));
  }
  for (const auto& bond : molecule.bonds) spec.edges.push_back(Edge{bond.a, bond.b});
  spec.graph_text = molecule.source;
  return Graph::create(std::move(spec), std::max(kDefaultMaxNodes, molecule.atoms.size()));
}

std::size_t ring_count(const SmilesMolecule& molecule) {
  const std::size_t n = molecule.atoms.size();
  std::vector<std::size_t> parent(n);
  for (std::size_t i = 0; i < n; ++i) parent[i] = i;
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::size_t components = n;
  for (const auto& bond : molecule.bonds) {
    const std::size_t ra = find(bond.a);
    const std::size_t rb = find(bond.b);
    if (ra != rb) {
      parent[ra] = rb;
      --components;
    }
  }
  return molecule.bonds.size() + components - n;
}

}  // namespace sogtok
