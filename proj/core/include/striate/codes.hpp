#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "striate/common.hpp"

namespace striate::codes {

// A code is a finite rooted tree: leaves are naturals, internal nodes are
// tuples. Formula codes are tagged by their first component:
//   <<0,n,m>, v...>  atomic relation R^n_m applied to variables
//   <1,i>            variable v_i
//   <2,a,b>          equality of variables
//   <3,a,b>          binary conjunction
//   <4,<1,i>,a>      existential
//   <5,a>            negation
//   <6,tmpl,excs>    countable conjunction given by a finite schema
// Inside a tag-6 schema template the subtree <7,k> marks an index slot:
// instance i replaces it by the leaf i+k.
struct Code {
  bool leaf = true;
  std::uint64_t value = 0;
  std::vector<Code> kids;

  static Code nat(std::uint64_t v) { return Code{true, v, {}}; }
  static Code node(std::vector<Code> kids) { return Code{false, 0, std::move(kids)}; }

  bool operator==(const Code& o) const;
  bool operator!=(const Code& o) const { return !(*this == o); }
};

std::string code_to_string(const Code& c);          // "((0 2 3) (1 0) (1 1))"
Code code_from_string(const std::string& s);        // throws malformed_code
std::size_t code_depth(const Code& c);

// Formula ASTs. Variables double as (the only) terms of the relational
// vocabulary; decode(<1,i>) yields a bare Var node.
struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

// Finite presentation of f_psi for countable conjunctions: a template code
// with <7,k> slots plus finitely many per-index overrides.
struct Schema {
  Code tmpl;
  std::vector<std::pair<std::uint64_t, Code>> exceptions;  // sorted by index

  Code instance(std::uint64_t i) const;
  bool operator==(const Schema& o) const;
};

struct Formula {
  enum class Kind { Var, Atom, Eq, And, Exists, Not, BigAnd };
  Kind kind;
  std::uint32_t n = 0, m = 0;        // Atom arity/index; Var/Eq/Exists use m (and n for Eq rhs)
  std::vector<std::uint32_t> vars;   // Atom argument variable indices
  FormulaPtr left, right;
  std::optional<Schema> schema;

  static FormulaPtr var(std::uint32_t i);
  static FormulaPtr atom(std::uint32_t n, std::uint32_t m, std::vector<std::uint32_t> vars);
  static FormulaPtr eq(std::uint32_t lhs, std::uint32_t rhs);
  static FormulaPtr conj(FormulaPtr a, FormulaPtr b);
  static FormulaPtr exists(std::uint32_t v, FormulaPtr body);
  static FormulaPtr neg(FormulaPtr a);
  static FormulaPtr big_and(Schema s);
};

bool formula_equal(const FormulaPtr& a, const FormulaPtr& b);
std::string formula_to_string(const FormulaPtr& f);

// A countable fragment, presented by vocabulary caps and a constructor depth
// bound. Closed under subformulas by construction.
struct Fragment {
  std::uint32_t max_arity = 2;
  std::uint32_t max_rel_index = 1;
  std::uint32_t max_var = 2;          // variables v_0 .. v_max_var
  std::size_t depth_bound = 4;        // tree depth of codes
  std::size_t schema_instances = 8;   // tag-6 evaluation bound
  bool allow_schema = true;

  static Fragment from_seeds(const std::vector<FormulaPtr>& seeds, std::size_t depth_bound);

  bool contains(const Code& c) const;

  // Streams every fragment formula of code depth <= depth_bound in a fixed
  // order (schemas excluded; they are enumerated separately in tests).
  std::vector<FormulaPtr> enumerate(std::size_t max_count) const;
};

Code encode(const FormulaPtr& f);                       // rejects out-of-vocabulary ASTs
FormulaPtr decode(const Code& c, const Fragment& f);    // malformed_code / out_of_fragment

// Finite relational structure together with the assignment g of basic codes
// to relation tables; g(<>) is the universe 0..universe-1.
struct StructureTable {
  int universe = 0;
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::set<std::vector<int>>> rel;

  void set(std::uint32_t n, std::uint32_t m, std::set<std::vector<int>> tuples);
};

using Assignment = std::map<std::uint32_t, int>;  // variable index -> element

// Satisfaction, computed directly on the code (the AST-based evaluator in the
// verify suite is the independent cross-check). Tag-6 conjunctions evaluate
// schema instances 0..schema_instances-1.
bool evaluate(const Code& c, const StructureTable& s, const Assignment& assign,
              std::size_t schema_instances = 8);

}  // namespace striate::codes
