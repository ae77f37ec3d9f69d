#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "striate/common.hpp"

namespace striate::theory {

// Three concrete pseudo-algebraic-closure systems drive the condition
// calculus:
//   Successor    (Z,S): one chain; pcl(X) is everything.
//   Fiber        {A,B,pi,S}: B-points with one Z-chain above each; naming a
//                point of a fiber closes the whole fiber, pcl(empty) = empty.
//   Pair         sorts L, R, C = LxR with projections lambda/rho and pairing
//                of named coordinates; the designated formula delta = "x in C"
//                is complete, not pseudo-algebraic, and fails exchange.
enum class TheoryKind { Successor, Fiber, Pair };

TheoryKind theory_from_name(const std::string& name);  // successor|fiber|pair
std::string theory_name(TheoryKind k);

enum class Sort : std::uint8_t { Int, A, B, L, R, C };
std::string sort_name(Sort s);

// A concrete element of a workspace (a finitely presented countable atomic
// model). Carriers are symbolic ids, never truncated.
struct Element {
  Sort sort = Sort::Int;
  long long a = 0, b = 0;
  // Int: a = value | A: a = fiber, b = offset | B: a = fiber
  // L: a = id | R: a = id | C: a = left id, b = right id

  bool operator==(const Element& o) const { return sort == o.sort && a == o.a && b == o.b; }
  bool operator!=(const Element& o) const { return !(*this == o); }
  bool operator<(const Element& o) const {
    if (sort != o.sort) return sort < o.sort;
    if (a != o.a) return a < o.a;
    return b < o.b;
  }
  std::string str() const;
};

// Growable countable atomic model fragment. Carriers are tagged with the
// submodel level that first contains them; M_i of a chain decomposition is
// "all carriers of level <= i".
class Workspace {
 public:
  explicit Workspace(TheoryKind kind) : kind_(kind) {}
  TheoryKind kind() const { return kind_; }

  static constexpr int kTopLevel = 1 << 20;

  Element int_at(long long v) const;
  Element fresh_fiber(int level = kTopLevel);          // returns the new fiber's B-point
  Element fiber_point(const Element& in_fiber, long long offset) const;  // A-point
  Element pi(const Element& a_point) const;
  Element succ(const Element& e, long long delta) const;
  Element fresh_l(int level = kTopLevel);
  Element fresh_r(int level = kTopLevel);
  Element fresh_pair(int level = kTopLevel);
  Element pair_of(const Element& l, const Element& r) const;
  Element lambda(const Element& c) const;
  Element rho(const Element& c) const;

  bool contains(const Element& e) const;               // carriers allocated here
  int carrier_level(const Element& e) const;           // max over the element's carriers
  std::size_t fiber_count() const { return fiber_levels_.size(); }
  std::size_t l_count() const { return l_levels_.size(); }
  std::size_t r_count() const { return r_levels_.size(); }

 private:
  TheoryKind kind_;
  std::vector<int> fiber_levels_, l_levels_, r_levels_;
};

// Canonical finite representative of a complete (principal) type: sorts,
// function edges and equality data over slots 0..size-1, with carriers
// renumbered by least touching slot and offsets anchored per group.
struct Configuration {
  TheoryKind theory = TheoryKind::Successor;
  std::vector<Sort> sorts;
  std::vector<long long> offs;  // successor: per slot; fiber: A-slots
  std::vector<int> grp;         // fiber groups (successor: all zero)
  std::vector<int> lg, rg;      // pair handle groups, -1 when n/a

  int size() const { return static_cast<int>(sorts.size()); }
  static Configuration empty(TheoryKind k);

  void canonicalize();          // renumber + anchor; throws on malformed data
  bool well_formed() const;

  bool equal_slots(int i, int j) const;
  int eq_rep(int slot) const;   // least slot equal to `slot`

  // Type-level pseudo-algebraic closure: does the complete type prove that
  // slot `target` lies in pcl of the slots in `base`?
  bool in_pcl(int target, const std::vector<int>& base) const;
  bool in_pcl_empty(int target) const;

  Configuration project(const std::vector<int>& keep) const;
  Configuration append_copy_of(int slot) const;  // adjoin a new slot equal to `slot`

  bool operator==(const Configuration& o) const;
  bool operator!=(const Configuration& o) const { return !(*this == o); }

  std::vector<std::string> edge_lines() const;   // sorted edge list
  static Configuration parse(TheoryKind k, const std::vector<std::string>& lines);
};

// One-variable constraints over a tuple: the formula language the condition
// calculus quantifies over. Fresh* kinds assert "y is not pseudo-algebraic
// over the tuple" (with fresh coordinates where the theory has them) and are
// the complete non-pseudo-algebraic patterns the extensions consume.
struct Constraint {
  enum class Kind {
    EqVar,      // y = x_i
    SuccOf,     // y = S^d(x_i)
    PiOf,       // y = pi(x_i)
    LambdaOf,   // y = lambda(x_i)
    RhoOf,      // y = rho(x_i)
    FreshB,     // y in B, fiber untouched by the tuple
    FreshDelta, // y in C, both coordinates untouched by the tuple
    FreshL,     // y in L, untouched
    FreshR,     // y in R, untouched
    AnyPcl0,    // y in pcl(empty) (successor only)
  };
  Kind kind = Kind::AnyPcl0;
  int arg = -1;
  long long d = 0;

  static Constraint eq_var(int i);
  static Constraint succ_of(int i, long long d);
  static Constraint pi_of(int i);
  static Constraint lambda_of(int i);
  static Constraint rho_of(int i);
  static Constraint fresh_b();
  static Constraint fresh_delta();
  static Constraint fresh_l();
  static Constraint fresh_r();
  static Constraint any_pcl0();

  bool fresh_kind() const;      // the "says y not in pcl(xbar)" constraints
  std::string str() const;
  bool operator==(const Constraint& o) const {
    return kind == o.kind && arg == o.arg && d == o.d;
  }
};

struct GoodWitness {
  std::vector<Element> helpers;  // bbar
  Element e;
};

// The theory oracle: complete-type calculus plus the pcl decision procedures.
class PclSystem {
 public:
  explicit PclSystem(TheoryKind kind) : kind_(kind) {}
  TheoryKind kind() const { return kind_; }
  std::string name() const { return theory_name(kind_); }

  bool supports_good_witness() const { return kind_ == TheoryKind::Pair; }
  bool has_empty_pcl_elements() const { return kind_ == TheoryKind::Successor; }
  bool has_delta() const { return kind_ != TheoryKind::Successor; }
  Constraint delta() const;  // fiber: FreshB, pair: FreshDelta

  Configuration complete_type_of(const std::vector<Element>& tuple, const Workspace& w) const;

  // Closed-form membership decision. Validated against brute_pcl.
  bool pcl_member(const Element& b, const std::vector<Element>& abar, const Workspace& w) const;

  // Independent oracle: enumerates every submodel-closed candidate of the
  // workspace completion containing abar and intersects.
  bool brute_pcl(const Element& b, const std::vector<Element>& abar, const Workspace& w,
                 int bound = 20) const;

  // A witness of phi over abar outside pcl(ebar); extends the workspace.
  Element outside_witness(const Constraint& phi, const std::vector<Element>& abar,
                          const std::vector<Element>& ebar, Workspace& w,
                          int level = Workspace::kTopLevel) const;

  // Exchange-failure witness (delta instances with coordinate-fresh type
  // only; verified before return, rejected otherwise).
  GoodWitness good_witness(const std::vector<Element>& abar, const Element& c, Workspace& w,
                           int level = Workspace::kTopLevel) const;
  std::vector<GoodWitness> good_witness_candidates(const std::vector<Element>& abar,
                                                   const Element& c, Workspace& w,
                                                   int level = Workspace::kTopLevel) const;
  bool verify_good_witness(const std::vector<Element>& abar, const Element& c,
                           const GoodWitness& gw, const Workspace& w) const;

  // Exhaustive bounded search for an exchange violation of phi over abar
  // (abar drawn from small_pool; the parameter supersets range over the pool).
  bool is_pseudo_minimal(const Constraint& phi, const std::vector<Element>& abar,
                         int bound) const;
  bool is_pseudo_minimal(const Constraint& phi, int bound) const {
    return is_pseudo_minimal(phi, {}, bound);
  }

  // Constraint calculus over realizations and configurations.
  bool exists_witness(const Constraint& phi, const std::vector<Element>& xbar,
                      const Workspace& w) const;
  Element witness_for(const Constraint& phi, const std::vector<Element>& xbar, Workspace& w,
                      int level = Workspace::kTopLevel) const;
  bool says_phi(const Configuration& c, int y_slot, const Constraint& phi,
                const std::vector<int>& xbar_slots) const;
  bool constraint_pseudo_algebraic(const Constraint& phi) const;

  // Realize a configuration, allocating carriers at the given per-slot
  // levels; `placed` pins already-realized slots (checked for consistency).
  std::vector<Element> realize(const Configuration& c, Workspace& w,
                               const std::vector<int>& slot_levels,
                               const std::map<int, Element>& placed = {}) const;

 private:
  TheoryKind kind_;
};

// Candidate pool for exhaustive searches (pseudo-minimality, acceptance).
std::vector<Element> small_pool(TheoryKind kind, int bound);

}  // namespace striate::theory
