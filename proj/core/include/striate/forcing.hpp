#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "striate/orders.hpp"
#include "striate/theory.hpp"

namespace striate::forcing {

using orders::AutomorphismCert;
using orders::ColoredOrder;
using orders::Cut;
using orders::Point;
using theory::Configuration;
using theory::Constraint;
using theory::Element;
using theory::PclSystem;
using theory::Workspace;

struct VarRef {
  Point t;
  int m = 0;
  bool operator==(const VarRef& o) const { return t == o.t && m == o.m; }
  std::string str() const { return t.str() + "#" + std::to_string(m); }
};

// A forcing condition: finite index set u_p with arities, and a complete
// type over the induced variables x_{t,m}, t in u_p, m < n_t. Slots of the
// payload run through the variables in (point, index) order.
struct Condition {
  std::uint32_t order_id = 0;
  std::vector<Point> points;   // sorted, distinct
  std::vector<int> arities;    // parallel to points, each >= 1
  Configuration payload;

  static Condition empty(const ColoredOrder& order, theory::TheoryKind kind);

  int slot_count() const;
  int point_index(const Point& t) const;               // -1 when absent
  int arity_of(const Point& t) const;                  // 0 when absent
  bool has_var(const Point& t, int m) const;
  int slot_of(const Point& t, int m) const;            // throws when absent
  VarRef var_at(int slot) const;
  std::vector<int> slots_below(const ColoredOrder& order, const Point& t) const;
  std::vector<int> slots_in(const ColoredOrder& order, const Cut& j) const;

  bool operator==(const Condition& o) const;
  std::string record() const;                          // one-line text form
  static Condition parse(const ColoredOrder& order, theory::TheoryKind kind,
                         const std::string& line);
};

struct Validity {
  bool ok = true;
  int clause = 0;      // first failing clause 1..6, 0 when ok
  std::string detail;
};

Validity validate(const ColoredOrder& order, const Condition& p, const PclSystem& oracle);
void validate_or_throw(const ColoredOrder& order, const Condition& p, const PclSystem& oracle);

bool leq(const ColoredOrder& order, const Condition& p, const Condition& q);  // p <= q

Condition restrict_to(const ColoredOrder& order, const Condition& p, const Cut& j);

Condition act(const ColoredOrder& order, const AutomorphismCert& cert, const Condition& p);

// Realize the payload with one submodel level per point of u_p.
std::vector<Element> realize_condition(const ColoredOrder& order, const Condition& p,
                                       const PclSystem& oracle, Workspace& w);

// Nested elementary-submodel chain M_0 <= ... <= M_{d-1} witnessing that the
// leaders enter one level at a time. Carriers untouched by the realization
// belong to every level.
struct SubmodelChain {
  theory::TheoryKind kind = theory::TheoryKind::Successor;
  int depth = 0;
  std::map<long long, int> fiber_intro, l_intro, r_intro;

  bool contains(const Element& e, int level) const;
};

SubmodelChain chain_decompose(const ColoredOrder& order, const Condition& p,
                              const PclSystem& oracle, const Workspace& w,
                              const std::vector<Element>& realization);

// Common extension of p and q when p|J <= q and u_q lies inside J.
Condition amalgamate(const ColoredOrder& order, const Condition& p, const Condition& q,
                     const Cut& j, const PclSystem& oracle);

// Variant with realizations supplied in a shared workspace; returns the
// joint realization as well.
std::pair<Condition, std::vector<Element>> amalgamate_realized(
    const ColoredOrder& order, const PclSystem& oracle, Workspace& w, const Condition& p,
    const std::vector<Element>& bp, const Condition& q, const std::vector<Element>& bq,
    const Cut& j);

// Common extension of a Delta-system pair.
Condition compatible_witness(const ColoredOrder& order, const Condition& pi,
                             const Condition& pj, const PclSystem& oracle);

// ----------------------------------------------------------- dense families

struct DenseTag {
  enum class Family { A, B, C, D, E, F };
  Family family = Family::A;
  Point t;
  int n = 0;                      // A, D, E
  Constraint phi;                 // B, C
  std::vector<VarRef> xbar;       // B, C, E
  Point s0, s1;                   // F

  static DenseTag surjective(const Point& t, int n);
  static DenseTag henkin(const Constraint& phi, std::vector<VarRef> xbar, const Point& t);
  static DenseTag fullness(const Constraint& phi, std::vector<VarRef> xbar, const Point& t);
  static DenseTag level_d(const Point& t, int n);
  static DenseTag level_e(const Point& t, int n, std::vector<VarRef> xbar);
  static DenseTag reach(const Point& t, const Point& s0, const Point& s1);

  std::string str() const;
};

bool in_family(const ColoredOrder& order, const Condition& p, const DenseTag& tag,
               const PclSystem& oracle);

Condition extend_surjective(const ColoredOrder& order, const Condition& p, const Point& t,
                            int n, const PclSystem& oracle);
Condition extend_henkin(const ColoredOrder& order, const Condition& p, const Constraint& phi,
                        const std::vector<VarRef>& xbar, const Point& t,
                        const PclSystem& oracle);
Condition extend_fullness(const ColoredOrder& order, const Condition& p, const Constraint& phi,
                          const std::vector<VarRef>& xbar, const Point& t,
                          const PclSystem& oracle);
Condition extend_level_d(const ColoredOrder& order, const Condition& p, const Point& t, int n,
                         const PclSystem& oracle);
Condition extend_level_e(const ColoredOrder& order, const Condition& p, const Point& t, int n,
                         const std::vector<VarRef>& xbar, const PclSystem& oracle);
Condition extend_reach(const ColoredOrder& order, const Condition& p, const Point& t,
                       const Point& s0, const Point& s1, const PclSystem& oracle);

Condition extend_into(const ColoredOrder& order, const Condition& p, const DenseTag& tag,
                      const PclSystem& oracle);

}  // namespace striate::forcing
