#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "striate/common.hpp"
#include "striate/rat.hpp"

namespace striate::orders {

// Points of an order in I*. Addressing is (stage, class coordinate, within
// coordinate). Stage 0 is the one-point minimum block; stages 1..n+1 are the
// appended blocks of the construction. Within a block the class skeleton is
// Q: dyadic coordinates are P-singleton classes, other coordinates are
// Q-classes without the flag. A D-block additionally has a leading P-flagged
// singleton below its whole skeleton (class coordinate "min").
struct Point {
  std::uint32_t order_id = 0;
  std::int32_t stage = 0;
  bool class_is_min = true;   // leading singleton of the block (or min(I) at stage 0)
  Rat class_coord{0};         // skeleton position, when !class_is_min
  bool within_is_unit = true; // singleton classes
  Rat within{0};

  bool operator==(const Point& o) const;
  bool operator!=(const Point& o) const { return !(*this == o); }
  bool operator<(const Point& o) const;  // structural order, stage-major

  std::string str() const;                       // "stage:cls:within"
  static Point parse(const std::string& s, std::uint32_t order_id);
};

struct ClassId {
  std::int32_t stage = 0;
  bool is_min = true;
  Rat coord{0};

  bool operator==(const ClassId& o) const;
  bool operator<(const ClassId& o) const;
  std::string str() const;
};

enum class BlockKind { MinBlock, PlainC, LeadD };

// An initial-segment descriptor. Stage(alpha) is J_alpha of the
// construction; the point forms are the cuts used by condition restriction.
struct Cut {
  enum class Kind { Empty, Stage, Before, AtMost, BeforeClass, AtMostClass, All };
  Kind kind = Kind::Empty;
  int alpha = 0;
  Point p;

  static Cut empty() { return {}; }
  static Cut stage(int alpha);
  static Cut before(const Point& p);
  static Cut at_most(const Point& p);
  static Cut before_class(const Point& p);
  static Cut at_most_class(const Point& p);
  static Cut all();

  bool operator==(const Cut& o) const;
  std::string str() const;
};

enum class CutShape { MinSingleton, Seamless, MinInfiniteClass };

struct CutClass {
  CutShape shape;
  bool suitable = false;
  std::optional<Point> min_point;  // the singleton minimum, when shape is MinSingleton
};

class ColoredOrder {
 public:
  // Builds I^S for S a subset of {1..n}; rejects 0 in S.
  ColoredOrder(int n, std::set<int> s_bits);

  int n() const { return n_; }
  const std::set<int>& bits() const { return s_; }
  std::uint32_t id() const { return id_; }
  int top_stage() const { return n_ + 1; }
  BlockKind block_kind(int stage) const;

  Point min_point() const;
  Point block_min(int stage) const;                    // leading point of a D-block
  Point q_point(int stage, const Rat& cls, const Rat& within) const;
  Point singleton(int stage, const Rat& dyadic_cls) const;

  bool valid(const Point& p) const;
  void check_mine(const Point& p) const;               // throws different_orders

  int compare(const Point& a, const Point& b) const;   // -1 / 0 / 1
  bool equivalent(const Point& a, const Point& b) const;  // E
  bool flagged(const Point& p) const;                  // P
  bool is_min(const Point& p) const;
  bool singleton_class(const Point& p) const;
  ClassId class_of(const Point& p) const;
  int compare_class(const ClassId& a, const ClassId& b) const;
  bool class_flagged(const ClassId& c) const;
  Point class_rep(const ClassId& c) const;             // canonical representative

  bool contains(const Cut& j, const Point& p) const;
  bool cut_proper(const Cut& j) const;                 // a proper subset of I
  bool class_in_cut(const Cut& j, const ClassId& c) const;

  // Least unused fresh class strictly between the given class bounds (either
  // side may be absent), of the requested color; `avoid` lists class
  // coordinates already in use. The result is a new singleton (P) or a fresh
  // Q-class leader point with within-coordinate 0.
  Point fresh_leader(const std::optional<ClassId>& lo, const std::optional<ClassId>& hi,
                     bool want_flagged, const std::vector<Point>& avoid) const;

  // Fresh point inside the (infinite) class of `cls_rep`, strictly above
  // `above` when given.
  Point fresh_in_class(const Point& cls_rep, const std::optional<Rat>& above,
                       const std::vector<Point>& avoid) const;

  std::string header() const;                          // "order n=<n> S=<a,b,...>"
  static ColoredOrder from_header(const std::string& line);

 private:
  int n_;
  std::set<int> s_;
  std::uint32_t id_;
};

CutClass classify_cut(const ColoredOrder& order, const Cut& j);

// Finite certificate for an automorphism built by back-and-forth across a
// seamless cut: identity outside the window K, quotient map extended lazily
// and memoized, within-class maps extended by exact piecewise-linear
// interpolation. Queries mutate only the shared memo; answers are
// deterministic for a fixed query history.
struct BnfMemo;

struct AutomorphismCert {
  std::uint32_t order_id = 0;
  Cut window;                       // K
  Cut cut;                          // J
  std::vector<Point> fixed;         // pointwise-fixed finite set
  Point moved;                      // w
  Point inner, outer;               // t in J, t' outside J, both singletons
  std::shared_ptr<BnfMemo> memo;
  bool inverted = false;
  bool identity = false;

  static AutomorphismCert make_identity(const ColoredOrder& order);
};

AutomorphismCert seamless_automorphism(const ColoredOrder& order, const Cut& j,
                                       const std::vector<Point>& fixed, const Point& w);
Point apply_automorphism(const ColoredOrder& order, const AutomorphismCert& cert,
                         const Point& p);
AutomorphismCert invert(const AutomorphismCert& cert);

}  // namespace striate::orders
