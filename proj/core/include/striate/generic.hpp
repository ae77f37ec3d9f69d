#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "striate/forcing.hpp"

namespace striate::generic {

using forcing::Condition;
using forcing::DenseTag;
using forcing::VarRef;
using orders::ClassId;
using orders::ColoredOrder;
using orders::Cut;
using orders::Point;
using theory::Constraint;
using theory::PclSystem;

// A finite-budget stand-in for a generic filter: an increasing chain of
// conditions together with the dense families met along the way.
struct FilterStep {
  DenseTag tag;
  Condition condition;
  bool verified = false;  // family membership re-checked after the step
};

struct Filter {
  Condition base;
  std::vector<FilterStep> steps;

  const Condition& top() const { return steps.empty() ? base : steps.back().condition; }
};

// The finite point window a schedule quantifies over.
struct Window {
  std::vector<Point> points;
};

// Named classes per stage: a leading singleton where the block has one, a
// flagged singleton, and two unflagged classes to anchor reach parameters.
Window default_window(const ColoredOrder& order);

std::vector<DenseTag> enumerate_dense(const ColoredOrder& order, const PclSystem& oracle,
                                      const Window& window, int budget, std::uint64_t seed);

Filter build_generic(const ColoredOrder& order, const PclSystem& oracle, const Condition& base,
                     const std::vector<DenseTag>& tags);

// The assembled quotient: equivalence classes of variables under the
// payload-asserted equalities, with the level map.
struct ModelSlice {
  Condition top;
  std::vector<int> rep_of_slot;        // slot -> representative slot
  std::vector<int> classes;            // representative slots, ascending
  std::map<int, Point> level_of;       // representative slot -> level point
  std::uint64_t seed = 0;
  int budget = 0;

  bool named(const Point& t, int m) const;
  int class_of(const Point& t, int m) const;     // representative slot
  std::vector<int> classes_in(const ColoredOrder& order, const Cut& j) const;
  std::vector<int> slots_of_classes(const std::vector<int>& reps) const;
};

ModelSlice assemble(const ColoredOrder& order, const PclSystem& oracle, const Filter& g);
ModelSlice assemble_condition(const ColoredOrder& order, const PclSystem& oracle,
                              const Condition& top);  // for controls and decode

bool check_striation(const ColoredOrder& order, const PclSystem& oracle, const ModelSlice& n);
bool check_levels(const ColoredOrder& order, const ModelSlice& n);  // [x_{t,0}] on level t

bool catches(const ColoredOrder& order, const PclSystem& oracle, const ModelSlice& n, int cls,
             const Cut& j);

enum class ReachKind { UnboundedReach, BoundedEffect, Neither };

struct ReachProfile {
  ReachKind kind = ReachKind::Neither;
  std::optional<ClassId> witness;   // the s* certifying the answer
  std::optional<ClassId> horizon;   // top of the explored ladder
};

ReachProfile reach_profile(const ColoredOrder& order, const PclSystem& oracle,
                           const ModelSlice& n, int cls, const Cut& j);

// Fullness at finite scale: every scheduled fullness constraint has at least
// `bound` distinct named realizations.
bool check_full(const ColoredOrder& order, const PclSystem& oracle, const ModelSlice& n,
                const std::vector<std::pair<Constraint, std::vector<VarRef>>>& ctags, int bound);

struct BitEvidence {
  int alpha = 0;
  int bit = -1;               // 0, 1, or -1 for inconclusive
  std::string detail;
};

struct DecodeResult {
  std::vector<int> bits;      // index 0 <-> alpha = 1
  std::vector<BitEvidence> evidence;
};

// Reads S back off the slice: a 1 needs the complement of J_alpha to start
// with a flagged singleton whose leader catches and has unbounded reach; a 0
// needs every explored catcher to have bounded effect. Inconclusive bits
// raise instead of guessing.
DecodeResult decode_bits(const ColoredOrder& order, const PclSystem& oracle,
                         const ModelSlice& n);

// Transport check standing in for the forcing-theoretic bounded-effect
// argument: an automorphism across the seamless cut fixing the condition's
// points transports the catching evidence.
bool automorphism_transport_check(const ColoredOrder& order, const PclSystem& oracle,
                                  const ModelSlice& n, const Cut& j);

std::vector<std::string> slice_to_text(const ColoredOrder& order, const PclSystem& oracle,
                                       const ModelSlice& n);

struct LoadedSlice {
  theory::TheoryKind kind;
  ColoredOrder order;
  ModelSlice slice;
};
LoadedSlice slice_from_text(const std::vector<std::string>& lines);

std::vector<std::string> filter_log(const ColoredOrder& order, const Filter& g);

}  // namespace striate::generic
