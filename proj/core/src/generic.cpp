#include "striate/generic.hpp"

#include <algorithm>
#include <sstream>

namespace striate::generic {

using forcing::in_family;
using theory::TheoryKind;

// ---------------------------------------------------------------- window

Window default_window(const ColoredOrder& order) {
  Window w;
  for (int stage = 1; stage <= order.top_stage(); ++stage) {
    if (order.block_kind(stage) == orders::BlockKind::LeadD)
      w.points.push_back(order.block_min(stage));
    w.points.push_back(order.q_point(stage, Rat(-1, 3), Rat(0)));
    w.points.push_back(order.singleton(stage, Rat(0)));
    w.points.push_back(order.q_point(stage, Rat(1, 3), Rat(0)));
  }
  return w;
}

// ---------------------------------------------------------------- schedule

namespace {

template <typename T>
void seeded_shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i)
    std::swap(v[i - 1], v[rng.below(i)]);
}

}  // namespace

std::vector<DenseTag> enumerate_dense(const ColoredOrder& order, const PclSystem& oracle,
                                      const Window& window, int budget, std::uint64_t seed) {
  require(budget >= 0, Errc::usage, "budget must be nonnegative");
  Rng rng(seed);
  std::vector<Point> pts = window.points;
  std::sort(pts.begin(), pts.end());

  std::vector<DenseTag> round_a, round_b, round_c, round_d, round_e, round_f;

  for (const auto& t : pts) {
    if (order.is_min(t) && !oracle.has_empty_pcl_elements()) continue;
    if (!order.is_min(t) && !oracle.has_delta()) continue;
    round_a.push_back(DenseTag::surjective(t, 0));
    if (order.flagged(t)) round_a.push_back(DenseTag::surjective(t, 1));
  }

  // Henkin witnesses: equalities and function values over low leaders, plus
  // the fresh patterns; projections only target unflagged leaders so that
  // reach witnesses for flagged cut leaders stay available.
  for (std::size_t ti = 1; ti < pts.size(); ++ti) {
    const Point& t = pts[ti];
    if (order.is_min(t)) continue;
    const Point& lower = pts[ti - 1];
    if (order.is_min(lower) && !oracle.has_empty_pcl_elements()) continue;
    VarRef x0{lower, 0};
    switch (oracle.kind()) {
      case TheoryKind::Successor:
        round_b.push_back(DenseTag::henkin(Constraint::any_pcl0(), {}, t));
        round_b.push_back(DenseTag::henkin(Constraint::succ_of(0, 1), {x0}, t));
        round_b.push_back(DenseTag::henkin(Constraint::eq_var(0), {x0}, t));
        break;
      case TheoryKind::Fiber:
        round_b.push_back(DenseTag::henkin(Constraint::pi_of(0), {x0}, t));
        round_b.push_back(DenseTag::henkin(Constraint::eq_var(0), {x0}, t));
        round_b.push_back(DenseTag::henkin(Constraint::fresh_b(), {}, t));
        break;
      case TheoryKind::Pair:
        if (!order.flagged(lower)) {
          round_b.push_back(DenseTag::henkin(Constraint::lambda_of(0), {x0}, t));
          round_b.push_back(DenseTag::henkin(Constraint::rho_of(0), {x0}, t));
        }
        round_b.push_back(DenseTag::henkin(Constraint::fresh_delta(), {}, t));
        break;
    }
  }

  if (oracle.has_delta()) {
    Constraint fresh = oracle.delta();
    for (int copy = 0; copy < 3; ++copy)
      for (std::size_t ti = 0; ti < pts.size(); ti += 4)
        round_c.push_back(DenseTag::fullness(fresh, {}, pts[ti]));
  }

  for (const auto& t : pts)
    if (order.flagged(t) && !order.is_min(t)) round_d.push_back(DenseTag::level_d(t, 1));

  for (std::size_t ti = 1; ti < pts.size(); ++ti) {
    const Point& t = pts[ti];
    const Point& lower = pts[ti - 1];
    if (order.is_min(t) || order.is_min(lower)) continue;
    if (!oracle.has_delta()) continue;
    round_e.push_back(DenseTag::level_e(t, 0, {VarRef{lower, 0}}));
  }

  // reach tags last, ascending in t: each witness lands above everything the
  // earlier steps named below its cut
  if (oracle.supports_good_witness()) {
    for (const auto& t : pts) {
      if (!order.flagged(t) || !t.class_is_min) continue;  // cut leaders a_alpha
      std::optional<Point> s0, s1;
      for (const auto& s : pts) {
        if (!(order.class_of(s) < order.class_of(t))) continue;
        if (!order.flagged(s) && !order.is_min(s)) {
          if (!s0 || order.class_of(s) < order.class_of(*s0)) s0 = s;
        }
        if (!s1 || order.class_of(*s1) < order.class_of(s)) s1 = s;
      }
      if (!s0 || !s1) continue;
      if (!(order.class_of(*s0) < order.class_of(*s1))) continue;
      round_f.push_back(DenseTag::reach(t, *s0, *s1));
    }
  }

  seeded_shuffle(round_a, rng);
  seeded_shuffle(round_b, rng);
  seeded_shuffle(round_c, rng);
  seeded_shuffle(round_d, rng);
  seeded_shuffle(round_e, rng);
  // round_f stays ascending in t

  std::vector<DenseTag> all;
  for (auto* r : {&round_a, &round_b, &round_c, &round_d, &round_e})
    all.insert(all.end(), r->begin(), r->end());
  if (static_cast<int>(all.size() + round_f.size()) > budget) {
    all.resize(static_cast<std::size_t>(
        std::max(0, budget - static_cast<int>(round_f.size()))));
  }
  all.insert(all.end(), round_f.begin(), round_f.end());
  if (static_cast<int>(all.size()) > budget) all.resize(static_cast<std::size_t>(budget));
  return all;
}

// ---------------------------------------------------------------- filter

Filter build_generic(const ColoredOrder& order, const PclSystem& oracle, const Condition& base,
                     const std::vector<DenseTag>& tags) {
  forcing::validate_or_throw(order, base, oracle);
  Filter g;
  g.base = base;
  Condition cur = base;
  for (const auto& tag : tags) {
    Condition next = forcing::extend_into(order, cur, tag, oracle);
    require(forcing::leq(order, cur, next), Errc::internal, "chain not increasing");
    FilterStep step;
    step.tag = tag;
    step.condition = next;
    step.verified = in_family(order, next, tag, oracle);
    require(step.verified, Errc::internal, "family verification failed after extension");
    g.steps.push_back(std::move(step));
    cur = next;
  }
  return g;
}

// ---------------------------------------------------------------- slice

bool ModelSlice::named(const Point& t, int m) const { return top.has_var(t, m); }

int ModelSlice::class_of(const Point& t, int m) const {
  return rep_of_slot[static_cast<std::size_t>(top.slot_of(t, m))];
}

std::vector<int> ModelSlice::classes_in(const ColoredOrder& order, const Cut& j) const {
  std::vector<int> out;
  for (int rep : classes)
    if (order.contains(j, level_of.at(rep))) out.push_back(rep);
  return out;
}

std::vector<int> ModelSlice::slots_of_classes(const std::vector<int>& reps) const {
  std::vector<int> out;
  for (int slot = 0; slot < top.slot_count(); ++slot)
    if (std::find(reps.begin(), reps.end(), rep_of_slot[static_cast<std::size_t>(slot)]) !=
        reps.end())
      out.push_back(slot);
  return out;
}

ModelSlice assemble_condition(const ColoredOrder& order, const PclSystem& oracle,
                              const Condition& top) {
  (void)oracle;
  ModelSlice n;
  n.top = top;
  int slots = top.slot_count();
  n.rep_of_slot.resize(static_cast<std::size_t>(slots));
  for (int s = 0; s < slots; ++s) {
    n.rep_of_slot[static_cast<std::size_t>(s)] = top.payload.eq_rep(s);
    if (n.rep_of_slot[static_cast<std::size_t>(s)] == s) n.classes.push_back(s);
  }
  for (int rep : n.classes) {
    // level = the least point carrying a member variable; slots are ordered
    // point-major, so the representative (least) slot's point is the level
    n.level_of[rep] = top.var_at(rep).t;
    (void)order;
  }
  return n;
}

ModelSlice assemble(const ColoredOrder& order, const PclSystem& oracle, const Filter& g) {
  return assemble_condition(order, oracle, g.top());
}

// ---------------------------------------------------------------- checks

bool check_striation(const ColoredOrder& order, const PclSystem& oracle, const ModelSlice& n) {
  const Condition& p = n.top;
  if (!validate(order, p, oracle).ok) return false;
  for (std::size_t i = 0; i < p.points.size(); ++i) {
    const Point& t = p.points[i];
    bool at_min = order.is_min(t);
    std::vector<int> below = p.slots_below(order, t);
    std::vector<int> base = below;
    base.push_back(p.slot_of(t, 0));
    for (int m = 0; m < p.arities[i]; ++m) {
      int slot = p.slot_of(t, m);
      if (at_min && !p.payload.in_pcl_empty(slot)) return false;
      if (!at_min && m == 0 && p.payload.in_pcl(slot, below)) return false;
      if (!p.payload.in_pcl(slot, base)) return false;
    }
  }
  // the union covers the registry: every class has a level point
  for (int rep : n.classes)
    if (!n.level_of.count(rep)) return false;
  return true;
}

bool check_levels(const ColoredOrder& order, const ModelSlice& n) {
  (void)order;
  for (std::size_t i = 0; i < n.top.points.size(); ++i) {
    const Point& t = n.top.points[i];
    int rep = n.rep_of_slot[static_cast<std::size_t>(n.top.slot_of(t, 0))];
    if (!(n.level_of.at(rep) == t)) return false;
  }
  return true;
}

bool catches(const ColoredOrder& order, const PclSystem& oracle, const ModelSlice& n, int cls,
             const Cut& j) {
  (void)oracle;
  require(!order.contains(j, n.level_of.at(cls)), Errc::precondition,
          "the catcher must live outside the substructure");
  std::vector<int> nj_classes = n.classes_in(order, j);
  std::vector<int> nj_slots = n.slots_of_classes(nj_classes);
  std::vector<int> with_b = nj_slots;
  with_b.push_back(cls);
  for (int e : n.classes) {
    if (std::find(nj_classes.begin(), nj_classes.end(), e) != nj_classes.end()) continue;
    if (!n.top.payload.in_pcl(e, with_b)) continue;
    std::vector<int> with_e = nj_slots;
    with_e.push_back(e);
    if (!n.top.payload.in_pcl(cls, with_e)) return false;
  }
  return true;
}

namespace {

std::vector<ClassId> explored_ladder(const ColoredOrder& order, const ModelSlice& n,
                                     const Cut& j) {
  std::vector<ClassId> ladder;
  for (int rep : n.classes) {
    const Point& lvl = n.level_of.at(rep);
    if (!order.contains(j, lvl)) continue;
    ClassId c = order.class_of(lvl);
    if (std::find(ladder.begin(), ladder.end(), c) == ladder.end()) ladder.push_back(c);
  }
  std::sort(ladder.begin(), ladder.end());
  return ladder;
}

std::vector<int> classes_below_class(const ColoredOrder& order, const ModelSlice& n,
                                     const Cut& j, const std::optional<ClassId>& bound) {
  std::vector<int> out;
  for (int rep : n.classes) {
    const Point& lvl = n.level_of.at(rep);
    if (!order.contains(j, lvl)) continue;
    if (!bound) continue;  // nothing lies below the empty marker
    if (order.class_of(lvl) < *bound) out.push_back(rep);
  }
  return out;
}

}  // namespace

ReachProfile reach_profile(const ColoredOrder& order, const PclSystem& oracle,
                           const ModelSlice& n, int cls, const Cut& j) {
  (void)oracle;
  require(!order.contains(j, n.level_of.at(cls)), Errc::precondition,
          "reach profiles are asked of outside elements");
  ReachProfile out;
  std::vector<ClassId> ladder = explored_ladder(order, n, j);
  if (ladder.empty()) return out;
  out.horizon = ladder.back();
  std::vector<int> nj_classes = n.classes_in(order, j);

  auto pcl_with_b = [&](const std::optional<ClassId>& cut_cls) {
    std::vector<int> base = n.slots_of_classes(classes_below_class(order, n, j, cut_cls));
    base.push_back(cls);
    std::vector<int> reached;
    for (int e : nj_classes)
      if (n.top.payload.in_pcl(e, base)) reached.push_back(e);
    return reached;
  };

  // candidate s* values: below everything, then each ladder class
  std::vector<std::optional<ClassId>> starts;
  starts.push_back(std::nullopt);
  for (const auto& c : ladder) starts.push_back(c);

  for (const auto& sstar : starts) {
    std::vector<ClassId> above;
    for (const auto& s : ladder)
      if (!sstar || *sstar < s) above.push_back(s);
    if (above.empty()) continue;
    std::vector<int> reached = pcl_with_b(sstar);
    bool unbounded = true;
    for (const auto& s : above) {
      bool escaped = false;
      for (int e : reached)
        if (!(order.class_of(n.level_of.at(e)) < s)) escaped = true;
      if (!escaped) {
        unbounded = false;
        break;
      }
    }
    if (unbounded) {
      out.kind = ReachKind::UnboundedReach;
      out.witness = sstar ? *sstar : ladder.front();
      return out;
    }
  }

  for (const auto& sstar : starts) {
    std::vector<ClassId> above;
    for (const auto& s : ladder)
      if (!sstar || *sstar < s) above.push_back(s);
    if (above.empty()) continue;
    bool bounded = true;
    for (const auto& s : above) {
      std::vector<int> base = n.slots_of_classes(classes_below_class(order, n, j, s));
      base.push_back(cls);
      for (int e : nj_classes) {
        if (order.class_of(n.level_of.at(e)) < s) continue;  // already below the cut
        if (n.top.payload.in_pcl(e, base)) {
          bounded = false;
          break;
        }
      }
      if (!bounded) break;
    }
    if (bounded) {
      out.kind = ReachKind::BoundedEffect;
      out.witness = sstar ? *sstar : ladder.front();
      return out;
    }
  }
  return out;
}

bool check_full(const ColoredOrder& order, const PclSystem& oracle, const ModelSlice& n,
                const std::vector<std::pair<Constraint, std::vector<VarRef>>>& ctags,
                int bound) {
  (void)order;
  if (bound <= 0) return true;
  for (const auto& [phi, xbar] : ctags) {
    std::vector<int> xs;
    bool have = true;
    for (const auto& v : xbar) {
      if (!n.top.has_var(v.t, v.m)) {
        have = false;
        break;
      }
      xs.push_back(n.top.slot_of(v.t, v.m));
    }
    if (!have) return false;
    int count = 0;
    for (int rep : n.classes)
      if (oracle.says_phi(n.top.payload, rep, phi, xs)) ++count;
    if (count < bound) return false;
  }
  return true;
}

// ---------------------------------------------------------------- decode

DecodeResult decode_bits(const ColoredOrder& order, const PclSystem& oracle,
                         const ModelSlice& n) {
  require(n.top.order_id == order.id(), Errc::different_orders,
          "slice was forged over a different order");
  DecodeResult out;
  for (int alpha = 1; alpha <= order.n(); ++alpha) {
    Cut j = Cut::stage(alpha);
    orders::CutClass cc = classify_cut(order, j);
    BitEvidence ev;
    ev.alpha = alpha;
    if (cc.shape == orders::CutShape::MinSingleton && cc.min_point &&
        order.flagged(*cc.min_point)) {
      const Point& t = *cc.min_point;
      if (!n.named(t, 0)) {
        ev.detail = "cut leader " + t.str() + " unnamed";
        fail(Errc::inconclusive, "bit " + std::to_string(alpha) + " inconclusive: " + ev.detail);
      }
      int b = n.class_of(t, 0);
      bool c = catches(order, oracle, n, b, j);
      ReachProfile rp = reach_profile(order, oracle, n, b, j);
      if (c && rp.kind == ReachKind::UnboundedReach) {
        ev.bit = 1;
        ev.detail = "leader " + t.str() + " catches, unbounded reach up to " +
                    (rp.horizon ? rp.horizon->str() : "-");
      } else {
        ev.detail = std::string("leader evidence failed: catches=") + (c ? "1" : "0") +
                    " reach=" + std::to_string(static_cast<int>(rp.kind));
        fail(Errc::inconclusive, "bit " + std::to_string(alpha) + " inconclusive: " + ev.detail);
      }
    } else {
      int checked = 0;
      for (int b : n.classes) {
        if (order.contains(j, n.level_of.at(b))) continue;
        if (!catches(order, oracle, n, b, j)) continue;
        ReachProfile rp = reach_profile(order, oracle, n, b, j);
        ++checked;
        if (rp.kind != ReachKind::BoundedEffect) {
          ev.detail = "catcher at level " + n.level_of.at(b).str() + " lacks bounded effect";
          fail(Errc::inconclusive,
               "bit " + std::to_string(alpha) + " inconclusive: " + ev.detail);
        }
      }
      ev.bit = 0;
      ev.detail = "seamless; " + std::to_string(checked) + " catchers bounded";
    }
    out.bits.push_back(ev.bit);
    out.evidence.push_back(ev);
  }
  return out;
}

bool automorphism_transport_check(const ColoredOrder& order, const PclSystem& oracle,
                                  const ModelSlice& n, const Cut& j) {
  orders::CutClass cc = classify_cut(order, j);
  require(cc.shape == orders::CutShape::Seamless && cc.suitable, Errc::not_seamless,
          "transport checks run across seamless cuts");
  // w: a fresh point of J strictly above the named part of J
  std::optional<ClassId> lo;
  for (const auto& t : n.top.points) {
    if (!order.contains(j, t)) continue;
    ClassId c = order.class_of(t);
    if (!lo || *lo < c) lo = c;
  }
  require(j.kind == Cut::Kind::Stage, Errc::precondition, "stage cuts expected");
  ClassId boundary{j.alpha + 1, false, Rat(1, 3)};
  Point w = order.fresh_leader(lo, boundary, false, n.top.points);
  require(order.contains(j, w), Errc::internal, "probe point escaped the segment");
  orders::AutomorphismCert cert =
      orders::seamless_automorphism(order, j, n.top.points, w);
  if (order.contains(j, orders::apply_automorphism(order, cert, w))) return false;
  Condition moved = forcing::act(order, cert, n.top);
  if (!(moved == n.top)) return false;  // the condition's points are fixed
  // re-assemble and compare the pcl traces across the cut
  ModelSlice again = assemble_condition(order, oracle, moved);
  for (int b : n.classes) {
    if (order.contains(j, n.level_of.at(b))) continue;
    bool c1 = catches(order, oracle, n, b, j);
    bool c2 = catches(order, oracle, again, b, j);
    if (c1 != c2) return false;
    if (!c1) continue;
    ReachProfile r1 = reach_profile(order, oracle, n, b, j);
    ReachProfile r2 = reach_profile(order, oracle, again, b, j);
    if (r1.kind != r2.kind) return false;
  }
  return true;
}

// ---------------------------------------------------------------- text

std::vector<std::string> slice_to_text(const ColoredOrder& order, const PclSystem& oracle,
                                       const ModelSlice& n) {
  std::vector<std::string> out;
  out.push_back("slice theory=" + oracle.name() + " seed=" + std::to_string(n.seed) +
                " budget=" + std::to_string(n.budget));
  out.push_back(order.header());
  out.push_back(n.top.record());
  for (int rep : n.classes) {
    forcing::VarRef v = n.top.var_at(rep);
    std::string line = "class rep=" + v.str() + " level=" + n.level_of.at(rep).str() + " vars=";
    bool first = true;
    for (int slot = 0; slot < n.top.slot_count(); ++slot) {
      if (n.rep_of_slot[static_cast<std::size_t>(slot)] != rep) continue;
      if (!first) line += ',';
      line += n.top.var_at(slot).str();
      first = false;
    }
    out.push_back(line);
  }
  return out;
}

LoadedSlice slice_from_text(const std::vector<std::string>& lines) {
  require(lines.size() >= 3, Errc::usage, "truncated slice file");
  require(lines[0].rfind("slice ", 0) == 0, Errc::usage, "not a slice file");
  std::istringstream head(lines[0]);
  std::string word, theory;
  std::uint64_t seed = 0;
  int budget = 0;
  while (head >> word) {
    if (word.rfind("theory=", 0) == 0) theory = word.substr(7);
    if (word.rfind("seed=", 0) == 0) seed = std::stoull(word.substr(5));
    if (word.rfind("budget=", 0) == 0) budget = std::stoi(word.substr(7));
  }
  TheoryKind kind = theory::theory_from_name(theory);
  ColoredOrder order = ColoredOrder::from_header(lines[1]);
  PclSystem oracle(kind);
  Condition top = Condition::parse(order, kind, lines[2]);
  ModelSlice n = assemble_condition(order, oracle, top);
  n.seed = seed;
  n.budget = budget;
  // registry lines, if present, must agree with the reassembly
  std::size_t expected = 0;
  for (std::size_t i = 3; i < lines.size(); ++i) {
    if (lines[i].rfind("class ", 0) != 0) continue;
    ++expected;
  }
  require(expected == 0 || expected == n.classes.size(), Errc::usage,
          "slice registry does not match its condition");
  return LoadedSlice{kind, order, std::move(n)};
}

std::vector<std::string> filter_log(const ColoredOrder& order, const Filter& g) {
  (void)order;
  std::vector<std::string> out;
  out.push_back("step=0 tag=base ok=1 " + g.base.record());
  for (std::size_t i = 0; i < g.steps.size(); ++i) {
    out.push_back("step=" + std::to_string(i + 1) + " tag=" + g.steps[i].tag.str() +
                  " ok=" + (g.steps[i].verified ? "1" : "0") + " " +
                  g.steps[i].condition.record());
  }
  return out;
}

}  // namespace striate::generic
