#include "striate/forcing.hpp"

#include <algorithm>
#include <sstream>

namespace striate::forcing {

using theory::Sort;
using theory::TheoryKind;

// ---------------------------------------------------------------- condition

Condition Condition::empty(const ColoredOrder& order, TheoryKind kind) {
  Condition c;
  c.order_id = order.id();
  c.payload = Configuration::empty(kind);
  return c;
}

int Condition::slot_count() const {
  int n = 0;
  for (int a : arities) n += a;
  return n;
}

int Condition::point_index(const Point& t) const {
  for (std::size_t i = 0; i < points.size(); ++i)
    if (points[i] == t) return static_cast<int>(i);
  return -1;
}

int Condition::arity_of(const Point& t) const {
  int i = point_index(t);
  return i < 0 ? 0 : arities[static_cast<std::size_t>(i)];
}

bool Condition::has_var(const Point& t, int m) const { return m < arity_of(t); }

int Condition::slot_of(const Point& t, int m) const {
  int i = point_index(t);
  require(i >= 0 && m < arities[static_cast<std::size_t>(i)], Errc::precondition,
          "variable " + t.str() + "#" + std::to_string(m) + " absent");
  int slot = 0;
  for (int j = 0; j < i; ++j) slot += arities[static_cast<std::size_t>(j)];
  return slot + m;
}

VarRef Condition::var_at(int slot) const {
  int acc = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (slot < acc + arities[i]) return VarRef{points[i], slot - acc};
    acc += arities[i];
  }
  fail(Errc::precondition, "slot out of range");
}

std::vector<int> Condition::slots_below(const ColoredOrder& order, const Point& t) const {
  std::vector<int> out;
  int acc = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (order.compare(points[i], t) < 0)
      for (int m = 0; m < arities[i]; ++m) out.push_back(acc + m);
    acc += arities[i];
  }
  return out;
}

std::vector<int> Condition::slots_in(const ColoredOrder& order, const Cut& j) const {
  std::vector<int> out;
  int acc = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (order.contains(j, points[i]))
      for (int m = 0; m < arities[i]; ++m) out.push_back(acc + m);
    acc += arities[i];
  }
  return out;
}

bool Condition::operator==(const Condition& o) const {
  return order_id == o.order_id && points == o.points && arities == o.arities &&
         payload == o.payload;
}

std::string Condition::record() const {
  std::string out = "cond u=";
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (i) out += ';';
    out += points[i].str();
  }
  if (points.empty()) out += "-";
  out += " n=";
  for (std::size_t i = 0; i < arities.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(arities[i]);
  }
  if (arities.empty()) out += "-";
  out += " type=";
  auto lines = payload.edge_lines();
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i) out += '|';
    out += lines[i];
  }
  if (lines.empty()) out += "-";
  return out;
}

Condition Condition::parse(const ColoredOrder& order, TheoryKind kind, const std::string& line) {
  require(line.rfind("cond ", 0) == 0, Errc::usage, "not a condition record");
  auto grab = [&](const std::string& key) {
    auto pos = line.find(" " + key + "=");
    require(pos != std::string::npos, Errc::usage, "condition record missing " + key);
    auto start = pos + key.size() + 2;
    auto end = line.find(' ', start);
    return line.substr(start, end == std::string::npos ? std::string::npos : end - start);
  };
  Condition c;
  c.order_id = order.id();
  std::string u = grab("u");
  if (u != "-") {
    std::istringstream in(u);
    std::string item;
    while (std::getline(in, item, ';')) c.points.push_back(Point::parse(item, order.id()));
  }
  std::string n = grab("n");
  if (n != "-") {
    std::istringstream in(n);
    std::string item;
    while (std::getline(in, item, ',')) c.arities.push_back(std::stoi(item));
  }
  // type= runs to the end of the line
  auto tpos = line.find(" type=");
  require(tpos != std::string::npos, Errc::usage, "condition record missing type");
  std::string edges = line.substr(tpos + 6);
  std::vector<std::string> lines;
  if (edges != "-") {
    std::istringstream in(edges);
    std::string item;
    while (std::getline(in, item, '|')) lines.push_back(item);
  }
  c.payload = Configuration::parse(kind, lines);
  require(static_cast<int>(c.points.size()) == static_cast<int>(c.arities.size()),
          Errc::usage, "point/arity mismatch");
  require(c.slot_count() == c.payload.size(), Errc::usage, "arity/payload mismatch");
  return c;
}

// ---------------------------------------------------------------- validate

namespace {

std::vector<int> all_slots(const Condition& p) {
  std::vector<int> out(static_cast<std::size_t>(p.slot_count()));
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<int>(i);
  return out;
}

}  // namespace

Validity validate(const ColoredOrder& order, const Condition& p, const PclSystem& oracle) {
  // clause 1: a canonical complete type over properly indexed variables
  if (p.order_id != order.id()) return {false, 1, "condition for a different order"};
  if (p.points.size() != p.arities.size()) return {false, 1, "point/arity mismatch"};
  for (std::size_t i = 0; i < p.points.size(); ++i) {
    if (!order.valid(p.points[i])) return {false, 1, "bad point " + p.points[i].str()};
    if (p.arities[i] < 1) return {false, 1, "arity below one"};
    if (i + 1 < p.points.size() && !(p.points[i] < p.points[i + 1]))
      return {false, 1, "points out of order"};
  }
  if (p.slot_count() != p.payload.size()) return {false, 1, "payload size mismatch"};
  if (p.payload.theory != oracle.kind()) return {false, 1, "payload theory mismatch"};
  if (!p.payload.well_formed()) return {false, 1, "payload not canonical"};

  // clause 2: flagged points carry delta at index 0
  for (std::size_t i = 0; i < p.points.size(); ++i) {
    if (!order.flagged(p.points[i])) continue;
    if (!oracle.has_delta()) return {false, 2, "theory has no delta for flagged points"};
    int slot = p.slot_of(p.points[i], 0);
    if (!oracle.says_phi(p.payload, slot, oracle.delta(), {}))
      return {false, 2, "leader at " + p.points[i].str() + " does not satisfy delta"};
  }

  // clauses 3 and 4: membership in pcl(empty) happens exactly at the minimum
  for (std::size_t i = 0; i < p.points.size(); ++i) {
    bool at_min = order.is_min(p.points[i]);
    for (int m = 0; m < p.arities[i]; ++m) {
      int slot = p.slot_of(p.points[i], m);
      bool in0 = p.payload.in_pcl_empty(slot);
      if (at_min && !in0) return {false, 3, "minimum-level variable outside pcl(empty)"};
      if (!at_min && m == 0 && in0)
        return {false, 4, "leader at " + p.points[i].str() + " inside pcl(empty)"};
    }
  }

  // clause 5: each non-minimum leader is independent from everything below
  for (std::size_t i = 0; i < p.points.size(); ++i) {
    if (order.is_min(p.points[i])) continue;
    int slot = p.slot_of(p.points[i], 0);
    if (p.payload.in_pcl(slot, p.slots_below(order, p.points[i])))
      return {false, 5, "leader at " + p.points[i].str() + " depends on lower levels"};
  }

  // clause 6: every variable is closed over its level's leader and below
  for (std::size_t i = 0; i < p.points.size(); ++i) {
    std::vector<int> base = p.slots_below(order, p.points[i]);
    base.push_back(p.slot_of(p.points[i], 0));
    for (int m = 0; m < p.arities[i]; ++m) {
      int slot = p.slot_of(p.points[i], m);
      if (!p.payload.in_pcl(slot, base))
        return {false, 6, "variable " + p.points[i].str() + "#" + std::to_string(m) +
                              " escapes its level"};
    }
  }
  return {};
}

void validate_or_throw(const ColoredOrder& order, const Condition& p, const PclSystem& oracle) {
  Validity v = validate(order, p, oracle);
  require(v.ok, Errc::internal,
          "invalid condition (clause " + std::to_string(v.clause) + "): " + v.detail);
}

// ---------------------------------------------------------------- order

bool leq(const ColoredOrder& order, const Condition& p, const Condition& q) {
  require(p.order_id == order.id() && q.order_id == order.id(), Errc::different_orders,
          "conditions from different orders");
  std::vector<int> keep;
  for (std::size_t i = 0; i < p.points.size(); ++i) {
    int qi = q.point_index(p.points[i]);
    if (qi < 0 || q.arities[static_cast<std::size_t>(qi)] < p.arities[i]) return false;
    for (int m = 0; m < p.arities[i]; ++m) keep.push_back(q.slot_of(p.points[i], m));
  }
  return q.payload.project(keep) == p.payload;
}

Condition restrict_to(const ColoredOrder& order, const Condition& p, const Cut& j) {
  Condition out;
  out.order_id = p.order_id;
  std::vector<int> keep;
  for (std::size_t i = 0; i < p.points.size(); ++i) {
    if (!order.contains(j, p.points[i])) continue;
    out.points.push_back(p.points[i]);
    out.arities.push_back(p.arities[i]);
    for (int m = 0; m < p.arities[i]; ++m) keep.push_back(p.slot_of(p.points[i], m));
  }
  out.payload = p.payload.project(keep);
  return out;
}

Condition act(const ColoredOrder& order, const AutomorphismCert& cert, const Condition& p) {
  Condition out = p;
  for (auto& t : out.points) t = apply_automorphism(order, cert, t);
  for (std::size_t i = 0; i + 1 < out.points.size(); ++i)
    require(out.points[i] < out.points[i + 1], Errc::internal,
            "automorphism broke the point order");
  return out;
}

// ---------------------------------------------------------------- realize

std::vector<Element> realize_condition(const ColoredOrder& order, const Condition& p,
                                       const PclSystem& oracle, Workspace& w) {
  (void)order;
  std::vector<int> levels(static_cast<std::size_t>(p.slot_count()));
  int acc = 0;
  for (std::size_t i = 0; i < p.points.size(); ++i) {
    for (int m = 0; m < p.arities[i]; ++m) levels[static_cast<std::size_t>(acc + m)] =
        static_cast<int>(i);
    acc += p.arities[i];
  }
  return oracle.realize(p.payload, w, levels);
}

bool SubmodelChain::contains(const Element& e, int level) const {
  auto intro = [&](const std::map<long long, int>& m, long long id) {
    auto it = m.find(id);
    return it == m.end() ? 0 : it->second;
  };
  switch (kind) {
    case TheoryKind::Successor: return true;
    case TheoryKind::Fiber: return intro(fiber_intro, e.a) <= level;
    case TheoryKind::Pair:
      if (e.sort == Sort::L) return intro(l_intro, e.a) <= level;
      if (e.sort == Sort::R) return intro(r_intro, e.a) <= level;
      return intro(l_intro, e.a) <= level && intro(r_intro, e.b) <= level;
  }
  return false;
}

SubmodelChain chain_decompose(const ColoredOrder& order, const Condition& p,
                              const PclSystem& oracle, const Workspace& w,
                              const std::vector<Element>& realization) {
  (void)order;
  require(static_cast<int>(realization.size()) == p.slot_count(), Errc::not_realization,
          "realization length mismatch");
  require(oracle.complete_type_of(realization, w) == p.payload, Errc::not_realization,
          "tuple does not realize the condition");
  SubmodelChain chain;
  chain.kind = oracle.kind();
  chain.depth = static_cast<int>(p.points.size());
  auto note = [](std::map<long long, int>& m, long long id, int level) {
    auto it = m.find(id);
    if (it == m.end() || it->second > level) m[id] = level;
  };
  int acc = 0;
  for (std::size_t i = 0; i < p.points.size(); ++i) {
    for (int m = 0; m < p.arities[i]; ++m) {
      const Element& e = realization[static_cast<std::size_t>(acc + m)];
      int lvl = static_cast<int>(i);
      switch (chain.kind) {
        case TheoryKind::Successor: break;
        case TheoryKind::Fiber: note(chain.fiber_intro, e.a, lvl); break;
        case TheoryKind::Pair:
          if (e.sort != Sort::R) note(chain.l_intro, e.a, lvl);
          if (e.sort == Sort::R) note(chain.r_intro, e.a, lvl);
          if (e.sort == Sort::C) note(chain.r_intro, e.b, lvl);
          break;
      }
    }
    acc += p.arities[i];
  }
  return chain;
}

// ---------------------------------------------------------------- amalgamate

namespace {

struct JointLayout {
  std::vector<Point> points;
  std::vector<int> arities;
};

JointLayout joint_vars(const ColoredOrder& order, const Condition& p, const Condition& q) {
  (void)order;
  JointLayout out;
  std::size_t i = 0, j = 0;
  while (i < p.points.size() || j < q.points.size()) {
    if (j >= q.points.size() || (i < p.points.size() && p.points[i] < q.points[j])) {
      out.points.push_back(p.points[i]);
      out.arities.push_back(p.arities[i]);
      ++i;
    } else if (i >= p.points.size() || q.points[j] < p.points[i]) {
      out.points.push_back(q.points[j]);
      out.arities.push_back(q.arities[j]);
      ++j;
    } else {
      out.points.push_back(p.points[i]);
      out.arities.push_back(std::max(p.arities[i], q.arities[j]));
      ++i;
      ++j;
    }
  }
  return out;
}

}  // namespace

std::pair<Condition, std::vector<Element>> amalgamate_realized(
    const ColoredOrder& order, const PclSystem& oracle, Workspace& w, const Condition& p,
    const std::vector<Element>& bp, const Condition& q, const std::vector<Element>& bq,
    const Cut& j) {
  for (const auto& t : q.points)
    require(order.contains(j, t), Errc::precondition, "u_q must lie inside the segment");
  require(leq(order, restrict_to(order, p, j), q), Errc::precondition,
          "restriction of p to the segment must extend into q");
  JointLayout layout = joint_vars(order, p, q);
  Condition r;
  r.order_id = p.order_id;
  r.points = layout.points;
  r.arities = layout.arities;
  std::vector<Element> joint;
  for (std::size_t i = 0; i < r.points.size(); ++i) {
    for (int m = 0; m < r.arities[i]; ++m) {
      const Point& t = r.points[i];
      bool in_p = p.has_var(t, m), in_q = q.has_var(t, m);
      require(in_p || in_q, Errc::internal, "joint variable untracked");
      Element e = in_p ? bp[static_cast<std::size_t>(p.slot_of(t, m))]
                       : bq[static_cast<std::size_t>(q.slot_of(t, m))];
      if (in_p && in_q)
        require(e == bq[static_cast<std::size_t>(q.slot_of(t, m))], Errc::not_realization,
                "shared variables realized differently");
      joint.push_back(e);
    }
  }
  r.payload = oracle.complete_type_of(joint, w);
  validate_or_throw(order, r, oracle);
  return {r, joint};
}

Condition amalgamate(const ColoredOrder& order, const Condition& p, const Condition& q,
                     const Cut& j, const PclSystem& oracle) {
  if (p.points.empty()) {
    validate_or_throw(order, q, oracle);
    return q;
  }
  for (const auto& t : q.points)
    require(order.contains(j, t), Errc::precondition, "u_q must lie inside the segment");
  Condition pj = restrict_to(order, p, j);
  require(leq(order, pj, q), Errc::precondition,
          "restriction of p to the segment must extend into q");
  Workspace w(oracle.kind());
  std::vector<Element> bp = realize_condition(order, p, oracle, w);
  // least level containing the shared realization
  int shared = 0;
  for (std::size_t i = 0; i < p.points.size(); ++i)
    if (order.contains(j, p.points[i])) shared = static_cast<int>(i);
  std::map<int, Element> placed;
  for (std::size_t i = 0; i < pj.points.size(); ++i)
    for (int m = 0; m < pj.arities[i]; ++m)
      placed[q.slot_of(pj.points[i], m)] = bp[static_cast<std::size_t>(p.slot_of(pj.points[i], m))];
  std::vector<int> levels(static_cast<std::size_t>(q.slot_count()), shared);
  std::vector<Element> bq = oracle.realize(q.payload, w, levels, placed);
  return amalgamate_realized(order, oracle, w, p, bp, q, bq, j).first;
}

Condition compatible_witness(const ColoredOrder& order, const Condition& pi,
                             const Condition& pj, const PclSystem& oracle) {
  // Delta-system layout checks
  std::vector<Point> stem;
  for (const auto& t : pi.points)
    if (pj.point_index(t) >= 0) stem.push_back(t);
  std::vector<int> keep_i, keep_j;
  for (const auto& t : stem) {
    require(pi.arity_of(t) == pj.arity_of(t), Errc::precondition,
            "stem arities differ at " + t.str());
    for (int m = 0; m < pi.arity_of(t); ++m) {
      keep_i.push_back(pi.slot_of(t, m));
      keep_j.push_back(pj.slot_of(t, m));
    }
  }
  require(pi.payload.project(keep_i) == pj.payload.project(keep_j), Errc::precondition,
          "stem types differ");
  auto is_stem = [&](const Point& t) {
    return std::find(stem.begin(), stem.end(), t) != stem.end();
  };
  std::optional<Point> tail_i_max, tail_j_min;
  for (const auto& t : pi.points)
    if (!is_stem(t) && (!tail_i_max || *tail_i_max < t)) tail_i_max = t;
  for (const auto& t : pj.points)
    if (!is_stem(t) && (!tail_j_min || t < *tail_j_min)) tail_j_min = t;
  for (const auto& s : stem) {
    for (const auto& t : pi.points)
      require(is_stem(t) || s < t, Errc::precondition, "stem must precede both tails");
    for (const auto& t : pj.points)
      require(is_stem(t) || s < t, Errc::precondition, "stem must precede both tails");
  }
  if (tail_i_max && tail_j_min)
    require(*tail_i_max < *tail_j_min, Errc::precondition,
            "the first tail must precede the second");

  if (pi.points.empty()) return pj;
  Point top = pi.points.back();
  Cut j = Cut::at_most(top);
  // pj restricted to the segment is exactly the stem, which extends into pi
  return amalgamate(order, pj, pi, j, oracle);
}

// ---------------------------------------------------------------- var edits

namespace {

struct VarInsert {
  Condition cond;   // with the new variable, payload slot copied from a source slot
  int pos = 0;
};

// Insert variable (t,m) whose payload data duplicates `src_slot`.
VarInsert insert_var_copy(const ColoredOrder& order, const Condition& p, const Point& t, int m,
                          int src_slot) {
  int idx = p.point_index(t);
  require(idx >= 0 ? m == p.arities[static_cast<std::size_t>(idx)] : m == 0, Errc::precondition,
          "variables extend one index at a time");
  VarInsert out;
  out.cond.order_id = p.order_id;
  out.cond.points = p.points;
  out.cond.arities = p.arities;
  if (idx < 0) {
    auto at = std::lower_bound(out.cond.points.begin(), out.cond.points.end(), t);
    std::size_t where = static_cast<std::size_t>(at - out.cond.points.begin());
    out.cond.points.insert(at, t);
    out.cond.arities.insert(out.cond.arities.begin() + static_cast<std::ptrdiff_t>(where), 1);
    idx = static_cast<int>(where);
  } else {
    out.cond.arities[static_cast<std::size_t>(idx)] += 1;
  }
  int pos = 0;
  for (int i = 0; i < idx; ++i) pos += out.cond.arities[static_cast<std::size_t>(i)];
  pos += m;
  std::vector<int> keep;
  for (int s = 0; s < pos; ++s) keep.push_back(s);
  keep.push_back(src_slot);
  for (int s = pos; s < p.slot_count(); ++s) keep.push_back(s);
  out.cond.payload = p.payload.project(keep);
  out.pos = pos;
  return out;
}

// Insert variable (t,m) bound to a fresh concrete element: realizes p, adjoins
// the element, and re-types.
Condition insert_var_element(const ColoredOrder& order, const Condition& p, const Point& t, int m,
                             const PclSystem& oracle, Workspace& w,
                             const std::vector<Element>& bp, const Element& e) {
  int idx = p.point_index(t);
  require(idx >= 0 ? m == p.arities[static_cast<std::size_t>(idx)] : m == 0, Errc::precondition,
          "variables extend one index at a time");
  Condition out;
  out.order_id = p.order_id;
  out.points = p.points;
  out.arities = p.arities;
  if (idx < 0) {
    auto at = std::lower_bound(out.points.begin(), out.points.end(), t);
    std::size_t where = static_cast<std::size_t>(at - out.points.begin());
    out.points.insert(at, t);
    out.arities.insert(out.arities.begin() + static_cast<std::ptrdiff_t>(where), 1);
    idx = static_cast<int>(where);
  } else {
    out.arities[static_cast<std::size_t>(idx)] += 1;
  }
  int pos = 0;
  for (int i = 0; i < idx; ++i) pos += out.arities[static_cast<std::size_t>(i)];
  pos += m;
  std::vector<Element> joint = bp;
  joint.insert(joint.begin() + pos, e);
  out.payload = oracle.complete_type_of(joint, w);
  return out;
}

std::vector<Element> elements_at(const Condition& p, const std::vector<Element>& b,
                                 const std::vector<VarRef>& xbar) {
  std::vector<Element> out;
  for (const auto& v : xbar) out.push_back(b[static_cast<std::size_t>(p.slot_of(v.t, v.m))]);
  return out;
}

std::vector<int> slots_at(const Condition& p, const std::vector<VarRef>& xbar) {
  std::vector<int> out;
  for (const auto& v : xbar) out.push_back(p.slot_of(v.t, v.m));
  return out;
}

// type-level decision of "p proves there is a witness of phi over xbar"
bool type_level_exists(const PclSystem& oracle, const Condition& p, const Constraint& phi,
                       const std::vector<VarRef>& xbar) {
  switch (phi.kind) {
    case Constraint::Kind::EqVar:
      return phi.arg >= 0 && phi.arg < static_cast<int>(xbar.size());
    case Constraint::Kind::SuccOf: {
      if (phi.arg < 0 || phi.arg >= static_cast<int>(xbar.size())) return false;
      Sort s = p.payload.sorts[static_cast<std::size_t>(
          p.slot_of(xbar[static_cast<std::size_t>(phi.arg)].t,
                    xbar[static_cast<std::size_t>(phi.arg)].m))];
      return s == Sort::Int || s == Sort::A;
    }
    case Constraint::Kind::PiOf:
    case Constraint::Kind::LambdaOf:
    case Constraint::Kind::RhoOf: {
      if (phi.arg < 0 || phi.arg >= static_cast<int>(xbar.size())) return false;
      Sort s = p.payload.sorts[static_cast<std::size_t>(
          p.slot_of(xbar[static_cast<std::size_t>(phi.arg)].t,
                    xbar[static_cast<std::size_t>(phi.arg)].m))];
      if (phi.kind == Constraint::Kind::PiOf) return s == Sort::A;
      return s == Sort::C;
    }
    case Constraint::Kind::FreshB: return oracle.kind() == TheoryKind::Fiber;
    case Constraint::Kind::FreshDelta: return oracle.kind() == TheoryKind::Pair;
    case Constraint::Kind::FreshL:
    case Constraint::Kind::FreshR: return oracle.kind() == TheoryKind::Pair;
    case Constraint::Kind::AnyPcl0: return oracle.has_empty_pcl_elements();
  }
  return false;
}

std::vector<Point> avoid_points(const Condition& p, std::vector<Point> extra = {}) {
  std::vector<Point> out = p.points;
  out.insert(out.end(), extra.begin(), extra.end());
  return out;
}

}  // namespace

// ---------------------------------------------------------------- families

DenseTag DenseTag::surjective(const Point& t, int n) {
  DenseTag tag;
  tag.family = Family::A;
  tag.t = t;
  tag.n = n;
  return tag;
}
DenseTag DenseTag::henkin(const Constraint& phi, std::vector<VarRef> xbar, const Point& t) {
  DenseTag tag;
  tag.family = Family::B;
  tag.phi = phi;
  tag.xbar = std::move(xbar);
  tag.t = t;
  return tag;
}
DenseTag DenseTag::fullness(const Constraint& phi, std::vector<VarRef> xbar, const Point& t) {
  DenseTag tag;
  tag.family = Family::C;
  tag.phi = phi;
  tag.xbar = std::move(xbar);
  tag.t = t;
  return tag;
}
DenseTag DenseTag::level_d(const Point& t, int n) {
  DenseTag tag;
  tag.family = Family::D;
  tag.t = t;
  tag.n = n;
  return tag;
}
DenseTag DenseTag::level_e(const Point& t, int n, std::vector<VarRef> xbar) {
  DenseTag tag;
  tag.family = Family::E;
  tag.t = t;
  tag.n = n;
  tag.xbar = std::move(xbar);
  return tag;
}
DenseTag DenseTag::reach(const Point& t, const Point& s0, const Point& s1) {
  DenseTag tag;
  tag.family = Family::F;
  tag.t = t;
  tag.s0 = s0;
  tag.s1 = s1;
  return tag;
}

std::string DenseTag::str() const {
  switch (family) {
    case Family::A: return "A(" + t.str() + "," + std::to_string(n) + ")";
    case Family::B: return "B(" + phi.str() + "," + t.str() + ")";
    case Family::C: return "C(" + phi.str() + "," + t.str() + ")";
    case Family::D: return "D(" + t.str() + "," + std::to_string(n) + ")";
    case Family::E: return "E(" + t.str() + "," + std::to_string(n) + ")";
    case Family::F: return "F(" + t.str() + "," + s0.str() + "," + s1.str() + ")";
  }
  return "?";
}

bool in_family(const ColoredOrder& order, const Condition& p, const DenseTag& tag,
               const PclSystem& oracle) {
  switch (tag.family) {
    case DenseTag::Family::A: return p.has_var(tag.t, tag.n);
    case DenseTag::Family::B: {
      for (const auto& v : tag.xbar)
        if (!p.has_var(v.t, v.m)) return false;
      if (!type_level_exists(oracle, p, tag.phi, tag.xbar)) return true;  // proves no witness
      std::vector<int> xs = slots_at(p, tag.xbar);
      for (std::size_t i = 0; i < p.points.size(); ++i) {
        if (!(order.compare(p.points[i], tag.t) < 0)) continue;
        for (int m = 0; m < p.arities[i]; ++m)
          if (oracle.says_phi(p.payload, p.slot_of(p.points[i], m), tag.phi, xs)) return true;
      }
      return false;
    }
    case DenseTag::Family::C: {
      for (const auto& v : tag.xbar)
        if (!p.has_var(v.t, v.m)) return false;
      std::vector<int> xs = slots_at(p, tag.xbar);
      for (std::size_t i = 0; i < p.points.size(); ++i) {
        if (!(order.compare(tag.t, p.points[i]) < 0)) continue;
        if (oracle.says_phi(p.payload, p.slot_of(p.points[i], 0), tag.phi, xs)) return true;
      }
      return false;
    }
    case DenseTag::Family::D: {
      if (!p.has_var(tag.t, tag.n)) return false;
      int slot = p.slot_of(tag.t, tag.n);
      std::vector<int> base = p.slots_below(order, tag.t);
      base.push_back(slot);
      if (p.payload.in_pcl(p.slot_of(tag.t, 0), base)) return true;  // D1
      for (std::size_t i = 0; i < p.points.size(); ++i) {
        if (!(order.compare(p.points[i], tag.t) < 0)) continue;
        for (int m = 0; m < p.arities[i]; ++m)
          if (p.payload.equal_slots(slot, p.slot_of(p.points[i], m))) return true;  // D2
      }
      return false;
    }
    case DenseTag::Family::E: {
      if (!p.has_var(tag.t, tag.n)) return false;
      for (const auto& v : tag.xbar)
        if (!p.has_var(v.t, v.m)) return false;
      int slot = p.slot_of(tag.t, tag.n);
      if (!p.payload.in_pcl(slot, slots_at(p, tag.xbar))) return true;
      Point s = tag.xbar.front().t;
      for (const auto& v : tag.xbar)
        if (s < v.t) s = v.t;
      for (int m = 0; m < p.arity_of(s); ++m)
        if (p.payload.equal_slots(slot, p.slot_of(s, m))) return true;
      return false;
    }
    case DenseTag::Family::F: {
      if (!p.has_var(tag.t, 0)) return false;
      std::vector<int> base = p.slots_in(order, Cut::at_most_class(tag.s0));
      base.push_back(p.slot_of(tag.t, 0));
      for (std::size_t i = 0; i < p.points.size(); ++i) {
        const Point& s2 = p.points[i];
        if (!(tag.s1 < s2 && s2 < tag.t)) continue;
        if (p.payload.in_pcl(p.slot_of(s2, 0), base)) return true;
      }
      return false;
    }
  }
  return false;
}

// ---------------------------------------------------------------- extensions

Condition extend_surjective(const ColoredOrder& order, const Condition& p, const Point& t,
                            int n, const PclSystem& oracle) {
  order.check_mine(t);
  Condition cur = p;
  if (cur.point_index(t) < 0) {
    if (order.is_min(t)) {
      require(oracle.has_empty_pcl_elements(), Errc::precondition,
              "minimum level needs pcl(empty) elements");
      Workspace w(oracle.kind());
      std::vector<Element> bp = realize_condition(order, cur, oracle, w);
      Element a = w.int_at(0);
      cur = insert_var_element(order, cur, t, 0, oracle, w, bp, a);
    } else {
      require(oracle.has_delta(), Errc::precondition,
              "new levels need a designated non-pseudo-algebraic formula");
      Workspace w(oracle.kind());
      std::vector<Element> bp = realize_condition(order, cur, oracle, w);
      Element b = oracle.outside_witness(oracle.delta(), bp, bp, w);
      cur = insert_var_element(order, cur, t, 0, oracle, w, bp, b);
    }
  }
  while (cur.arity_of(t) <= n) {
    int m = cur.arity_of(t);
    cur = insert_var_copy(order, cur, t, m, cur.slot_of(t, m - 1)).cond;
  }
  validate_or_throw(order, cur, oracle);
  return cur;
}

Condition extend_henkin(const ColoredOrder& order, const Condition& p, const Constraint& phi,
                        const std::vector<VarRef>& xbar, const Point& t,
                        const PclSystem& oracle) {
  order.check_mine(t);
  require(!order.is_min(t), Errc::precondition, "witness levels live strictly below t");
  Condition cur = p;
  for (const auto& v : xbar) {
    require(order.compare(v.t, t) < 0, Errc::precondition, "parameters must lie below t");
    cur = extend_surjective(order, cur, v.t, v.m, oracle);
  }
  Cut below = Cut::before(t);
  Condition q = restrict_to(order, cur, below);
  Workspace w(oracle.kind());
  std::vector<Element> bq = realize_condition(order, q, oracle, w);
  std::vector<Element> xs = elements_at(q, bq, xbar);
  if (!oracle.exists_witness(phi, xs, w)) {
    validate_or_throw(order, cur, oracle);
    return cur;  // the complete type proves there is no witness
  }
  Element c = oracle.witness_for(phi, xs, w, static_cast<int>(q.points.size()));
  Condition r;
  if (oracle.pcl_member(c, {}, w)) {
    // witness inside pcl(empty): place it at the minimum
    Point mn = order.min_point();
    int m = q.arity_of(mn);
    r = insert_var_element(order, q, mn, m, oracle, w, bq, c);
  } else if (oracle.pcl_member(c, bq, w)) {
    // witness pseudo-algebraic over the realization: least dependent level
    std::optional<Point> tstar;
    for (const auto& s : q.points) {
      std::vector<int> upto = q.slots_in(order, Cut::at_most(s));
      std::vector<Element> seg;
      for (int slot : upto) seg.push_back(bq[static_cast<std::size_t>(slot)]);
      if (oracle.pcl_member(c, seg, w)) {
        tstar = s;
        break;
      }
    }
    require(tstar.has_value(), Errc::internal, "dependent witness with no dependent level");
    r = insert_var_element(order, q, *tstar, q.arity_of(*tstar), oracle, w, bq, c);
  } else {
    // free witness: fresh unflagged level between u_q and t
    std::optional<orders::ClassId> lo;
    if (!q.points.empty()) lo = order.class_of(q.points.back());
    Point sstar = order.fresh_leader(lo, order.class_of(t), false, avoid_points(cur, {t}));
    r = insert_var_element(order, q, sstar, 0, oracle, w, bq, c);
  }
  validate_or_throw(order, r, oracle);
  Condition out = amalgamate(order, cur, r, below, oracle);
  return out;
}

Condition extend_fullness(const ColoredOrder& order, const Condition& p, const Constraint& phi,
                          const std::vector<VarRef>& xbar, const Point& t,
                          const PclSystem& oracle) {
  order.check_mine(t);
  require(phi.fresh_kind(), Errc::precondition,
          "fullness extensions need a non-pseudo-algebraic constraint");
  require(!oracle.constraint_pseudo_algebraic(phi), Errc::precondition,
          "constraint is pseudo-algebraic");
  Condition cur = p;
  for (const auto& v : xbar) cur = extend_surjective(order, cur, v.t, v.m, oracle);
  Workspace w(oracle.kind());
  std::vector<Element> bp = realize_condition(order, cur, oracle, w);
  std::vector<Element> xs = elements_at(cur, bp, xbar);
  Element c = oracle.witness_for(phi, xs, w);  // a fresh carrier: proper atomic extension
  std::optional<orders::ClassId> lo = order.class_of(t);
  if (!cur.points.empty()) {
    orders::ClassId top = order.class_of(cur.points.back());
    if (*lo < top) lo = top;
  }
  Point s = order.fresh_leader(lo, std::nullopt, false, avoid_points(cur, {t}));
  Condition out = insert_var_element(order, cur, s, 0, oracle, w, bp, c);
  validate_or_throw(order, out, oracle);
  return out;
}

Condition extend_level_d(const ColoredOrder& order, const Condition& p, const Point& t, int n,
                         const PclSystem& oracle) {
  order.check_mine(t);
  require(!order.is_min(t), Errc::precondition, "level adjustment happens above the minimum");
  Condition cur = extend_surjective(order, p, t, n, oracle);
  int slot = cur.slot_of(t, n);
  // case 1: the leader depends on x_{t,n} over the lower part
  std::vector<int> base = cur.slots_below(order, t);
  base.push_back(slot);
  if (cur.payload.in_pcl(cur.slot_of(t, 0), base)) return cur;
  // case 2: x_{t,n} sits inside pcl(empty): identify at the minimum level
  if (cur.payload.in_pcl_empty(slot)) {
    Point mn = order.min_point();
    Condition out = insert_var_copy(order, cur, mn, cur.arity_of(mn), slot).cond;
    validate_or_throw(order, out, oracle);
    return out;
  }
  // case 3: dependent on a lower initial segment: identify at the least one
  for (const auto& s : cur.points) {
    if (!(order.compare(s, t) < 0)) continue;
    if (cur.payload.in_pcl(slot, cur.slots_in(order, Cut::at_most(s)))) {
      Condition out = insert_var_copy(order, cur, s, cur.arity_of(s), slot).cond;
      validate_or_throw(order, out, oracle);
      return out;
    }
  }
  // case 4: independent below t: give it a fresh unflagged level of its own
  std::optional<orders::ClassId> lo;
  for (const auto& s : cur.points)
    if (order.compare(s, t) < 0) {
      orders::ClassId c = order.class_of(s);
      if (!lo || *lo < c) lo = c;
    }
  Point sstar = order.fresh_leader(lo, order.class_of(t), false, avoid_points(cur));
  Condition out = insert_var_copy(order, cur, sstar, 0, slot).cond;
  validate_or_throw(order, out, oracle);
  return out;
}

Condition extend_level_e(const ColoredOrder& order, const Condition& p, const Point& t, int n,
                         const std::vector<VarRef>& xbar, const PclSystem& oracle) {
  order.check_mine(t);
  require(!xbar.empty(), Errc::precondition, "the parameter sequence is nonempty");
  Point s = xbar.front().t;
  for (const auto& v : xbar) {
    if (s < v.t) s = v.t;
    require(order.compare(v.t, t) < 0, Errc::precondition, "parameters must lie below t");
  }
  Condition cur = p;
  for (const auto& v : xbar) cur = extend_surjective(order, cur, v.t, v.m, oracle);
  cur = extend_surjective(order, cur, t, n, oracle);
  int slot = cur.slot_of(t, n);
  if (!cur.payload.in_pcl(slot, slots_at(cur, xbar))) return cur;
  Condition out = insert_var_copy(order, cur, s, cur.arity_of(s), slot).cond;
  validate_or_throw(order, out, oracle);
  return out;
}

Condition extend_reach(const ColoredOrder& order, const Condition& p, const Point& t,
                       const Point& s0, const Point& s1, const PclSystem& oracle) {
  require(oracle.supports_good_witness(), Errc::unsupported_family,
          "unbounded-reach extensions need an exchange-failure oracle");
  order.check_mine(t);
  order.check_mine(s0);
  order.check_mine(s1);
  require(order.flagged(t), Errc::precondition, "t must be flagged");
  require(!order.flagged(s0) && !order.is_min(s0), Errc::precondition,
          "s0 must be an unflagged non-minimum point");
  orders::ClassId c0 = order.class_of(s0), c1 = order.class_of(s1), ct = order.class_of(t);
  require(c0 < c1 && c1 < ct, Errc::precondition, "need s0/E < s1/E < t/E");

  DenseTag tag = DenseTag::reach(t, s0, s1);
  if (in_family(order, p, tag, oracle)) return p;
  Condition cur = extend_surjective(order, p, t, 0, oracle);
  if (in_family(order, cur, tag, oracle)) return cur;

  Cut seg0 = Cut::at_most_class(s0), seg1 = Cut::before(t), seg2 = Cut::at_most(t);
  Condition p0 = restrict_to(order, cur, seg0);
  Condition p1 = restrict_to(order, cur, seg1);
  Condition p2 = restrict_to(order, cur, seg2);
  Workspace w(oracle.kind());
  std::vector<Element> b2 = realize_condition(order, p2, oracle, w);
  std::vector<Element> abar;
  for (int slot : p2.slots_in(order, seg0)) abar.push_back(b2[static_cast<std::size_t>(slot)]);
  Element c_top = b2[static_cast<std::size_t>(p2.slot_of(t, 0))];

  auto candidates =
      oracle.good_witness_candidates(abar, c_top, w, static_cast<int>(p2.points.size()));
  require(!candidates.empty(), Errc::oracle_reject,
          "no exchange-failure witness for this condition");
  std::string last_error;
  for (const auto& gw : candidates) {
    try {
      // place the helpers inside the class of s0 (it has no last element)
      Condition q = p0;
      std::vector<Element> bq = abar;
      for (const auto& helper : gw.helpers) {
        std::optional<Rat> above;
        for (const auto& pt : q.points)
          if (order.equivalent(pt, s0) && (!above || *above < pt.within)) above = pt.within;
        Point sb = order.fresh_in_class(order.class_rep(order.class_of(s0)), above,
                                        avoid_points(q));
        q = insert_var_element(order, q, sb, 0, oracle, w, bq, helper);
        bq.insert(bq.begin() + q.slot_of(sb, 0), helper);
      }
      validate_or_throw(order, q, oracle);
      // up the tower: q1 over the part below t, q2 up to t
      std::vector<Element> b1;
      for (int slot : p2.slots_in(order, seg1)) b1.push_back(b2[static_cast<std::size_t>(slot)]);
      auto [q1, bq1] = amalgamate_realized(order, oracle, w, p1, b1, q, bq, seg0);
      auto [q2, bq2] = amalgamate_realized(order, oracle, w, p2, b2, q1, bq1, seg1);
      // a fresh unflagged level for e, above everything named below t
      orders::ClassId lo = c1;
      for (const auto& s : q1.points) {
        orders::ClassId c = order.class_of(s);
        if (lo < c) lo = c;
      }
      Point s2 = order.fresh_leader(lo, ct, false, avoid_points(q2, {t, s1}));
      Condition r = insert_var_element(order, q2, s2, 0, oracle, w, bq2, gw.e);
      validate_or_throw(order, r, oracle);
      require(in_family(order, r, tag, oracle), Errc::internal,
              "reach extension missed its family");
      Condition out = amalgamate(order, cur, r, seg2, oracle);
      require(in_family(order, out, tag, oracle), Errc::internal,
              "amalgamation lost the family witness");
      return out;
    } catch (const Error& err) {
      last_error = err.what();
    }
  }
  fail(Errc::oracle_reject, "no reach extension validates here: " + last_error);
}

Condition extend_into(const ColoredOrder& order, const Condition& p, const DenseTag& tag,
                      const PclSystem& oracle) {
  Condition out = [&] {
    switch (tag.family) {
      case DenseTag::Family::A: return extend_surjective(order, p, tag.t, tag.n, oracle);
      case DenseTag::Family::B: return extend_henkin(order, p, tag.phi, tag.xbar, tag.t, oracle);
      case DenseTag::Family::C:
        return extend_fullness(order, p, tag.phi, tag.xbar, tag.t, oracle);
      case DenseTag::Family::D: return extend_level_d(order, p, tag.t, tag.n, oracle);
      case DenseTag::Family::E: return extend_level_e(order, p, tag.t, tag.n, tag.xbar, oracle);
      case DenseTag::Family::F: return extend_reach(order, p, tag.t, tag.s0, tag.s1, oracle);
    }
    fail(Errc::internal, "unknown family");
  }();
  require(leq(order, p, out), Errc::internal, "extension does not extend its input");
  require(in_family(order, out, tag, oracle), Errc::internal,
          "extension missed its dense family: " + tag.str());
  return out;
}

}  // namespace striate::forcing
