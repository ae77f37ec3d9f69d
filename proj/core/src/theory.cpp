#include "striate/theory.hpp"

#include <algorithm>
#include <sstream>

namespace striate::theory {

TheoryKind theory_from_name(const std::string& name) {
  if (name == "successor") return TheoryKind::Successor;
  if (name == "fiber") return TheoryKind::Fiber;
  if (name == "pair") return TheoryKind::Pair;
  fail(Errc::usage, "unknown theory: " + name);
}

std::string theory_name(TheoryKind k) {
  switch (k) {
    case TheoryKind::Successor: return "successor";
    case TheoryKind::Fiber: return "fiber";
    case TheoryKind::Pair: return "pair";
  }
  return "?";
}

std::string sort_name(Sort s) {
  switch (s) {
    case Sort::Int: return "Z";
    case Sort::A: return "A";
    case Sort::B: return "B";
    case Sort::L: return "L";
    case Sort::R: return "R";
    case Sort::C: return "C";
  }
  return "?";
}

std::string Element::str() const {
  switch (sort) {
    case Sort::Int: return "z" + std::to_string(a);
    case Sort::A: return "a" + std::to_string(a) + "+" + std::to_string(b);
    case Sort::B: return "b" + std::to_string(a);
    case Sort::L: return "l" + std::to_string(a);
    case Sort::R: return "r" + std::to_string(a);
    case Sort::C: return "c" + std::to_string(a) + "," + std::to_string(b);
  }
  return "?";
}

// ---------------------------------------------------------------- workspace

Element Workspace::int_at(long long v) const {
  require(kind_ == TheoryKind::Successor, Errc::precondition, "integers live in (Z,S)");
  return Element{Sort::Int, v, 0};
}

Element Workspace::fresh_fiber(int level) {
  require(kind_ == TheoryKind::Fiber, Errc::precondition, "fibers live in the fiber theory");
  fiber_levels_.push_back(level);
  return Element{Sort::B, static_cast<long long>(fiber_levels_.size() - 1), 0};
}

Element Workspace::fiber_point(const Element& in_fiber, long long offset) const {
  require(kind_ == TheoryKind::Fiber, Errc::precondition, "fibers live in the fiber theory");
  require(in_fiber.sort == Sort::A || in_fiber.sort == Sort::B, Errc::precondition,
          "fiber_point expects a fiber element");
  long long base = in_fiber.sort == Sort::A ? in_fiber.b : 0;
  return Element{Sort::A, in_fiber.a, base + offset};
}

Element Workspace::pi(const Element& a_point) const {
  require(a_point.sort == Sort::A, Errc::precondition, "pi applies to A-points");
  return Element{Sort::B, a_point.a, 0};
}

Element Workspace::succ(const Element& e, long long delta) const {
  if (e.sort == Sort::Int) return Element{Sort::Int, e.a + delta, 0};
  require(e.sort == Sort::A, Errc::precondition, "S applies to A-points or integers");
  return Element{Sort::A, e.a, e.b + delta};
}

Element Workspace::fresh_l(int level) {
  require(kind_ == TheoryKind::Pair, Errc::precondition, "L-points live in the pair geometry");
  l_levels_.push_back(level);
  return Element{Sort::L, static_cast<long long>(l_levels_.size() - 1), 0};
}

Element Workspace::fresh_r(int level) {
  require(kind_ == TheoryKind::Pair, Errc::precondition, "R-points live in the pair geometry");
  r_levels_.push_back(level);
  return Element{Sort::R, static_cast<long long>(r_levels_.size() - 1), 0};
}

Element Workspace::fresh_pair(int level) {
  Element l = fresh_l(level);
  Element r = fresh_r(level);
  return Element{Sort::C, l.a, r.a};
}

Element Workspace::pair_of(const Element& l, const Element& r) const {
  require(l.sort == Sort::L && r.sort == Sort::R, Errc::precondition, "pair_of(L,R)");
  return Element{Sort::C, l.a, r.a};
}

Element Workspace::lambda(const Element& c) const {
  require(c.sort == Sort::C, Errc::precondition, "lambda applies to pairs");
  return Element{Sort::L, c.a, 0};
}

Element Workspace::rho(const Element& c) const {
  require(c.sort == Sort::C, Errc::precondition, "rho applies to pairs");
  return Element{Sort::R, c.b, 0};
}

bool Workspace::contains(const Element& e) const {
  switch (kind_) {
    case TheoryKind::Successor: return e.sort == Sort::Int;
    case TheoryKind::Fiber:
      if (e.sort != Sort::A && e.sort != Sort::B) return false;
      return e.a >= 0 && e.a < static_cast<long long>(fiber_levels_.size());
    case TheoryKind::Pair:
      switch (e.sort) {
        case Sort::L: return e.a >= 0 && e.a < static_cast<long long>(l_levels_.size());
        case Sort::R: return e.a >= 0 && e.a < static_cast<long long>(r_levels_.size());
        case Sort::C:
          return e.a >= 0 && e.a < static_cast<long long>(l_levels_.size()) && e.b >= 0 &&
                 e.b < static_cast<long long>(r_levels_.size());
        default: return false;
      }
  }
  return false;
}

int Workspace::carrier_level(const Element& e) const {
  require(contains(e), Errc::precondition, "element not in workspace");
  switch (kind_) {
    case TheoryKind::Successor: return 0;
    case TheoryKind::Fiber: return fiber_levels_[static_cast<std::size_t>(e.a)];
    case TheoryKind::Pair:
      if (e.sort == Sort::L) return l_levels_[static_cast<std::size_t>(e.a)];
      if (e.sort == Sort::R) return r_levels_[static_cast<std::size_t>(e.a)];
      return std::max(l_levels_[static_cast<std::size_t>(e.a)],
                      r_levels_[static_cast<std::size_t>(e.b)]);
  }
  return 0;
}

// ---------------------------------------------------------------- closures

namespace {

bool cl_member(TheoryKind kind, const Element& x, const std::vector<Element>& base) {
  switch (kind) {
    case TheoryKind::Successor: return true;
    case TheoryKind::Fiber: {
      for (const auto& a : base)
        if (a.a == x.a) return true;  // same fiber closes the whole fiber
      return false;
    }
    case TheoryKind::Pair: {
      std::set<long long> named_l, named_r;
      for (const auto& a : base) {
        if (a.sort == Sort::L) named_l.insert(a.a);
        if (a.sort == Sort::R) named_r.insert(a.a);
        if (a.sort == Sort::C) {
          named_l.insert(a.a);
          named_r.insert(a.b);
        }
      }
      if (x.sort == Sort::L) return named_l.count(x.a) > 0;
      if (x.sort == Sort::R) return named_r.count(x.a) > 0;
      return named_l.count(x.a) > 0 && named_r.count(x.b) > 0;
    }
  }
  return false;
}

}  // namespace

// ------------------------------------------------------------ configuration

Configuration Configuration::empty(TheoryKind k) {
  Configuration c;
  c.theory = k;
  return c;
}

void Configuration::canonicalize() {
  int n = size();
  require(static_cast<int>(offs.size()) == n && static_cast<int>(grp.size()) == n &&
              static_cast<int>(lg.size()) == n && static_cast<int>(rg.size()) == n,
          Errc::precondition, "configuration vectors out of step");
  switch (theory) {
    case TheoryKind::Successor: {
      for (auto s : sorts)
        require(s == Sort::Int, Errc::precondition, "successor slots are integers");
      if (n > 0) {
        long long base = offs[0];
        for (auto& o : offs) o -= base;
      }
      std::fill(grp.begin(), grp.end(), 0);
      std::fill(lg.begin(), lg.end(), -1);
      std::fill(rg.begin(), rg.end(), -1);
      break;
    }
    case TheoryKind::Fiber: {
      std::map<int, int> renum;
      for (int i = 0; i < n; ++i) {
        require(sorts[i] == Sort::A || sorts[i] == Sort::B, Errc::precondition,
                "fiber slots have sorts A or B");
        if (!renum.count(grp[i])) renum[grp[i]] = static_cast<int>(renum.size());
      }
      for (auto& g : grp) g = renum[g];
      // anchor offsets at the least A-slot of each group
      std::map<int, long long> base;
      for (int i = 0; i < n; ++i)
        if (sorts[i] == Sort::A && !base.count(grp[i])) base[grp[i]] = offs[i];
      for (int i = 0; i < n; ++i)
        offs[i] = sorts[i] == Sort::A ? offs[i] - base[grp[i]] : 0;
      std::fill(lg.begin(), lg.end(), -1);
      std::fill(rg.begin(), rg.end(), -1);
      break;
    }
    case TheoryKind::Pair: {
      std::map<int, int> lnum, rnum;
      for (int i = 0; i < n; ++i) {
        switch (sorts[i]) {
          case Sort::L:
            require(lg[i] >= 0, Errc::precondition, "L-slot without handle");
            rg[i] = -1;
            break;
          case Sort::R:
            require(rg[i] >= 0, Errc::precondition, "R-slot without handle");
            lg[i] = -1;
            break;
          case Sort::C:
            require(lg[i] >= 0 && rg[i] >= 0, Errc::precondition, "C-slot without handles");
            break;
          default: fail(Errc::precondition, "pair slots have sorts L, R or C");
        }
        if (lg[i] >= 0 && !lnum.count(lg[i])) lnum[lg[i]] = static_cast<int>(lnum.size());
        if (rg[i] >= 0 && !rnum.count(rg[i])) rnum[rg[i]] = static_cast<int>(rnum.size());
      }
      for (int i = 0; i < n; ++i) {
        if (lg[i] >= 0) lg[i] = lnum[lg[i]];
        if (rg[i] >= 0) rg[i] = rnum[rg[i]];
      }
      std::fill(offs.begin(), offs.end(), 0);
      std::fill(grp.begin(), grp.end(), 0);
      break;
    }
  }
}

bool Configuration::well_formed() const {
  Configuration copy = *this;
  try {
    copy.canonicalize();
  } catch (const Error&) {
    return false;
  }
  return copy == *this;
}

bool Configuration::equal_slots(int i, int j) const {
  if (sorts[i] != sorts[j]) return false;
  switch (theory) {
    case TheoryKind::Successor: return offs[i] == offs[j];
    case TheoryKind::Fiber:
      if (grp[i] != grp[j]) return false;
      return sorts[i] == Sort::B || offs[i] == offs[j];
    case TheoryKind::Pair:
      if (sorts[i] == Sort::L) return lg[i] == lg[j];
      if (sorts[i] == Sort::R) return rg[i] == rg[j];
      return lg[i] == lg[j] && rg[i] == rg[j];
  }
  return false;
}

int Configuration::eq_rep(int slot) const {
  for (int j = 0; j < slot; ++j)
    if (equal_slots(j, slot)) return j;
  return slot;
}

bool Configuration::in_pcl(int target, const std::vector<int>& base) const {
  switch (theory) {
    case TheoryKind::Successor: return true;
    case TheoryKind::Fiber: {
      for (int j : base)
        if (grp[j] == grp[target]) return true;
      return false;
    }
    case TheoryKind::Pair: {
      std::set<int> named_l, named_r;
      for (int j : base) {
        if (lg[j] >= 0) named_l.insert(lg[j]);
        if (rg[j] >= 0) named_r.insert(rg[j]);
      }
      if (sorts[target] == Sort::L) return named_l.count(lg[target]) > 0;
      if (sorts[target] == Sort::R) return named_r.count(rg[target]) > 0;
      return named_l.count(lg[target]) > 0 && named_r.count(rg[target]) > 0;
    }
  }
  return false;
}

bool Configuration::in_pcl_empty(int target) const { return in_pcl(target, {}); }

Configuration Configuration::project(const std::vector<int>& keep) const {
  Configuration out = Configuration::empty(theory);
  for (int i : keep) {
    require(i >= 0 && i < size(), Errc::precondition, "projection slot out of range");
    out.sorts.push_back(sorts[i]);
    out.offs.push_back(offs[i]);
    out.grp.push_back(grp[i]);
    out.lg.push_back(lg[i]);
    out.rg.push_back(rg[i]);
  }
  out.canonicalize();
  return out;
}

Configuration Configuration::append_copy_of(int slot) const {
  Configuration out = *this;
  out.sorts.push_back(sorts[slot]);
  out.offs.push_back(offs[slot]);
  out.grp.push_back(grp[slot]);
  out.lg.push_back(lg[slot]);
  out.rg.push_back(rg[slot]);
  out.canonicalize();
  return out;
}

bool Configuration::operator==(const Configuration& o) const {
  return theory == o.theory && sorts == o.sorts && offs == o.offs && grp == o.grp && lg == o.lg &&
         rg == o.rg;
}

std::vector<std::string> Configuration::edge_lines() const {
  std::vector<std::string> out;
  int n = size();
  for (int i = 0; i < n; ++i) out.push_back("sort " + std::to_string(i) + " " + sort_name(sorts[i]));
  switch (theory) {
    case TheoryKind::Successor:
      for (int i = 1; i < n; ++i)
        out.push_back("succ " + std::to_string(i) + " 0 " + std::to_string(offs[i]));
      break;
    case TheoryKind::Fiber: {
      std::map<int, int> anchor;
      for (int i = 0; i < n; ++i) {
        auto it = anchor.find(grp[i]);
        if (it == anchor.end()) {
          anchor[grp[i]] = i;
          continue;
        }
        int a = it->second;
        if (sorts[i] == Sort::A && sorts[a] == Sort::A) {
          out.push_back("succ " + std::to_string(i) + " " + std::to_string(a) + " " +
                        std::to_string(offs[i] - offs[a]));
        } else if (sorts[i] == Sort::A && sorts[a] == Sort::B) {
          out.push_back("pi " + std::to_string(i) + " " + std::to_string(a));
        } else if (sorts[i] == Sort::B && sorts[a] == Sort::A) {
          out.push_back("pi " + std::to_string(a) + " " + std::to_string(i));
        } else {
          out.push_back("eq " + std::to_string(i) + " " + std::to_string(a));
        }
      }
      break;
    }
    case TheoryKind::Pair: {
      std::map<int, int> lanchor, ranchor;
      for (int i = 0; i < n; ++i) {
        if (lg[i] >= 0) {
          auto it = lanchor.find(lg[i]);
          if (it == lanchor.end()) {
            lanchor[lg[i]] = i;
          } else {
            int a = it->second;
            bool i_l = sorts[i] == Sort::L, a_l = sorts[a] == Sort::L;
            if (i_l && a_l)
              out.push_back("eq " + std::to_string(i) + " " + std::to_string(a));
            else if (i_l && !a_l)
              out.push_back("lam " + std::to_string(a) + " " + std::to_string(i));
            else if (!i_l && a_l)
              out.push_back("lam " + std::to_string(i) + " " + std::to_string(a));
            else
              out.push_back("colam " + std::to_string(i) + " " + std::to_string(a));
          }
        }
        if (rg[i] >= 0) {
          auto it = ranchor.find(rg[i]);
          if (it == ranchor.end()) {
            ranchor[rg[i]] = i;
          } else {
            int a = it->second;
            bool i_r = sorts[i] == Sort::R, a_r = sorts[a] == Sort::R;
            if (i_r && a_r)
              out.push_back("eq " + std::to_string(i) + " " + std::to_string(a));
            else if (i_r && !a_r)
              out.push_back("rho " + std::to_string(a) + " " + std::to_string(i));
            else if (!i_r && a_r)
              out.push_back("rho " + std::to_string(i) + " " + std::to_string(a));
            else
              out.push_back("corho " + std::to_string(i) + " " + std::to_string(a));
          }
        }
      }
      break;
    }
  }
  return out;
}

namespace {

Sort sort_from_name(const std::string& s) {
  if (s == "Z") return Sort::Int;
  if (s == "A") return Sort::A;
  if (s == "B") return Sort::B;
  if (s == "L") return Sort::L;
  if (s == "R") return Sort::R;
  if (s == "C") return Sort::C;
  fail(Errc::precondition, "unknown sort: " + s);
}

}  // namespace

Configuration Configuration::parse(TheoryKind k, const std::vector<std::string>& lines) {
  std::vector<std::pair<int, Sort>> slots;
  struct Edge {
    std::string op;
    int i, j;
    long long d;
  };
  std::vector<Edge> edges;
  for (const auto& line : lines) {
    std::istringstream in(line);
    std::string op;
    in >> op;
    if (op.empty()) continue;
    if (op == "sort") {
      int i;
      std::string s;
      in >> i >> s;
      slots.emplace_back(i, sort_from_name(s));
    } else {
      Edge e;
      e.op = op;
      e.d = 0;
      in >> e.i >> e.j;
      if (op == "succ") in >> e.d;
      edges.push_back(e);
    }
  }
  int n = static_cast<int>(slots.size());
  Configuration c = Configuration::empty(k);
  c.sorts.resize(n);
  c.offs.assign(n, 0);
  c.grp.resize(n);
  c.lg.assign(n, -1);
  c.rg.assign(n, -1);
  for (auto& [i, s] : slots) {
    require(i >= 0 && i < n, Errc::precondition, "slot index out of range");
    c.sorts[i] = s;
  }
  // start with every slot in its own carrier group, then merge along edges
  for (int i = 0; i < n; ++i) {
    c.grp[i] = i;
    if (k == TheoryKind::Pair) {
      if (c.sorts[i] != Sort::R) c.lg[i] = i;
      if (c.sorts[i] != Sort::L) c.rg[i] = 2 * n + i;
    }
  }
  auto merge_grp = [&](int a, int b, long long shift) {
    // slot a joins slot b's group with offs[a] = offs[b] + shift
    int ga = c.grp[a], gb = c.grp[b];
    long long delta = c.offs[b] + shift - c.offs[a];
    for (int i = 0; i < n; ++i)
      if (c.grp[i] == ga) {
        c.grp[i] = gb;
        c.offs[i] += delta;
      }
  };
  auto merge_handles = [&](std::vector<int>& h, int a, int b) {
    int ha = h[a], hb = h[b];
    for (int i = 0; i < n; ++i)
      if (h[i] == ha) h[i] = hb;
  };
  for (const auto& e : edges) {
    require(e.i >= 0 && e.i < n && e.j >= 0 && e.j < n, Errc::precondition, "edge out of range");
    if (e.op == "eq") {
      if (k == TheoryKind::Pair) {
        if (c.sorts[e.i] != Sort::R) merge_handles(c.lg, e.i, e.j);
        if (c.sorts[e.i] != Sort::L) merge_handles(c.rg, e.i, e.j);
      } else {
        merge_grp(e.i, e.j, 0);
      }
    } else if (e.op == "succ") {
      merge_grp(e.i, e.j, e.d);
    } else if (e.op == "pi") {
      merge_grp(e.i, e.j, 0);  // same fiber; offsets meaningless for the B side
    } else if (e.op == "lam") {
      merge_handles(c.lg, e.i, e.j);
    } else if (e.op == "colam") {
      merge_handles(c.lg, e.i, e.j);
    } else if (e.op == "rho") {
      merge_handles(c.rg, e.i, e.j);
    } else if (e.op == "corho") {
      merge_handles(c.rg, e.i, e.j);
    } else {
      fail(Errc::precondition, "unknown edge op: " + e.op);
    }
  }
  if (k == TheoryKind::Successor) {
    // a complete type has a single chain
    for (int i = 1; i < n; ++i)
      require(c.grp[i] == c.grp[0], Errc::precondition, "successor type must be one chain");
  }
  c.canonicalize();
  return c;
}

// ---------------------------------------------------------------- constraints

Constraint Constraint::eq_var(int i) { return {Kind::EqVar, i, 0}; }
Constraint Constraint::succ_of(int i, long long d) { return {Kind::SuccOf, i, d}; }
Constraint Constraint::pi_of(int i) { return {Kind::PiOf, i, 0}; }
Constraint Constraint::lambda_of(int i) { return {Kind::LambdaOf, i, 0}; }
Constraint Constraint::rho_of(int i) { return {Kind::RhoOf, i, 0}; }
Constraint Constraint::fresh_b() { return {Kind::FreshB, -1, 0}; }
Constraint Constraint::fresh_delta() { return {Kind::FreshDelta, -1, 0}; }
Constraint Constraint::fresh_l() { return {Kind::FreshL, -1, 0}; }
Constraint Constraint::fresh_r() { return {Kind::FreshR, -1, 0}; }
Constraint Constraint::any_pcl0() { return {Kind::AnyPcl0, -1, 0}; }

bool Constraint::fresh_kind() const {
  return kind == Kind::FreshB || kind == Kind::FreshDelta || kind == Kind::FreshL ||
         kind == Kind::FreshR;
}

std::string Constraint::str() const {
  switch (kind) {
    case Kind::EqVar: return "y=x" + std::to_string(arg);
    case Kind::SuccOf: return "y=S^" + std::to_string(d) + "(x" + std::to_string(arg) + ")";
    case Kind::PiOf: return "y=pi(x" + std::to_string(arg) + ")";
    case Kind::LambdaOf: return "y=lam(x" + std::to_string(arg) + ")";
    case Kind::RhoOf: return "y=rho(x" + std::to_string(arg) + ")";
    case Kind::FreshB: return "y in B fresh";
    case Kind::FreshDelta: return "y in C fresh";
    case Kind::FreshL: return "y in L fresh";
    case Kind::FreshR: return "y in R fresh";
    case Kind::AnyPcl0: return "y in pcl(0)";
  }
  return "?";
}

// ---------------------------------------------------------------- oracle

Constraint PclSystem::delta() const {
  require(has_delta(), Errc::unsupported_theory, "theory has no designated delta");
  return kind_ == TheoryKind::Fiber ? Constraint::fresh_b() : Constraint::fresh_delta();
}

Configuration PclSystem::complete_type_of(const std::vector<Element>& tuple,
                                          const Workspace& w) const {
  require(w.kind() == kind_, Errc::precondition, "workspace theory mismatch");
  Configuration c = Configuration::empty(kind_);
  int n = static_cast<int>(tuple.size());
  c.sorts.resize(n);
  c.offs.assign(n, 0);
  c.grp.assign(n, 0);
  c.lg.assign(n, -1);
  c.rg.assign(n, -1);
  for (int i = 0; i < n; ++i) {
    const Element& e = tuple[i];
    c.sorts[i] = e.sort;
    switch (kind_) {
      case TheoryKind::Successor:
        require(e.sort == Sort::Int, Errc::precondition, "element not in workspace");
        c.offs[i] = e.a;
        break;
      case TheoryKind::Fiber:
        require(w.contains(e), Errc::precondition, "element not in workspace");
        c.grp[i] = static_cast<int>(e.a);
        c.offs[i] = e.sort == Sort::A ? e.b : 0;
        break;
      case TheoryKind::Pair:
        require(w.contains(e), Errc::precondition, "element not in workspace");
        if (e.sort == Sort::L) c.lg[i] = static_cast<int>(e.a);
        if (e.sort == Sort::R) c.rg[i] = static_cast<int>(e.a);
        if (e.sort == Sort::C) {
          c.lg[i] = static_cast<int>(e.a);
          c.rg[i] = static_cast<int>(e.b);
        }
        break;
    }
  }
  c.canonicalize();
  return c;
}

bool PclSystem::pcl_member(const Element& b, const std::vector<Element>& abar,
                           const Workspace& w) const {
  require(w.contains(b), Errc::precondition, "element not in workspace");
  for (const auto& a : abar) require(w.contains(a), Errc::precondition, "element not in workspace");
  return cl_member(kind_, b, abar);
}

bool PclSystem::brute_pcl(const Element& b, const std::vector<Element>& abar, const Workspace& w,
                          int bound) const {
  require(w.contains(b), Errc::precondition, "element not in workspace");
  switch (kind_) {
    case TheoryKind::Successor: return true;  // the model has no proper elementary submodel
    case TheoryKind::Fiber: {
      int nf = static_cast<int>(w.fiber_count());
      require(nf <= bound, Errc::bound_exceeded, "too many fibers for brute enumeration");
      std::set<long long> needed;
      for (const auto& a : abar) needed.insert(a.a);
      // every submodel candidate = a set of explicit fibers (plus the
      // implicit fresh supply); b survives iff its fiber is in all of them
      for (std::uint64_t mask = 0; mask < (1ULL << nf); ++mask) {
        bool ok = true;
        for (long long f : needed)
          if (!((mask >> f) & 1)) {
            ok = false;
            break;
          }
        if (!ok) continue;
        if (!((mask >> b.a) & 1)) return false;
      }
      return true;
    }
    case TheoryKind::Pair: {
      int nl = static_cast<int>(w.l_count());
      int nr = static_cast<int>(w.r_count());
      require(nl + nr <= bound, Errc::bound_exceeded, "too many coordinates for brute enumeration");
      std::set<long long> need_l, need_r;
      for (const auto& a : abar) {
        if (a.sort == Sort::L) need_l.insert(a.a);
        if (a.sort == Sort::R) need_r.insert(a.a);
        if (a.sort == Sort::C) {
          need_l.insert(a.a);
          need_r.insert(a.b);
        }
      }
      for (std::uint64_t ml = 0; ml < (1ULL << nl); ++ml) {
        bool okl = true;
        for (long long x : need_l)
          if (!((ml >> x) & 1)) {
            okl = false;
            break;
          }
        if (!okl) continue;
        for (std::uint64_t mr = 0; mr < (1ULL << nr); ++mr) {
          bool okr = true;
          for (long long x : need_r)
            if (!((mr >> x) & 1)) {
              okr = false;
              break;
            }
          if (!okr) continue;
          bool present = true;
          if (b.sort == Sort::L) present = (ml >> b.a) & 1;
          if (b.sort == Sort::R) present = (mr >> b.a) & 1;
          if (b.sort == Sort::C) present = ((ml >> b.a) & 1) && ((mr >> b.b) & 1);
          if (!present) return false;
        }
      }
      return true;
    }
  }
  return false;
}

bool PclSystem::constraint_pseudo_algebraic(const Constraint& phi) const {
  if (phi.fresh_kind()) return false;
  return true;  // equalities, projections, and pcl(empty) memberships cannot grow
}

bool PclSystem::exists_witness(const Constraint& phi, const std::vector<Element>& xbar,
                               const Workspace& w) const {
  (void)w;
  switch (phi.kind) {
    case Constraint::Kind::EqVar: return phi.arg >= 0 && phi.arg < static_cast<int>(xbar.size());
    case Constraint::Kind::SuccOf:
      return phi.arg < static_cast<int>(xbar.size()) &&
             (xbar[phi.arg].sort == Sort::Int || xbar[phi.arg].sort == Sort::A);
    case Constraint::Kind::PiOf:
      return phi.arg < static_cast<int>(xbar.size()) && xbar[phi.arg].sort == Sort::A;
    case Constraint::Kind::LambdaOf:
    case Constraint::Kind::RhoOf:
      return phi.arg < static_cast<int>(xbar.size()) && xbar[phi.arg].sort == Sort::C;
    case Constraint::Kind::FreshB: return kind_ == TheoryKind::Fiber;
    case Constraint::Kind::FreshDelta: return kind_ == TheoryKind::Pair;
    case Constraint::Kind::FreshL:
    case Constraint::Kind::FreshR: return kind_ == TheoryKind::Pair;
    case Constraint::Kind::AnyPcl0: return has_empty_pcl_elements();
  }
  return false;
}

Element PclSystem::witness_for(const Constraint& phi, const std::vector<Element>& xbar,
                               Workspace& w, int level) const {
  require(exists_witness(phi, xbar, w), Errc::precondition,
          "constraint has no witness: " + phi.str());
  switch (phi.kind) {
    case Constraint::Kind::EqVar: return xbar[phi.arg];
    case Constraint::Kind::SuccOf: return w.succ(xbar[phi.arg], phi.d);
    case Constraint::Kind::PiOf: return w.pi(xbar[phi.arg]);
    case Constraint::Kind::LambdaOf: return w.lambda(xbar[phi.arg]);
    case Constraint::Kind::RhoOf: return w.rho(xbar[phi.arg]);
    case Constraint::Kind::FreshB: return w.fresh_fiber(level);
    case Constraint::Kind::FreshDelta: return w.fresh_pair(level);
    case Constraint::Kind::FreshL: return w.fresh_l(level);
    case Constraint::Kind::FreshR: return w.fresh_r(level);
    case Constraint::Kind::AnyPcl0: return w.int_at(0);
  }
  fail(Errc::internal, "unhandled constraint");
}

bool PclSystem::says_phi(const Configuration& c, int y_slot, const Constraint& phi,
                         const std::vector<int>& xbar_slots) const {
  auto xs = [&](int i) {
    require(i >= 0 && i < static_cast<int>(xbar_slots.size()), Errc::precondition,
            "constraint argument out of range");
    return xbar_slots[static_cast<std::size_t>(i)];
  };
  switch (phi.kind) {
    case Constraint::Kind::EqVar: return c.equal_slots(y_slot, xs(phi.arg));
    case Constraint::Kind::SuccOf: {
      int x = xs(phi.arg);
      if (c.sorts[y_slot] != c.sorts[x]) return false;
      if (c.sorts[y_slot] == Sort::Int) return c.offs[y_slot] == c.offs[x] + phi.d;
      if (c.sorts[y_slot] != Sort::A) return false;
      return c.grp[y_slot] == c.grp[x] && c.offs[y_slot] == c.offs[x] + phi.d;
    }
    case Constraint::Kind::PiOf: {
      int x = xs(phi.arg);
      return c.sorts[y_slot] == Sort::B && c.sorts[x] == Sort::A && c.grp[y_slot] == c.grp[x];
    }
    case Constraint::Kind::LambdaOf: {
      int x = xs(phi.arg);
      return c.sorts[y_slot] == Sort::L && c.sorts[x] == Sort::C && c.lg[y_slot] == c.lg[x];
    }
    case Constraint::Kind::RhoOf: {
      int x = xs(phi.arg);
      return c.sorts[y_slot] == Sort::R && c.sorts[x] == Sort::C && c.rg[y_slot] == c.rg[x];
    }
    case Constraint::Kind::FreshB:
      return c.sorts[y_slot] == Sort::B && !c.in_pcl(y_slot, xbar_slots);
    case Constraint::Kind::FreshDelta: {
      if (c.sorts[y_slot] != Sort::C) return false;
      std::set<int> named_l, named_r;
      for (int j : xbar_slots) {
        if (c.lg[j] >= 0) named_l.insert(c.lg[j]);
        if (c.rg[j] >= 0) named_r.insert(c.rg[j]);
      }
      return named_l.count(c.lg[y_slot]) == 0 && named_r.count(c.rg[y_slot]) == 0;
    }
    case Constraint::Kind::FreshL:
      return c.sorts[y_slot] == Sort::L && !c.in_pcl(y_slot, xbar_slots);
    case Constraint::Kind::FreshR:
      return c.sorts[y_slot] == Sort::R && !c.in_pcl(y_slot, xbar_slots);
    case Constraint::Kind::AnyPcl0: return c.in_pcl_empty(y_slot);
  }
  return false;
}

Element PclSystem::outside_witness(const Constraint& phi, const std::vector<Element>& abar,
                                   const std::vector<Element>& ebar, Workspace& w,
                                   int level) const {
  require(!constraint_pseudo_algebraic(phi), Errc::precondition,
          "constraint is pseudo-algebraic; no outside witness exists");
  Element b = witness_for(phi, abar, w, level);
  require(!pcl_member(b, ebar, w), Errc::internal, "fresh witness landed in pcl(ebar)");
  return b;
}

bool PclSystem::verify_good_witness(const std::vector<Element>& abar, const Element& c,
                                    const GoodWitness& gw, const Workspace& w) const {
  std::vector<Element> ab = abar;
  ab.insert(ab.end(), gw.helpers.begin(), gw.helpers.end());
  std::vector<Element> abc = ab;
  abc.push_back(c);
  std::vector<Element> abe = ab;
  abe.push_back(gw.e);
  return pcl_member(gw.e, abc, w) && !pcl_member(gw.e, ab, w) && !pcl_member(c, abe, w);
}

std::vector<GoodWitness> PclSystem::good_witness_candidates(const std::vector<Element>& abar,
                                                            const Element& c, Workspace& w,
                                                            int level) const {
  require(supports_good_witness(), Errc::unsupported_theory,
          "good_witness requires the pair geometry");
  require(c.sort == Sort::C, Errc::precondition, "good_witness expects a delta-element");
  require(!pcl_member(c, abar, w), Errc::precondition, "c in pcl(abar)");
  std::vector<GoodWitness> out;
  Element lam = w.lambda(c), rho = w.rho(c);
  Element decoy1 = w.fresh_pair(level);
  Element decoy2 = w.fresh_pair(level);
  std::vector<GoodWitness> candidates = {
      {{}, lam},
      {{}, rho},
      {{decoy1}, w.pair_of(w.lambda(decoy1), rho)},
      {{decoy2}, w.pair_of(lam, w.rho(decoy2))},
  };
  for (auto& gw : candidates)
    if (verify_good_witness(abar, c, gw, w)) out.push_back(gw);
  return out;
}

GoodWitness PclSystem::good_witness(const std::vector<Element>& abar, const Element& c,
                                    Workspace& w, int level) const {
  auto cands = good_witness_candidates(abar, c, w, level);
  require(!cands.empty(), Errc::oracle_reject,
          "no exchange-failure witness: a coordinate of c is already closed over abar");
  return cands.front();
}

// ---------------------------------------------------------------- pools

std::vector<Element> small_pool(TheoryKind kind, int bound) {
  std::vector<Element> pool;
  switch (kind) {
    case TheoryKind::Successor:
      for (long long v = -bound; v <= bound; ++v) pool.push_back(Element{Sort::Int, v, 0});
      break;
    case TheoryKind::Fiber:
      for (long long f = 0; f < bound; ++f) {
        pool.push_back(Element{Sort::B, f, 0});
        pool.push_back(Element{Sort::A, f, 0});
        pool.push_back(Element{Sort::A, f, 2});
      }
      break;
    case TheoryKind::Pair:
      for (long long l = 0; l < bound; ++l) pool.push_back(Element{Sort::L, l, 0});
      for (long long r = 0; r < bound; ++r) pool.push_back(Element{Sort::R, r, 0});
      for (long long l = 0; l < bound; ++l)
        for (long long r = 0; r < bound; ++r) pool.push_back(Element{Sort::C, l, r});
      break;
  }
  return pool;
}

namespace {

bool satisfies_concrete(TheoryKind kind, const Constraint& phi, const Element& y,
                        const std::vector<Element>& xbar) {
  switch (phi.kind) {
    case Constraint::Kind::FreshB:
      return kind == TheoryKind::Fiber && y.sort == Sort::B && !cl_member(kind, y, xbar);
    case Constraint::Kind::FreshDelta: {
      if (kind != TheoryKind::Pair || y.sort != Sort::C) return false;
      Element l{Sort::L, y.a, 0}, r{Sort::R, y.b, 0};
      return !cl_member(kind, l, xbar) && !cl_member(kind, r, xbar);
    }
    case Constraint::Kind::FreshL:
      return y.sort == Sort::L && !cl_member(kind, y, xbar);
    case Constraint::Kind::FreshR:
      return y.sort == Sort::R && !cl_member(kind, y, xbar);
    default: return false;
  }
}

}  // namespace

bool PclSystem::is_pseudo_minimal(const Constraint& phi, const std::vector<Element>& abar,
                                  int bound) const {
  require(!constraint_pseudo_algebraic(phi), Errc::precondition,
          "pseudo-minimality is asked of non-pseudo-algebraic formulas only");
  std::vector<Element> pool = small_pool(kind_, bound);
  int npool = static_cast<int>(pool.size());
  require(npool <= 30, Errc::bound_exceeded, "pool too large");
  // enumerate astar = abar + a pool subset of size <= bound
  std::vector<std::vector<Element>> astars;
  std::vector<int> idx;
  auto rec = [&](auto&& self, int start, int remaining) -> void {
    std::vector<Element> tup = abar;
    for (int i : idx) tup.push_back(pool[i]);
    astars.push_back(tup);
    if (remaining == 0) return;
    for (int i = start; i < npool; ++i) {
      idx.push_back(i);
      self(self, i + 1, remaining - 1);
      idx.pop_back();
    }
  };
  rec(rec, 0, bound);
  for (const auto& astar : astars) {
    for (const auto& b : pool) {
      if (!satisfies_concrete(kind_, phi, b, abar)) continue;  // b realizes phi over abar
      std::vector<Element> astar_b = astar;
      astar_b.push_back(b);
      for (const auto& c : pool) {
        if (!cl_member(kind_, c, astar_b) || cl_member(kind_, c, astar)) continue;
        std::vector<Element> astar_c = astar;
        astar_c.push_back(c);
        if (!cl_member(kind_, b, astar_c)) return false;  // exchange violated
      }
    }
  }
  return true;
}

// ---------------------------------------------------------------- realize

std::vector<Element> PclSystem::realize(const Configuration& c, Workspace& w,
                                        const std::vector<int>& slot_levels,
                                        const std::map<int, Element>& placed) const {
  require(w.kind() == kind_, Errc::precondition, "workspace theory mismatch");
  int n = c.size();
  require(static_cast<int>(slot_levels.size()) == n, Errc::precondition,
          "one level per slot required");
  std::vector<Element> out(static_cast<std::size_t>(n));
  switch (kind_) {
    case TheoryKind::Successor: {
      long long anchor = 0;
      bool anchored = false;
      for (const auto& [slot, e] : placed) {
        require(e.sort == Sort::Int, Errc::not_realization, "placed element of wrong sort");
        long long a = e.a - c.offs[slot];
        if (anchored)
          require(a == anchor, Errc::not_realization, "inconsistent placement");
        else {
          anchor = a;
          anchored = true;
        }
      }
      for (int i = 0; i < n; ++i) out[i] = Element{Sort::Int, anchor + c.offs[i], 0};
      break;
    }
    case TheoryKind::Fiber: {
      std::map<int, long long> fiber_of;  // group -> fiber id
      std::map<int, long long> base_of;   // group -> concrete offset of config-anchor
      for (const auto& [slot, e] : placed) {
        require(e.sort == c.sorts[slot], Errc::not_realization, "placed element of wrong sort");
        int g = c.grp[slot];
        long long fib = e.a;
        long long base = c.sorts[slot] == Sort::A ? e.b - c.offs[slot] : 0;
        auto it = fiber_of.find(g);
        if (it != fiber_of.end()) {
          require(it->second == fib, Errc::not_realization, "inconsistent fibers");
          if (c.sorts[slot] == Sort::A)
            require(base_of.count(g) == 0 || base_of[g] == base, Errc::not_realization,
                    "inconsistent offsets");
        }
        fiber_of[g] = fib;
        if (c.sorts[slot] == Sort::A) base_of[g] = base;
      }
      for (int i = 0; i < n; ++i) {
        int g = c.grp[i];
        if (!fiber_of.count(g)) {
          int lvl = Workspace::kTopLevel;
          for (int j = 0; j < n; ++j)
            if (c.grp[j] == g) lvl = std::min(lvl, slot_levels[j]);
          fiber_of[g] = w.fresh_fiber(lvl).a;
        }
        if (c.sorts[i] == Sort::A) {
          if (!base_of.count(g)) base_of[g] = 0;
          out[i] = Element{Sort::A, fiber_of[g], base_of[g] + c.offs[i]};
        } else {
          out[i] = Element{Sort::B, fiber_of[g], 0};
        }
      }
      break;
    }
    case TheoryKind::Pair: {
      std::map<int, long long> l_of, r_of;
      for (const auto& [slot, e] : placed) {
        require(e.sort == c.sorts[slot], Errc::not_realization, "placed element of wrong sort");
        if (c.lg[slot] >= 0) {
          long long lid = e.a;  // L-slots and C-slots both carry the left id in a
          auto it = l_of.find(c.lg[slot]);
          require(it == l_of.end() || it->second == lid, Errc::not_realization,
                  "inconsistent left handles");
          l_of[c.lg[slot]] = lid;
        }
        if (c.rg[slot] >= 0) {
          long long rid = e.sort == Sort::R ? e.a : e.b;
          auto it = r_of.find(c.rg[slot]);
          require(it == r_of.end() || it->second == rid, Errc::not_realization,
                  "inconsistent right handles");
          r_of[c.rg[slot]] = rid;
        }
      }
      auto level_for = [&](bool left, int handle) {
        int lvl = Workspace::kTopLevel;
        for (int j = 0; j < n; ++j)
          if ((left ? c.lg[j] : c.rg[j]) == handle) lvl = std::min(lvl, slot_levels[j]);
        return lvl;
      };
      for (int i = 0; i < n; ++i) {
        if (c.lg[i] >= 0 && !l_of.count(c.lg[i]))
          l_of[c.lg[i]] = w.fresh_l(level_for(true, c.lg[i])).a;
        if (c.rg[i] >= 0 && !r_of.count(c.rg[i]))
          r_of[c.rg[i]] = w.fresh_r(level_for(false, c.rg[i])).a;
        switch (c.sorts[i]) {
          case Sort::L: out[i] = Element{Sort::L, l_of[c.lg[i]], 0}; break;
          case Sort::R: out[i] = Element{Sort::R, r_of[c.rg[i]], 0}; break;
          default: out[i] = Element{Sort::C, l_of[c.lg[i]], r_of[c.rg[i]]}; break;
        }
      }
      break;
    }
  }
  // placed slots must come back unchanged, and the realization must have the
  // prescribed complete type
  for (const auto& [slot, e] : placed)
    require(out[slot] == e, Errc::not_realization, "placement does not fit the type");
  require(complete_type_of(out, w) == c, Errc::not_realization,
          "realization type mismatch");
  return out;
}

}  // namespace striate::theory
