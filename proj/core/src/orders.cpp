#include "striate/orders.hpp"

#include <algorithm>
#include <sstream>

namespace striate::orders {

// ---------------------------------------------------------------- Point

bool Point::operator==(const Point& o) const {
  if (order_id != o.order_id || stage != o.stage) return false;
  if (class_is_min != o.class_is_min) return false;
  if (!class_is_min && class_coord != o.class_coord) return false;
  if (within_is_unit != o.within_is_unit) return false;
  if (!within_is_unit && within != o.within) return false;
  return true;
}

bool Point::operator<(const Point& o) const {
  if (stage != o.stage) return stage < o.stage;
  if (class_is_min != o.class_is_min) return class_is_min;  // block minimum first
  if (!class_is_min && class_coord != o.class_coord) return class_coord < o.class_coord;
  if (within_is_unit != o.within_is_unit) return within_is_unit;
  if (!within_is_unit && within != o.within) return within < o.within;
  return false;
}

std::string Point::str() const {
  std::string cls = class_is_min ? "min" : rat_to_string(class_coord);
  std::string w = within_is_unit ? "unit" : rat_to_string(within);
  return std::to_string(stage) + ":" + cls + ":" + w;
}

Point Point::parse(const std::string& s, std::uint32_t order_id) {
  auto c1 = s.find(':');
  auto c2 = s.find(':', c1 == std::string::npos ? std::string::npos : c1 + 1);
  require(c1 != std::string::npos && c2 != std::string::npos, Errc::usage,
          "bad point syntax: " + s);
  Point p;
  p.order_id = order_id;
  try {
    p.stage = std::stoi(s.substr(0, c1));
  } catch (const std::exception&) {
    fail(Errc::usage, "bad stage in point: " + s);
  }
  std::string cls = s.substr(c1 + 1, c2 - c1 - 1);
  std::string w = s.substr(c2 + 1);
  if (cls == "min") {
    p.class_is_min = true;
  } else {
    auto r = rat_from_string(cls);
    require(r.has_value(), Errc::usage, "bad class coordinate: " + s);
    p.class_is_min = false;
    p.class_coord = *r;
  }
  if (w == "unit") {
    p.within_is_unit = true;
  } else {
    auto r = rat_from_string(w);
    require(r.has_value(), Errc::usage, "bad within coordinate: " + s);
    p.within_is_unit = false;
    p.within = *r;
  }
  return p;
}

bool ClassId::operator==(const ClassId& o) const {
  return stage == o.stage && is_min == o.is_min && (is_min || coord == o.coord);
}
bool ClassId::operator<(const ClassId& o) const {
  if (stage != o.stage) return stage < o.stage;
  if (is_min != o.is_min) return is_min;
  if (is_min) return false;
  return coord < o.coord;
}
std::string ClassId::str() const {
  return std::to_string(stage) + ":" + (is_min ? "min" : rat_to_string(coord));
}

// ---------------------------------------------------------------- Cut

Cut Cut::stage(int alpha) {
  Cut c;
  c.kind = Kind::Stage;
  c.alpha = alpha;
  return c;
}
Cut Cut::before(const Point& p) {
  Cut c;
  c.kind = Kind::Before;
  c.p = p;
  return c;
}
Cut Cut::at_most(const Point& p) {
  Cut c;
  c.kind = Kind::AtMost;
  c.p = p;
  return c;
}
Cut Cut::before_class(const Point& p) {
  Cut c;
  c.kind = Kind::BeforeClass;
  c.p = p;
  return c;
}
Cut Cut::at_most_class(const Point& p) {
  Cut c;
  c.kind = Kind::AtMostClass;
  c.p = p;
  return c;
}
Cut Cut::all() {
  Cut c;
  c.kind = Kind::All;
  return c;
}

bool Cut::operator==(const Cut& o) const {
  if (kind != o.kind) return false;
  switch (kind) {
    case Kind::Empty:
    case Kind::All: return true;
    case Kind::Stage: return alpha == o.alpha;
    default: return p == o.p;
  }
}

std::string Cut::str() const {
  switch (kind) {
    case Kind::Empty: return "empty";
    case Kind::All: return "all";
    case Kind::Stage: return "J" + std::to_string(alpha);
    case Kind::Before: return "<" + p.str();
    case Kind::AtMost: return "<=" + p.str();
    case Kind::BeforeClass: return "<cls " + p.str();
    case Kind::AtMostClass: return "<=cls " + p.str();
  }
  return "?";
}

// ---------------------------------------------------------------- order

ColoredOrder::ColoredOrder(int n, std::set<int> s_bits) : n_(n), s_(std::move(s_bits)) {
  require(n >= 0, Errc::usage, "order size must be nonnegative");
  require(s_.count(0) == 0, Errc::usage, "0 may not belong to S");
  for (int a : s_) require(a >= 1 && a <= n_, Errc::usage, "S must be a subset of {1..n}");
  std::uint64_t h = fnv1a_init();
  h = fnv1a(h, static_cast<std::uint64_t>(n_));
  for (int a : s_) h = fnv1a(h, static_cast<std::uint64_t>(a));
  id_ = static_cast<std::uint32_t>(h ^ (h >> 32));
}

BlockKind ColoredOrder::block_kind(int stage) const {
  require(stage >= 0 && stage <= top_stage(), Errc::precondition, "stage out of range");
  if (stage == 0) return BlockKind::MinBlock;
  return s_.count(stage - 1) ? BlockKind::LeadD : BlockKind::PlainC;
}

Point ColoredOrder::min_point() const {
  Point p;
  p.order_id = id_;
  p.stage = 0;
  return p;
}

Point ColoredOrder::block_min(int stage) const {
  require(block_kind(stage) == BlockKind::LeadD, Errc::precondition,
          "block " + std::to_string(stage) + " has no leading singleton");
  Point p;
  p.order_id = id_;
  p.stage = stage;
  return p;
}

Point ColoredOrder::q_point(int stage, const Rat& cls, const Rat& within) const {
  require(stage >= 1 && stage <= top_stage(), Errc::precondition, "stage out of range");
  require(!is_dyadic(cls), Errc::precondition, "dyadic coordinate names a singleton class");
  Point p;
  p.order_id = id_;
  p.stage = stage;
  p.class_is_min = false;
  p.class_coord = cls;
  p.within_is_unit = false;
  p.within = within;
  return p;
}

Point ColoredOrder::singleton(int stage, const Rat& dyadic_cls) const {
  require(stage >= 1 && stage <= top_stage(), Errc::precondition, "stage out of range");
  require(is_dyadic(dyadic_cls), Errc::precondition, "singleton classes sit at dyadic coordinates");
  Point p;
  p.order_id = id_;
  p.stage = stage;
  p.class_is_min = false;
  p.class_coord = dyadic_cls;
  return p;
}

bool ColoredOrder::valid(const Point& p) const {
  if (p.order_id != id_) return false;
  if (p.stage < 0 || p.stage > top_stage()) return false;
  if (p.stage == 0) return p.class_is_min && p.within_is_unit;
  if (p.class_is_min) return block_kind(p.stage) == BlockKind::LeadD && p.within_is_unit;
  if (is_dyadic(p.class_coord)) return p.within_is_unit;
  return !p.within_is_unit;
}

void ColoredOrder::check_mine(const Point& p) const {
  require(p.order_id == id_, Errc::different_orders, "point belongs to a different order");
  require(valid(p), Errc::precondition, "malformed point " + p.str());
}

int ColoredOrder::compare(const Point& a, const Point& b) const {
  check_mine(a);
  check_mine(b);
  if (a == b) return 0;
  return a < b ? -1 : 1;
}

bool ColoredOrder::equivalent(const Point& a, const Point& b) const {
  check_mine(a);
  check_mine(b);
  return class_of(a) == class_of(b);
}

bool ColoredOrder::flagged(const Point& p) const {
  check_mine(p);
  if (p.stage == 0) return false;
  if (p.class_is_min) return true;  // leading singleton of a D-block
  return is_dyadic(p.class_coord);
}

bool ColoredOrder::is_min(const Point& p) const {
  check_mine(p);
  return p.stage == 0;
}

bool ColoredOrder::singleton_class(const Point& p) const {
  check_mine(p);
  return p.within_is_unit;
}

ClassId ColoredOrder::class_of(const Point& p) const {
  ClassId c;
  c.stage = p.stage;
  c.is_min = p.class_is_min;
  if (!p.class_is_min) c.coord = p.class_coord;
  return c;
}

int ColoredOrder::compare_class(const ClassId& a, const ClassId& b) const {
  if (a == b) return 0;
  return a < b ? -1 : 1;
}

bool ColoredOrder::class_flagged(const ClassId& c) const {
  if (c.stage == 0) return false;
  if (c.is_min) return true;
  return is_dyadic(c.coord);
}

Point ColoredOrder::class_rep(const ClassId& c) const {
  Point p;
  p.order_id = id_;
  p.stage = c.stage;
  p.class_is_min = c.is_min;
  if (!c.is_min) {
    p.class_coord = c.coord;
    if (!is_dyadic(c.coord)) {
      p.within_is_unit = false;
      p.within = Rat(0);
    }
  }
  return p;
}

bool ColoredOrder::contains(const Cut& j, const Point& p) const {
  check_mine(p);
  switch (j.kind) {
    case Cut::Kind::Empty: return false;
    case Cut::Kind::All: return true;
    case Cut::Kind::Stage: return p.stage <= j.alpha;
    case Cut::Kind::Before: return compare(p, j.p) < 0;
    case Cut::Kind::AtMost: return compare(p, j.p) <= 0;
    case Cut::Kind::BeforeClass: return class_of(p) < class_of(j.p);
    case Cut::Kind::AtMostClass: {
      ClassId a = class_of(p), b = class_of(j.p);
      return a < b || a == b;
    }
  }
  return false;
}

bool ColoredOrder::cut_proper(const Cut& j) const {
  switch (j.kind) {
    case Cut::Kind::All: return false;
    case Cut::Kind::Stage: return j.alpha < top_stage();
    default: return true;
  }
}

bool ColoredOrder::class_in_cut(const Cut& j, const ClassId& c) const {
  return contains(j, class_rep(c));
}

std::string ColoredOrder::header() const {
  std::string out = "order n=" + std::to_string(n_) + " S=";
  bool first = true;
  for (int a : s_) {
    if (!first) out += ',';
    out += std::to_string(a);
    first = false;
  }
  if (s_.empty()) out += "-";
  return out;
}

ColoredOrder ColoredOrder::from_header(const std::string& line) {
  std::istringstream in(line);
  std::string word;
  in >> word;
  require(word == "order", Errc::usage, "not an order header: " + line);
  int n = -1;
  std::set<int> s;
  while (in >> word) {
    if (word.rfind("n=", 0) == 0) {
      n = std::stoi(word.substr(2));
    } else if (word.rfind("S=", 0) == 0) {
      std::string bits = word.substr(2);
      if (bits != "-") {
        std::istringstream bs(bits);
        std::string item;
        while (std::getline(bs, item, ',')) s.insert(std::stoi(item));
      }
    }
  }
  require(n >= 0, Errc::usage, "order header missing n");
  return ColoredOrder(n, std::move(s));
}

// ---------------------------------------------------------------- classify

namespace {

// First class of the complement of a proper initial segment, when one
// exists; nullopt means the complement has no minimum class (candidate
// seamless shape).
std::optional<ClassId> complement_min_class(const ColoredOrder& order, const Cut& j) {
  switch (j.kind) {
    case Cut::Kind::Empty:
      return ClassId{0, true, Rat(0)};
    case Cut::Kind::Stage: {
      int next = j.alpha + 1;
      if (order.block_kind(next) == BlockKind::LeadD) return ClassId{next, true, Rat(0)};
      return std::nullopt;  // a C-block skeleton has no first class
    }
    case Cut::Kind::Before: {
      // complement = points >= p
      ClassId c = order.class_of(j.p);
      return c;  // p's own class is split or starts the complement
    }
    case Cut::Kind::AtMost: {
      ClassId c = order.class_of(j.p);
      if (!j.p.within_is_unit) return c;  // split Q-class
      return std::nullopt;                // next classes form an open skeleton tail
    }
    case Cut::Kind::BeforeClass: return order.class_of(j.p);
    case Cut::Kind::AtMostClass: return std::nullopt;
    default: return std::nullopt;
  }
}

bool cut_suitable(const ColoredOrder& order, const Cut& j) {
  switch (j.kind) {
    case Cut::Kind::Empty: return true;  // vacuously
    case Cut::Kind::Stage: return j.alpha >= 1;
    case Cut::Kind::Before: {
      // suitable iff p's class has nothing below p (union of classes and the
      // classes below have no maximum, which holds structurally)
      if (j.p.within_is_unit) return !(j.p.stage == 0);  // before min(I) is empty: handled above
      return false;  // splits p's Q-class (every Q-class is unbounded below)
    }
    case Cut::Kind::AtMost: return false;      // largest class or split class
    case Cut::Kind::AtMostClass: return false; // largest class p/E
    case Cut::Kind::BeforeClass: return j.p.stage != 0;  // empty when p = min(I)
    default: return false;
  }
}

}  // namespace

CutClass classify_cut(const ColoredOrder& order, const Cut& j) {
  require(order.cut_proper(j), Errc::precondition, "cut must be a proper initial segment");
  if (j.kind == Cut::Kind::Stage)
    require(j.alpha >= 0 && j.alpha <= order.n(), Errc::precondition, "stage cut out of range");
  if (j.kind != Cut::Kind::Empty && j.kind != Cut::Kind::Stage) order.check_mine(j.p);

  // normalize the degenerate point cuts that denote the empty segment
  Cut jj = j;
  if ((j.kind == Cut::Kind::Before || j.kind == Cut::Kind::BeforeClass) && j.p.stage == 0)
    jj = Cut::empty();

  CutClass out{};
  out.suitable = cut_suitable(order, jj);
  auto min_cls = complement_min_class(order, jj);
  if (!min_cls.has_value()) {
    out.shape = CutShape::Seamless;
    return out;
  }
  bool singleton = order.class_flagged(*min_cls) || min_cls->stage == 0;
  if (singleton) {
    out.shape = CutShape::MinSingleton;
    out.min_point = order.class_rep(*min_cls);
  } else {
    out.shape = CutShape::MinInfiniteClass;
  }
  return out;
}

// ---------------------------------------------------------------- fresh picks

namespace {

std::vector<Rat> coords_in_block(const std::vector<Point>& avoid, int stage) {
  std::vector<Rat> out;
  for (const auto& p : avoid)
    if (p.stage == stage && !p.class_is_min) out.push_back(p.class_coord);
  return out;
}

}  // namespace

Point ColoredOrder::fresh_leader(const std::optional<ClassId>& lo, const std::optional<ClassId>& hi,
                                 bool want_flagged, const std::vector<Point>& avoid) const {
  // choose the block
  int stage;
  RatBound clo, chi;
  if (lo && hi) {
    require(*lo < *hi, Errc::precondition, "empty class interval");
    if (lo->stage == hi->stage) {
      stage = lo->stage;
      if (!lo->is_min) clo = lo->coord;
      if (!hi->is_min) chi = hi->coord;
      require(!hi->is_min, Errc::precondition, "no class below a block minimum in its block");
    } else {
      // use the tail of lo's block when possible, else the head of hi's block
      if (lo->stage >= 1) {
        stage = lo->stage;
        if (!lo->is_min) clo = lo->coord;
      } else {
        stage = hi->stage;
        if (!hi->is_min) {
          chi = hi->coord;
        } else {
          stage = hi->stage - 1;  // below a block minimum: previous block's tail
          require(stage >= 1, Errc::precondition, "no room below the first block");
        }
      }
    }
  } else if (lo) {
    if (lo->stage >= 1) {
      stage = lo->stage;
      if (!lo->is_min) clo = lo->coord;
    } else {
      stage = 1;
    }
  } else if (hi) {
    if (!hi->is_min) {
      stage = hi->stage;
      chi = hi->coord;
    } else {
      stage = hi->stage - 1;
      require(stage >= 1, Errc::precondition, "no room below the first block");
    }
  } else {
    stage = top_stage();
  }
  require(stage >= 1 && stage <= top_stage(), Errc::internal, "fresh_leader block selection");

  std::vector<Rat> used = coords_in_block(avoid, stage);
  Rat coord = want_flagged ? pick_dyadic(clo, chi, used) : pick_nondyadic(clo, chi, used);
  if (want_flagged) return singleton(stage, coord);
  return q_point(stage, coord, Rat(0));
}

Point ColoredOrder::fresh_in_class(const Point& cls_rep, const std::optional<Rat>& above,
                                   const std::vector<Point>& avoid) const {
  check_mine(cls_rep);
  require(!cls_rep.within_is_unit, Errc::precondition, "singleton class has no room");
  std::vector<Rat> used;
  ClassId c = class_of(cls_rep);
  for (const auto& p : avoid)
    if (class_of(p) == c && !p.within_is_unit) used.push_back(p.within);
  RatBound lo;
  if (above) lo = *above;
  Rat w = pick_dyadic(lo, std::nullopt, used);
  return q_point(cls_rep.stage, cls_rep.class_coord, w);
}

// ---------------------------------------------------------------- automorphisms

struct BnfMemo {
  // strictly increasing in both components
  std::vector<std::pair<ClassId, ClassId>> quotient;
  // within-class tables per matched pair, keyed by the domain class
  std::map<ClassId, std::vector<std::pair<Rat, Rat>>> within;
};

AutomorphismCert AutomorphismCert::make_identity(const ColoredOrder& order) {
  AutomorphismCert c;
  c.order_id = order.id();
  c.identity = true;
  c.window = Cut::empty();
  c.cut = Cut::empty();
  c.memo = std::make_shared<BnfMemo>();
  return c;
}

namespace {

// Pick a class of the requested color strictly inside the open class
// interval (lo, hi); absent hi means "anywhere above lo inside the window".
ClassId pick_class_between(const ColoredOrder& order, const ClassId& lo,
                           const std::optional<ClassId>& hi, const Cut& window,
                           bool want_flagged) {
  std::optional<ClassId> cap = hi;
  if (!cap) {
    // stay inside the window
    if (window.kind == Cut::Kind::BeforeClass) {
      ClassId limit{window.p.stage, window.p.class_is_min, window.p.class_coord};
      cap = limit;
    }
    // Stage windows need no cap: their top block is unbounded
  }
  std::optional<ClassId> lo_opt = lo;
  Point pt = order.fresh_leader(lo_opt, cap, want_flagged, {});
  return ClassId{pt.stage, pt.class_is_min, pt.class_is_min ? Rat(0) : pt.class_coord};
}

// forward = map first->second; inverse lookups swap roles
ClassId quotient_image(const ColoredOrder& order, BnfMemo& memo, const Cut& window,
                       const ClassId& cls, bool inverse) {
  auto key = [&](const std::pair<ClassId, ClassId>& pr) { return inverse ? pr.second : pr.first; };
  auto val = [&](const std::pair<ClassId, ClassId>& pr) { return inverse ? pr.first : pr.second; };
  auto& q = memo.quotient;
  std::size_t lo_idx = q.size();  // greatest index with key < cls, +1
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (key(q[i]) == cls) return val(q[i]);
    if (cls < key(q[i])) {
      lo_idx = i;
      break;
    }
  }
  std::optional<ClassId> gap_lo, gap_hi;
  if (lo_idx == q.size()) {
    if (!q.empty()) gap_lo = val(q.back());
  } else {
    if (lo_idx > 0) gap_lo = val(q[lo_idx - 1]);
    gap_hi = val(q[lo_idx]);
  }
  require(gap_lo.has_value(), Errc::internal, "quotient image below the seeded minimum");
  bool color = order.class_flagged(cls);
  ClassId img = pick_class_between(order, *gap_lo, gap_hi, window, color);
  std::pair<ClassId, ClassId> entry = inverse ? std::make_pair(img, cls) : std::make_pair(cls, img);
  auto pos = std::lower_bound(q.begin(), q.end(), entry,
                              [](const auto& a, const auto& b) { return a.first < b.first; });
  q.insert(pos, entry);
  return img;
}

Rat within_image(std::vector<std::pair<Rat, Rat>>& table, const Rat& r, bool inverse) {
  auto key = [&](const std::pair<Rat, Rat>& pr) { return inverse ? pr.second : pr.first; };
  auto val = [&](const std::pair<Rat, Rat>& pr) { return inverse ? pr.first : pr.second; };
  std::size_t lo_idx = table.size();
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (key(table[i]) == r) return val(table[i]);
    if (r < key(table[i])) {
      lo_idx = i;
      break;
    }
  }
  Rat out;
  if (table.empty()) {
    out = r;
  } else if (lo_idx == 0) {
    out = val(table.front()) - (key(table.front()) - r);
  } else if (lo_idx == table.size()) {
    out = val(table.back()) + (r - key(table.back()));
  } else {
    const auto& a = table[lo_idx - 1];
    const auto& b = table[lo_idx];
    out = val(a) + (val(b) - val(a)) * (r - key(a)) / (key(b) - key(a));
  }
  std::pair<Rat, Rat> entry = inverse ? std::make_pair(out, r) : std::make_pair(r, out);
  auto pos = std::lower_bound(table.begin(), table.end(), entry,
                              [](const auto& a, const auto& b) { return a.first < b.first; });
  table.insert(pos, entry);
  return out;
}

ClassId cls_of(const ColoredOrder& order, const Point& p) { return order.class_of(p); }

}  // namespace

Point apply_automorphism(const ColoredOrder& order, const AutomorphismCert& cert,
                         const Point& p) {
  order.check_mine(p);
  require(cert.order_id == order.id(), Errc::different_orders, "certificate for another order");
  if (cert.identity) return p;
  if (!order.contains(cert.window, p)) return p;
  BnfMemo& memo = *cert.memo;
  ClassId c = cls_of(order, p);
  ClassId img = quotient_image(order, memo, cert.window, c, cert.inverted);
  Point out = order.class_rep(img);
  if (p.within_is_unit) {
    require(out.within_is_unit, Errc::internal, "color mismatch in quotient image");
    return out;
  }
  require(!out.within_is_unit, Errc::internal, "color mismatch in quotient image");
  const ClassId& domain_cls = cert.inverted ? img : c;
  auto& table = memo.within[domain_cls];
  out.within = within_image(table, p.within, cert.inverted);
  return out;
}

AutomorphismCert invert(const AutomorphismCert& cert) {
  AutomorphismCert out = cert;
  out.inverted = !cert.inverted;
  return out;
}

AutomorphismCert seamless_automorphism(const ColoredOrder& order, const Cut& j,
                                       const std::vector<Point>& fixed, const Point& w) {
  CutClass cc = classify_cut(order, j);
  require(cc.shape == CutShape::Seamless && cc.suitable, Errc::not_seamless,
          "cut " + j.str() + " is not seamless");
  order.check_mine(w);
  require(order.contains(j, w), Errc::precondition, "w must lie in the segment");
  ClassId wc = order.class_of(w);
  std::optional<ClassId> below_max;  // greatest class of fixed inside J
  std::optional<ClassId> above_min;  // least class of fixed outside J
  for (const auto& s : fixed) {
    order.check_mine(s);
    ClassId sc = order.class_of(s);
    if (order.contains(j, s)) {
      require(sc < wc, Errc::precondition,
              "w must lie strictly above (class-wise) the fixed points inside the segment");
      if (!below_max || *below_max < sc) below_max = sc;
    } else {
      if (!above_min || sc < *above_min) above_min = sc;
    }
  }

  // singleton t in J with below_max < t/E < w/E, and singleton t' outside J
  // below every fixed class outside J. Seamless segments of I^S are the

  // stage cuts J_alpha with alpha not in S, so the complement starts with an
  // open C-block skeleton.
  std::vector<Point> avoid = fixed;
  avoid.push_back(w);
  Point t = order.fresh_leader(below_max, wc, true, avoid);
  require(order.contains(j, t), Errc::internal, "inner anchor escaped the segment");

  require(j.kind == Cut::Kind::Stage, Errc::not_seamless, "seamless cuts are stage cuts here");
  int first_outside = j.alpha + 1;
  std::optional<ClassId> hi_cap;
  if (above_min && above_min->stage == first_outside) hi_cap = *above_min;
  ClassId lo_cap{first_outside, false, Rat(0)};
  // any class of the first outside block below hi_cap; coordinates are
  // unbounded below, so pass an artificial low bound only to pin the block
  Point t_prime = [&] {
    std::vector<Rat> used = [&] {
      std::vector<Rat> u;
      for (const auto& p : avoid)
        if (p.stage == first_outside && !p.class_is_min) u.push_back(p.class_coord);
      return u;
    }();
    RatBound chi;
    if (hi_cap && !hi_cap->is_min) chi = hi_cap->coord;
    Rat coord = pick_dyadic(std::nullopt, chi, used);
    return order.singleton(first_outside, coord);
  }();
  require(!order.contains(j, t_prime), Errc::internal, "outer anchor fell inside the segment");
  require(order.flagged(t) == order.flagged(t_prime), Errc::internal, "anchor colors differ");

  // window: one block of margin beyond everything named, suitable and proper
  int maxstage = std::max({t.stage, t_prime.stage, w.stage});
  for (const auto& s : fixed) maxstage = std::max(maxstage, s.stage);
  Cut window;
  if (maxstage + 1 <= order.n()) {
    window = Cut::stage(maxstage + 1);
  } else {
    std::vector<Rat> top_used;
    for (const auto& s : fixed)
      if (s.stage == order.top_stage() && !s.class_is_min) top_used.push_back(s.class_coord);
    RatBound lo_bound;
    for (const auto& r : top_used)
      if (!lo_bound || *lo_bound < r) lo_bound = r;
    Rat coord = pick_nondyadic(lo_bound, std::nullopt, top_used);
    window = Cut::before_class(order.q_point(order.top_stage(), coord, Rat(0)));
  }

  AutomorphismCert cert;
  cert.order_id = order.id();
  cert.window = window;
  cert.cut = j;
  cert.fixed = fixed;
  cert.moved = w;
  cert.inner = t;
  cert.outer = t_prime;
  cert.memo = std::make_shared<BnfMemo>();

  // seed: minimum class, the fixed classes (identity), and t -> t'
  std::vector<std::pair<ClassId, ClassId>> seed;
  seed.emplace_back(ClassId{0, true, Rat(0)}, ClassId{0, true, Rat(0)});
  std::set<ClassId> seen;
  for (const auto& s : fixed) {
    ClassId sc = order.class_of(s);
    if (seen.insert(sc).second) seed.emplace_back(sc, sc);
  }
  seed.emplace_back(order.class_of(t), order.class_of(t_prime));
  std::sort(seed.begin(), seed.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t i = 0; i + 1 < seed.size(); ++i)
    require(seed[i].second < seed[i + 1].second, Errc::internal, "inconsistent seed order");
  cert.memo->quotient = std::move(seed);
  for (const auto& s : fixed) {
    if (s.within_is_unit) continue;
    auto& table = cert.memo->within[order.class_of(s)];
    std::pair<Rat, Rat> entry{s.within, s.within};
    if (std::find(table.begin(), table.end(), entry) == table.end()) table.push_back(entry);
  }
  for (auto& [cls, table] : cert.memo->within)
    std::sort(table.begin(), table.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

  Point w_img = apply_automorphism(order, cert, w);
  require(!order.contains(j, w_img), Errc::internal, "moved point failed to leave the segment");
  return cert;
}

}  // namespace striate::orders
