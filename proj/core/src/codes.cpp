#include "striate/codes.hpp"

#include <algorithm>
#include <sstream>

namespace striate::codes {

bool Code::operator==(const Code& o) const {
  if (leaf != o.leaf) return false;
  if (leaf) return value == o.value;
  return kids == o.kids;
}

std::string code_to_string(const Code& c) {
  if (c.leaf) return std::to_string(c.value);
  std::string out = "(";
  for (std::size_t i = 0; i < c.kids.size(); ++i) {
    if (i) out += ' ';
    out += code_to_string(c.kids[i]);
  }
  out += ')';
  return out;
}

namespace {

Code parse_code(const std::string& s, std::size_t& pos) {
  while (pos < s.size() && s[pos] == ' ') ++pos;
  require(pos < s.size(), Errc::malformed_code, "unexpected end of code text");
  if (s[pos] == '(') {
    ++pos;
    std::vector<Code> kids;
    while (true) {
      while (pos < s.size() && s[pos] == ' ') ++pos;
      require(pos < s.size(), Errc::malformed_code, "unterminated tuple");
      if (s[pos] == ')') {
        ++pos;
        break;
      }
      kids.push_back(parse_code(s, pos));
    }
    require(!kids.empty(), Errc::malformed_code, "empty tuple");
    return Code::node(std::move(kids));
  }
  require(std::isdigit(static_cast<unsigned char>(s[pos])), Errc::malformed_code,
          "expected digit or '('");
  std::uint64_t v = 0;
  while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
    v = v * 10 + static_cast<std::uint64_t>(s[pos] - '0');
    ++pos;
  }
  return Code::nat(v);
}

}  // namespace

Code code_from_string(const std::string& s) {
  std::size_t pos = 0;
  Code c = parse_code(s, pos);
  while (pos < s.size() && s[pos] == ' ') ++pos;
  require(pos == s.size(), Errc::malformed_code, "trailing text after code");
  return c;
}

std::size_t code_depth(const Code& c) {
  if (c.leaf) return 1;
  std::size_t d = 0;
  for (const auto& k : c.kids) d = std::max(d, code_depth(k));
  return d + 1;
}

// ---------------------------------------------------------------- schema

namespace {

Code substitute_slots(const Code& c, std::uint64_t i) {
  if (c.leaf) return c;
  if (c.kids.size() == 2 && c.kids[0].leaf && c.kids[0].value == 7 && c.kids[1].leaf) {
    return Code::nat(i + c.kids[1].value);
  }
  std::vector<Code> kids;
  kids.reserve(c.kids.size());
  for (const auto& k : c.kids) kids.push_back(substitute_slots(k, i));
  return Code::node(std::move(kids));
}

bool has_slot(const Code& c) {
  if (c.leaf) return false;
  if (c.kids.size() == 2 && c.kids[0].leaf && c.kids[0].value == 7 && c.kids[1].leaf) return true;
  for (const auto& k : c.kids)
    if (has_slot(k)) return true;
  return false;
}

}  // namespace

Code Schema::instance(std::uint64_t i) const {
  for (const auto& [idx, code] : exceptions)
    if (idx == i) return code;
  return substitute_slots(tmpl, i);
}

bool Schema::operator==(const Schema& o) const {
  return tmpl == o.tmpl && exceptions == o.exceptions;
}

// ---------------------------------------------------------------- formulas

FormulaPtr Formula::var(std::uint32_t i) {
  auto f = std::make_shared<Formula>();
  f->kind = Kind::Var;
  f->m = i;
  return f;
}
FormulaPtr Formula::atom(std::uint32_t n, std::uint32_t m, std::vector<std::uint32_t> vars) {
  require(vars.size() == n, Errc::malformed_code, "atom arity mismatch");
  auto f = std::make_shared<Formula>();
  f->kind = Kind::Atom;
  f->n = n;
  f->m = m;
  f->vars = std::move(vars);
  return f;
}
FormulaPtr Formula::eq(std::uint32_t lhs, std::uint32_t rhs) {
  auto f = std::make_shared<Formula>();
  f->kind = Kind::Eq;
  f->m = lhs;
  f->n = rhs;
  return f;
}
FormulaPtr Formula::conj(FormulaPtr a, FormulaPtr b) {
  auto f = std::make_shared<Formula>();
  f->kind = Kind::And;
  f->left = std::move(a);
  f->right = std::move(b);
  return f;
}
FormulaPtr Formula::exists(std::uint32_t v, FormulaPtr body) {
  auto f = std::make_shared<Formula>();
  f->kind = Kind::Exists;
  f->m = v;
  f->left = std::move(body);
  return f;
}
FormulaPtr Formula::neg(FormulaPtr a) {
  auto f = std::make_shared<Formula>();
  f->kind = Kind::Not;
  f->left = std::move(a);
  return f;
}
FormulaPtr Formula::big_and(Schema s) {
  auto f = std::make_shared<Formula>();
  f->kind = Kind::BigAnd;
  f->schema = std::move(s);
  return f;
}

bool formula_equal(const FormulaPtr& a, const FormulaPtr& b) {
  if (!a || !b) return a == b;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case Formula::Kind::Var: return a->m == b->m;
    case Formula::Kind::Atom: return a->n == b->n && a->m == b->m && a->vars == b->vars;
    case Formula::Kind::Eq: return a->m == b->m && a->n == b->n;
    case Formula::Kind::And:
      return formula_equal(a->left, b->left) && formula_equal(a->right, b->right);
    case Formula::Kind::Exists: return a->m == b->m && formula_equal(a->left, b->left);
    case Formula::Kind::Not: return formula_equal(a->left, b->left);
    case Formula::Kind::BigAnd: return *a->schema == *b->schema;
  }
  return false;
}

std::string formula_to_string(const FormulaPtr& f) {
  if (!f) return "<null>";
  switch (f->kind) {
    case Formula::Kind::Var: return "v" + std::to_string(f->m);
    case Formula::Kind::Atom: {
      std::string out = "R[" + std::to_string(f->n) + "," + std::to_string(f->m) + "](";
      for (std::size_t i = 0; i < f->vars.size(); ++i) {
        if (i) out += ',';
        out += "v" + std::to_string(f->vars[i]);
      }
      return out + ")";
    }
    case Formula::Kind::Eq:
      return "(v" + std::to_string(f->m) + "=v" + std::to_string(f->n) + ")";
    case Formula::Kind::And:
      return "(" + formula_to_string(f->left) + " & " + formula_to_string(f->right) + ")";
    case Formula::Kind::Exists:
      return "(Ev" + std::to_string(f->m) + ")" + formula_to_string(f->left);
    case Formula::Kind::Not: return "~" + formula_to_string(f->left);
    case Formula::Kind::BigAnd:
      return "AND_i " + code_to_string(f->schema->tmpl);
  }
  return "<bad>";
}

// ---------------------------------------------------------------- encode

namespace {

Code var_code(std::uint32_t i) { return Code::node({Code::nat(1), Code::nat(i)}); }

}  // namespace

Code encode(const FormulaPtr& f) {
  require(f != nullptr, Errc::malformed_code, "null formula");
  switch (f->kind) {
    case Formula::Kind::Var: return var_code(f->m);
    case Formula::Kind::Atom: {
      std::vector<Code> kids;
      kids.push_back(Code::node({Code::nat(0), Code::nat(f->n), Code::nat(f->m)}));
      for (auto v : f->vars) kids.push_back(var_code(v));
      return Code::node(std::move(kids));
    }
    case Formula::Kind::Eq:
      return Code::node({Code::nat(2), var_code(f->m), var_code(f->n)});
    case Formula::Kind::And:
      return Code::node({Code::nat(3), encode(f->left), encode(f->right)});
    case Formula::Kind::Exists:
      return Code::node({Code::nat(4), var_code(f->m), encode(f->left)});
    case Formula::Kind::Not: return Code::node({Code::nat(5), encode(f->left)});
    case Formula::Kind::BigAnd: {
      std::vector<Code> excs;
      for (const auto& [i, c] : f->schema->exceptions)
        excs.push_back(Code::node({Code::nat(i), c}));
      Code exc_node = excs.empty() ? Code::node({Code::nat(7)})  // empty marker tuple
                                   : Code::node(std::move(excs));
      return Code::node({Code::nat(6), f->schema->tmpl, exc_node});
    }
  }
  fail(Errc::malformed_code, "unknown formula kind");
}

// ---------------------------------------------------------------- decode

namespace {

std::optional<std::uint32_t> as_variable(const Code& c) {
  if (c.leaf || c.kids.size() != 2) return std::nullopt;
  if (!c.kids[0].leaf || c.kids[0].value != 1 || !c.kids[1].leaf) return std::nullopt;
  return static_cast<std::uint32_t>(c.kids[1].value);
}

FormulaPtr decode_impl(const Code& c, const Fragment& f, bool inside_schema);

FormulaPtr decode_tagged(const Code& c, const Fragment& f, bool inside_schema) {
  require(!c.leaf, Errc::malformed_code, "bare natural is not a formula code");
  require(!c.kids.empty(), Errc::malformed_code, "empty tuple");
  const Code& head = c.kids[0];

  if (!head.leaf) {
    // atomic: <<0,n,m>, v...>
    require(head.kids.size() == 3 && head.kids[0].leaf && head.kids[0].value == 0 &&
                head.kids[1].leaf && head.kids[2].leaf,
            Errc::malformed_code, "bad atomic head");
    auto n = static_cast<std::uint32_t>(head.kids[1].value);
    auto m = static_cast<std::uint32_t>(head.kids[2].value);
    require(c.kids.size() == n + 1, Errc::malformed_code, "atomic arity mismatch");
    std::vector<std::uint32_t> vars;
    for (std::size_t i = 1; i < c.kids.size(); ++i) {
      auto v = as_variable(c.kids[i]);
      require(v.has_value(), Errc::malformed_code, "atomic argument is not a variable code");
      vars.push_back(*v);
    }
    return Formula::atom(n, m, std::move(vars));
  }

  switch (head.value) {
    case 0:
      fail(Errc::malformed_code, "basic relation code is not a formula");
    case 1: {
      require(c.kids.size() == 2 && c.kids[1].leaf, Errc::malformed_code, "bad variable code");
      return Formula::var(static_cast<std::uint32_t>(c.kids[1].value));
    }
    case 2: {
      require(c.kids.size() == 3, Errc::malformed_code, "equality arity");
      auto a = as_variable(c.kids[1]);
      auto b = as_variable(c.kids[2]);
      require(a && b, Errc::malformed_code, "equality of non-variables");
      return Formula::eq(*a, *b);
    }
    case 3: {
      require(c.kids.size() == 3, Errc::malformed_code, "conjunction arity");
      return Formula::conj(decode_impl(c.kids[1], f, inside_schema),
                           decode_impl(c.kids[2], f, inside_schema));
    }
    case 4: {
      require(c.kids.size() == 3, Errc::malformed_code, "existential arity");
      auto v = as_variable(c.kids[1]);
      require(v.has_value(), Errc::malformed_code, "existential binder is not a variable");
      return Formula::exists(*v, decode_impl(c.kids[2], f, inside_schema));
    }
    case 5: {
      require(c.kids.size() == 2, Errc::malformed_code, "negation arity");
      return Formula::neg(decode_impl(c.kids[1], f, inside_schema));
    }
    case 6: {
      require(!inside_schema, Errc::malformed_code, "nested countable conjunction in schema");
      require(c.kids.size() == 3, Errc::malformed_code, "schema arity");
      Schema s;
      s.tmpl = c.kids[1];
      const Code& excs = c.kids[2];
      require(!excs.leaf, Errc::malformed_code, "schema exception list");
      if (!(excs.kids.size() == 1 && excs.kids[0].leaf && excs.kids[0].value == 7)) {
        for (const auto& e : excs.kids) {
          require(!e.leaf && e.kids.size() == 2 && e.kids[0].leaf, Errc::malformed_code,
                  "schema exception entry");
          s.exceptions.emplace_back(e.kids[0].value, e.kids[1]);
        }
      }
      // the template must instantiate to well-formed formulas
      (void)decode_impl(s.instance(0), f, true);
      (void)decode_impl(s.instance(1), f, true);
      for (const auto& [i, code] : s.exceptions) {
        (void)i;
        (void)decode_impl(code, f, true);
      }
      return Formula::big_and(std::move(s));
    }
    default:
      fail(Errc::malformed_code, "unknown tag " + std::to_string(head.value));
  }
}

FormulaPtr decode_impl(const Code& c, const Fragment& f, bool inside_schema) {
  return decode_tagged(c, f, inside_schema);
}

// vocabulary check, used by Fragment::contains (depth is checked separately)
bool variable_within(const Code& c, const Fragment& f) {
  auto v = as_variable(c);
  return v.has_value() && *v <= f.max_var;
}

bool vocab_within(const Code& c, const Fragment& f, bool inside_schema) {
  if (c.leaf || c.kids.empty()) return false;
  const Code& head = c.kids[0];
  if (!head.leaf) {
    if (head.kids.size() != 3 || !head.kids[0].leaf || head.kids[0].value != 0 ||
        !head.kids[1].leaf || !head.kids[2].leaf)
      return false;
    if (head.kids[1].value == 0 || head.kids[1].value > f.max_arity ||
        head.kids[2].value > f.max_rel_index)
      return false;
    if (c.kids.size() != head.kids[1].value + 1) return false;
    for (std::size_t i = 1; i < c.kids.size(); ++i)
      if (!variable_within(c.kids[i], f)) return false;
    return true;
  }
  switch (head.value) {
    case 1: return variable_within(c, f);
    case 2:
      return c.kids.size() == 3 && variable_within(c.kids[1], f) && variable_within(c.kids[2], f);
    case 3:
      return c.kids.size() == 3 && vocab_within(c.kids[1], f, inside_schema) &&
             vocab_within(c.kids[2], f, inside_schema);
    case 4:
      return c.kids.size() == 3 && variable_within(c.kids[1], f) &&
             vocab_within(c.kids[2], f, inside_schema);
    case 5: return c.kids.size() == 2 && vocab_within(c.kids[1], f, inside_schema);
    case 6: {
      if (inside_schema || !f.allow_schema || c.kids.size() != 3) return false;
      Code inst0 = substitute_slots(c.kids[1], 0);
      Code inst1 = substitute_slots(c.kids[1], 1);
      if (!vocab_within(inst0, f, true) || !vocab_within(inst1, f, true)) return false;
      const Code& excs = c.kids[2];
      if (excs.leaf) return false;
      if (excs.kids.size() == 1 && excs.kids[0].leaf && excs.kids[0].value == 7) return true;
      for (const auto& e : excs.kids) {
        if (e.leaf || e.kids.size() != 2 || !e.kids[0].leaf) return false;
        if (!vocab_within(e.kids[1], f, true)) return false;
      }
      return true;
    }
    default: return false;
  }
}

}  // namespace

FormulaPtr decode(const Code& c, const Fragment& f) {
  FormulaPtr ast = decode_impl(c, f, false);
  require(f.contains(c), Errc::out_of_fragment, "code is outside the fragment");
  return ast;
}

// ---------------------------------------------------------------- fragment

Fragment Fragment::from_seeds(const std::vector<FormulaPtr>& seeds, std::size_t depth_bound) {
  Fragment f;
  f.max_arity = 1;
  f.max_rel_index = 0;
  f.max_var = 0;
  f.depth_bound = depth_bound;
  struct Walk {
    Fragment& f;
    void visit(const FormulaPtr& g) {
      if (!g) return;
      switch (g->kind) {
        case Formula::Kind::Var: f.max_var = std::max(f.max_var, g->m); break;
        case Formula::Kind::Atom:
          f.max_arity = std::max(f.max_arity, g->n);
          f.max_rel_index = std::max(f.max_rel_index, g->m);
          for (auto v : g->vars) f.max_var = std::max(f.max_var, v);
          break;
        case Formula::Kind::Eq:
          f.max_var = std::max({f.max_var, g->m, g->n});
          break;
        case Formula::Kind::And:
          visit(g->left);
          visit(g->right);
          break;
        case Formula::Kind::Exists:
          f.max_var = std::max(f.max_var, g->m);
          visit(g->left);
          break;
        case Formula::Kind::Not: visit(g->left); break;
        case Formula::Kind::BigAnd: break;
      }
    }
  } walk{f};
  for (const auto& s : seeds) {
    walk.visit(s);
    f.depth_bound = std::max(f.depth_bound, code_depth(encode(s)));
  }
  return f;
}

bool Fragment::contains(const Code& c) const {
  return code_depth(c) <= depth_bound && vocab_within(c, *this, false);
}

std::vector<FormulaPtr> Fragment::enumerate(std::size_t max_count) const {
  // by_depth[d] = proper formulas (not bare variables) of code depth exactly d
  std::vector<std::vector<FormulaPtr>> by_depth(depth_bound + 1);
  std::vector<FormulaPtr> out;
  bool full = false;
  auto emit = [&](std::size_t d, FormulaPtr g) {
    if (out.size() < max_count)
      out.push_back(g);
    else
      full = true;
    if (d <= depth_bound) by_depth[d].push_back(std::move(g));
  };
  if (depth_bound < 2) return out;
  for (std::uint32_t i = 0; i <= max_var && !full; ++i) out.push_back(Formula::var(i));
  if (depth_bound < 3) return out;
  for (std::uint32_t i = 0; i <= max_var && !full; ++i)
    for (std::uint32_t j = 0; j <= max_var && !full; ++j) emit(3, Formula::eq(i, j));
  for (std::uint32_t n = 1; n <= max_arity && !full; ++n)
    for (std::uint32_t m = 0; m <= max_rel_index && !full; ++m) {
      std::vector<std::uint32_t> args(n, 0);
      while (!full) {
        emit(3, Formula::atom(n, m, args));
        std::size_t k = 0;
        while (k < n && ++args[k] > max_var) args[k++] = 0;
        if (k == n) break;
      }
    }
  for (std::size_t d = 4; d <= depth_bound && !full; ++d) {
    for (const auto& g : by_depth[d - 1]) {
      if (full) break;
      emit(d, Formula::neg(g));
      for (std::uint32_t v = 0; v <= max_var && !full; ++v) emit(d, Formula::exists(v, g));
    }
    for (std::size_t da = 2; da <= d - 1 && !full; ++da)
      for (std::size_t db = 2; db <= d - 1 && !full; ++db) {
        if (std::max(da, db) != d - 1) continue;
        for (const auto& a : by_depth[da]) {
          if (full) break;
          for (const auto& b : by_depth[db]) {
            if (full) break;
            emit(d, Formula::conj(a, b));
          }
        }
      }
  }
  return out;
}

// ---------------------------------------------------------------- evaluate

namespace {

bool eval_impl(const Code& c, const StructureTable& s, Assignment& assign,
               std::size_t schema_instances, bool inside_schema) {
  require(!c.leaf && !c.kids.empty(), Errc::malformed_code, "not a formula code");
  const Code& head = c.kids[0];
  if (!head.leaf) {
    require(head.kids.size() == 3 && head.kids[0].leaf && head.kids[0].value == 0,
            Errc::malformed_code, "bad atomic head");
    auto n = static_cast<std::uint32_t>(head.kids[1].value);
    auto m = static_cast<std::uint32_t>(head.kids[2].value);
    auto it = s.rel.find({n, m});
    require(it != s.rel.end(), Errc::missing_relation,
            "structure does not interpret R[" + std::to_string(n) + "," + std::to_string(m) + "]");
    std::vector<int> tuple;
    for (std::size_t i = 1; i < c.kids.size(); ++i) {
      auto v = as_variable(c.kids[i]);
      require(v.has_value(), Errc::malformed_code, "atomic argument");
      auto a = assign.find(*v);
      require(a != assign.end(), Errc::unassigned_variable, "v" + std::to_string(*v));
      tuple.push_back(a->second);
    }
    return it->second.count(tuple) > 0;
  }
  switch (head.value) {
    case 2: {
      auto va = as_variable(c.kids[1]);
      auto vb = as_variable(c.kids[2]);
      require(va && vb, Errc::malformed_code, "equality");
      auto a = assign.find(*va);
      auto b = assign.find(*vb);
      require(a != assign.end() && b != assign.end(), Errc::unassigned_variable, "equality var");
      return a->second == b->second;
    }
    case 3:
      return eval_impl(c.kids[1], s, assign, schema_instances, inside_schema) &&
             eval_impl(c.kids[2], s, assign, schema_instances, inside_schema);
    case 4: {
      auto v = as_variable(c.kids[1]);
      require(v.has_value(), Errc::malformed_code, "existential binder");
      auto saved = assign.find(*v) != assign.end() ? std::optional<int>(assign[*v]) : std::nullopt;
      bool found = false;
      for (int e = 0; e < s.universe && !found; ++e) {
        assign[*v] = e;
        found = eval_impl(c.kids[2], s, assign, schema_instances, inside_schema);
      }
      if (saved)
        assign[*v] = *saved;
      else
        assign.erase(*v);
      return found;
    }
    case 5: return !eval_impl(c.kids[1], s, assign, schema_instances, inside_schema);
    case 6: {
      require(!inside_schema, Errc::malformed_code, "nested schema");
      Schema sch;
      sch.tmpl = c.kids[1];
      const Code& excs = c.kids[2];
      if (!(excs.kids.size() == 1 && excs.kids[0].leaf && excs.kids[0].value == 7)) {
        for (const auto& e : excs.kids) sch.exceptions.emplace_back(e.kids[0].value, e.kids[1]);
      }
      for (std::uint64_t i = 0; i < schema_instances; ++i) {
        if (!eval_impl(sch.instance(i), s, assign, schema_instances, true)) return false;
      }
      return true;
    }
    case 1: fail(Errc::malformed_code, "variable code has no truth value");
    default: fail(Errc::malformed_code, "unknown tag");
  }
}

}  // namespace

void StructureTable::set(std::uint32_t n, std::uint32_t m, std::set<std::vector<int>> tuples) {
  rel[{n, m}] = std::move(tuples);
}

bool evaluate(const Code& c, const StructureTable& s, const Assignment& assign,
              std::size_t schema_instances) {
  Assignment work = assign;
  return eval_impl(c, s, work, schema_instances, false);
}

}  // namespace striate::codes
