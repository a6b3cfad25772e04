#include <utility>
#include <vector>

#include "idealab/setexpr.hpp"
#include "lex.hpp"

namespace idealab {

using namespace setexpr;

namespace detail {

Rat parse_rat(Lexer& lx) {
  Int p = lx.nat("numerator");
  if (lx.try_eat('/')) {
    Int q = lx.nat("denominator");
    if (q == 0) lx.fail("zero denominator");
    return make_rat(p, q);
  }
  return Rat(p);
}

Point parse_point(Lexer& lx, std::optional<Universe>& uni) {
  auto settle = [&](Universe u) {
    if (uni && *uni != u)
      lx.fail(std::string("point forms mix universes (") + universe_name(*uni) +
              " vs " + universe_name(u) + ")");
    uni = u;
  };
  if (lx.try_eat('(')) {
    Int a = lx.nat("first coordinate");
    if (lx.try_eat(';')) {
      Int t = lx.nat("tag");
      if (t != 0 && t != 1) lx.fail("tag must be 0 or 1");
      lx.expect(')', "after tagged point");
      settle(Universe::OmegaTagged);
      return tagged_pt(a, static_cast<int>(t.get_si()));
    }
    lx.expect(',', "in pair point");
    Int b = lx.nat("second coordinate");
    lx.expect(')', "after pair point");
    settle(Universe::OmegaSq);
    return pair_pt(a, b);
  }
  Int a = lx.nat("point");
  if (lx.try_eat('/')) {
    Int q = lx.nat("denominator");
    settle(Universe::QUnit);
    return qunit_pt(a, q);  // validates 0 <= a/q <= 1 and reduces
  }
  settle(Universe::Omega);
  return omega_pt(a);
}

Partition parse_partition(Lexer& lx) {
  std::string name = lx.ident();
  if (name == "dyadic") return Partition{Partition::Kind::Dyadic, 2};
  if (name == "blocks") {
    lx.expect('(', "after blocks");
    Int b = lx.nat("base");
    lx.expect(')', "after blocks base");
    if (b < 2) lx.fail("blocks base must be >= 2");
    return Partition{Partition::Kind::Blocks, std::move(b)};
  }
  lx.fail("unknown partition '" + name + "' (want dyadic or blocks(b))");
}

namespace {

SetPtr parse_set_atom(Lexer& lx);

SetPtr parse_brace_literal(Lexer& lx) {
  std::optional<Universe> uni;
  std::vector<Point> pts;
  if (!lx.try_eat('}')) {
    for (;;) {
      pts.push_back(parse_point(lx, uni));
      if (lx.try_eat(',')) continue;
      lx.expect('}', "after set literal");
      break;
    }
  }
  return finite(uni.value_or(Universe::Omega), std::move(pts));
}

FuncPtr parse_table(Lexer& lx) {
  lx.expect('{', "after table");
  std::optional<Universe> uni;
  std::vector<std::pair<Int, Point>> entries;
  std::optional<Point> def;
  for (;;) {
    lx.skip_ws();
    bool is_default = false;
    Int key;
    if (lx.peek() >= '0' && lx.peek() <= '9') {
      key = lx.nat("table key");
    } else {
      if (lx.ident() != "default") lx.fail("table keys are naturals or default");
      is_default = true;
    }
    lx.expect('-', "before table value");
    lx.expect('>', "before table value");
    Point v = parse_point(lx, uni);
    if (is_default) {
      if (def) lx.fail("table has two default entries");
      def = std::move(v);
    } else {
      entries.emplace_back(std::move(key), std::move(v));
    }
    if (lx.try_eat(',')) continue;
    lx.expect('}', "after table entries");
    break;
  }
  if (!def) lx.fail("table needs a default entry");
  return f_table_typed(std::move(entries), std::move(*def),
                       uni.value_or(Universe::Omega));
}

SetPtr parse_set_atom(Lexer& lx) {
  if (lx.try_eat('(')) {
    SetPtr e = parse_set_expr(lx);
    lx.expect(')', "after grouped set");
    return e;
  }
  if (lx.try_eat('{')) return parse_brace_literal(lx);

  size_t name_pos = lx.pos;
  std::string name = lx.ident();
  auto args = [&] { lx.expect('(', ("after " + name).c_str()); };
  auto comma = [&] { lx.expect(',', ("in " + name).c_str()); };
  auto close = [&] { lx.expect(')', ("after " + name + " arguments").c_str()); };

  if (name == "evens") return evens();
  if (name == "odds") return odds();
  if (name == "squares") return squares();
  if (name == "tri") return tri();
  if (name == "qall") return qall();
  if (name == "range") {
    args();
    Int a = lx.nat("range start");
    comma();
    Int b = lx.nat("range end");
    close();
    return range_set(std::move(a), std::move(b));
  }
  if (name == "ap") {
    args();
    Int a = lx.nat("ap start");
    comma();
    Int d = lx.nat("ap step");
    close();
    return ap(std::move(a), std::move(d));
  }
  if (name == "powers") {
    args();
    Int b = lx.nat("base");
    close();
    return powers(std::move(b));
  }
  if (name == "blocks") {
    args();
    Int b = lx.nat("base");
    close();
    return blocks(std::move(b));
  }
  if (name == "block") {
    args();
    Int b = lx.nat("base");
    comma();
    Int n = lx.nat("block index");
    close();
    return block(std::move(b), std::move(n));
  }
  if (name == "grid") {
    args();
    SetPtr rows = parse_set_expr(lx);
    comma();
    SetPtr cols = parse_set_expr(lx);
    close();
    return grid(std::move(rows), std::move(cols));
  }
  if (name == "row") {
    args();
    Int m = lx.nat("row index");
    comma();
    SetPtr cols = parse_set_expr(lx);
    close();
    return row(std::move(m), std::move(cols));
  }
  if (name == "img" || name == "pre") {
    args();
    FuncPtr f = parse_func_expr(lx);
    comma();
    SetPtr e = parse_set_expr(lx);
    close();
    return name == "img" ? img(std::move(f), std::move(e))
                         : pre(std::move(f), std::move(e));
  }
  if (name == "tag0" || name == "tag1") {
    args();
    SetPtr e = parse_set_expr(lx);
    close();
    return name == "tag0" ? tag0(std::move(e)) : tag1(std::move(e));
  }
  if (name == "qball") {
    args();
    Rat c = parse_rat(lx);
    comma();
    Rat r = parse_rat(lx);
    close();
    return qball(std::move(c), std::move(r));
  }
  lx.pos = name_pos;
  lx.fail("unknown set constructor '" + name + "'");
}

}  // namespace

SetPtr parse_set_expr(Lexer& lx) {
  SetPtr lhs = parse_set_atom(lx);
  for (;;) {
    char c = lx.peek();
    if (c == '|') {
      ++lx.pos;
      lhs = set_union(std::move(lhs), parse_set_atom(lx));
    } else if (c == '&') {
      ++lx.pos;
      lhs = set_inter(std::move(lhs), parse_set_atom(lx));
    } else if (c == '\\') {
      ++lx.pos;
      lhs = set_diff(std::move(lhs), parse_set_atom(lx));
    } else {
      return lhs;
    }
  }
}

FuncPtr parse_func_expr(Lexer& lx) {
  size_t name_pos = lx.pos;
  std::string name = lx.ident();

  if (name == "id") return f_id();
  if (name == "proj1") return f_proj1();
  if (name == "pairc0") return f_pairc0();
  if (name == "qindex") return f_qindex();
  if (name == "table") return parse_table(lx);
  if (name == "mod" || name == "blockindex") {
    lx.expect('(', ("after " + name).c_str());
    Int v = lx.nat(name == "mod" ? "modulus" : "base");
    lx.expect(')', ("after " + name + " argument").c_str());
    return name == "mod" ? f_mod(std::move(v)) : f_blockindex(std::move(v));
  }
  if (name == "cellindex") {
    lx.expect('(', "after cellindex");
    Partition p = parse_partition(lx);
    lx.expect(')', "after cellindex partition");
    return f_cellindex(std::move(p));
  }
  if (name == "tagjoin" || name == "comp") {
    lx.expect('(', ("after " + name).c_str());
    FuncPtr f = parse_func_expr(lx);
    lx.expect(',', ("in " + name).c_str());
    FuncPtr g = parse_func_expr(lx);
    lx.expect(')', ("after " + name + " arguments").c_str());
    return name == "tagjoin" ? f_tagjoin(std::move(f), std::move(g))
                             : f_comp(std::move(f), std::move(g));
  }
  lx.pos = name_pos;
  lx.fail("unknown function '" + name + "'");
}

}  // namespace detail

namespace setexpr {

SetPtr parse_set(const std::string& text) {
  detail::Lexer lx{text};
  try {
    SetPtr e = detail::parse_set_expr(lx);
    if (!lx.at_end()) lx.fail("trailing input after set expression");
    return e;
  } catch (const std::invalid_argument& e) {
    // constructor range checks (ap, powers, mod, ...) surface as parse errors
    throw ParseError(e.what(), lx.pos);
  }
}

FuncPtr parse_func(const std::string& text) {
  detail::Lexer lx{text};
  try {
    FuncPtr f = detail::parse_func_expr(lx);
    if (!lx.at_end()) lx.fail("trailing input after function expression");
    return f;
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what(), lx.pos);
  }
}

}  // namespace setexpr
}  // namespace idealab
