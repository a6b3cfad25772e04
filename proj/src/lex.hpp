#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "idealab/ideals.hpp"
#include "idealab/point.hpp"
#include "idealab/rat.hpp"
#include "idealab/setexpr.hpp"

// Shared recursive-descent plumbing for the set/function grammar and the
// ideal/witness descriptor grammar layered on top of it.

namespace idealab::detail {

struct Lexer {
  std::string_view src;
  size_t pos = 0;

  void skip_ws() {
    while (pos < src.size() && (src[pos] == ' ' || src[pos] == '\t' ||
                                src[pos] == '\n' || src[pos] == '\r'))
      ++pos;
  }
  bool at_end() {
    skip_ws();
    return pos >= src.size();
  }
  char peek() {
    skip_ws();
    return pos < src.size() ? src[pos] : '\0';
  }
  bool try_eat(char c) {
    if (peek() == c) {
      ++pos;
      return true;
    }
    return false;
  }
  void expect(char c, const char* where) {
    if (!try_eat(c))
      fail(std::string("expected '") + c + "' " + where);
  }
  static bool word_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
           (c >= '0' && c <= '9') || c == '_';
  }
  std::string ident() {
    skip_ws();
    size_t start = pos;
    while (pos < src.size() && word_char(src[pos]) &&
           !(src[pos] >= '0' && src[pos] <= '9' && pos == start))
      ++pos;
    if (pos == start) fail("expected a name");
    return std::string(src.substr(start, pos - start));
  }
  Int nat(const char* what) {
    skip_ws();
    size_t start = pos;
    while (pos < src.size() && src[pos] >= '0' && src[pos] <= '9') ++pos;
    if (pos == start) fail(std::string("expected a natural number (") + what + ")");
    return Int(std::string(src.substr(start, pos - start)), 10);
  }
  [[noreturn]] void fail(const std::string& msg) {
    throw ParseError(msg, pos);
  }
};

setexpr::SetPtr parse_set_expr(Lexer& lx);
setexpr::FuncPtr parse_func_expr(Lexer& lx);
setexpr::Partition parse_partition(Lexer& lx);
ideals::IdealPtr parse_ideal_expr(Lexer& lx);
Rat parse_rat(Lexer& lx);  // "p/q" or bare natural
// One point literal; infers the universe from its shape and checks it
// against *uni (setting it when empty).
Point parse_point(Lexer& lx, std::optional<Universe>& uni);

}  // namespace idealab::detail
