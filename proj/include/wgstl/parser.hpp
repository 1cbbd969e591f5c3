#pragma once

#include <cctype>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "wgstl/error.hpp"
#include "wgstl/formula.hpp"

namespace wgstl {

namespace detail {

struct Token {
  enum Kind { LParen, RParen, LBracket, RBracket, LBrace, RBrace, Colon, Int, Name, End } kind;
  std::string text;
  int line;
  int column;
};

inline std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t j = 0; j < n; ++j, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < src.size()) {
    const char ch = src[i];
    if (std::isspace(static_cast<unsigned char>(ch))) {
      advance(1);
      continue;
    }
    if (ch == ';' || ch == '#') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    const int l = line, c = col;
    auto single = [&](Token::Kind k) {
      out.push_back({k, std::string(1, ch), l, c});
      advance(1);
    };
    switch (ch) {
      case '(': single(Token::LParen); continue;
      case ')': single(Token::RParen); continue;
      case '[': single(Token::LBracket); continue;
      case ']': single(Token::RBracket); continue;
      case '{': single(Token::LBrace); continue;
      case '}': single(Token::RBrace); continue;
      case ':': single(Token::Colon); continue;
      case ',': advance(1); continue;
      default: break;
    }
    if (std::isdigit(static_cast<unsigned char>(ch)) || ch == '-') {
      std::size_t j = i + 1;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      if (j == i + 1 && ch == '-') throw ParseError("stray '-'", l, c);
      out.push_back({Token::Int, std::string(src.substr(i, j - i)), l, c});
      advance(j - i);
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(ch)) || ch == '_') {
      std::size_t j = i + 1;
      while (j < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_' || src[j] == '.')) {
        ++j;
      }
      out.push_back({Token::Name, std::string(src.substr(i, j - i)), l, c});
      advance(j - i);
      continue;
    }
    throw ParseError(std::string("unexpected character '") + ch + "'", l, c);
  }
  out.push_back({Token::End, "", line, col});
  return out;
}

class Parser {
 public:
  explicit Parser(std::string_view src) : tokens_(tokenize(src)) {}

  Formula parse(bool require_structure) {
    std::map<std::string, std::size_t> decls;
    while (peek().kind == Token::Name) parse_decl(decls);
    if (peek().kind != Token::LParen) fail("expected '('");
    parse_phi();
    if (peek().kind != Token::End) fail("unexpected trailing input '" + peek().text + "'");
    for (const auto& [name, dims] : decls) {
      bool found = false;
      for (auto& p : out_.mutable_predicates()) {
        if (p.name == name) {
          p.dims = dims;
          found = true;
        }
      }
      if (!found) throw ValidationError("predicate '" + name + "' is declared but never used");
    }
    if (require_structure) out_.check_structure();
    return std::move(out_);
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, peek().line, peek().column); }

  const Token& expect(Token::Kind k, const char* what) {
    if (peek().kind != k) fail(std::string("expected ") + what);
    return tokens_[pos_++];
  }

  std::size_t parse_int() {
    const Token& t = peek();
    if (t.kind != Token::Int) fail("expected integer");
    if (t.text[0] == '-') fail("time index must be non-negative");
    ++pos_;
    return static_cast<std::size_t>(std::stoull(t.text));
  }

  // name ':' '{' 'dims' ':' INT '}'
  void parse_decl(std::map<std::string, std::size_t>& decls) {
    const Token name = expect(Token::Name, "predicate name");
    expect(Token::Colon, "':'");
    expect(Token::LBrace, "'{'");
    const Token& key = expect(Token::Name, "'dims'");
    if (key.text != "dims") throw ParseError("expected 'dims'", key.line, key.column);
    expect(Token::Colon, "':'");
    const std::size_t dims = parse_int();
    if (dims == 0) fail("predicate dims must be >= 1");
    expect(Token::RBrace, "'}'");
    if (!decls.emplace(name.text, dims).second) {
      throw ParseError("predicate '" + name.text + "' declared twice", name.line, name.column);
    }
  }

  std::size_t parse_phi() {
    expect(Token::LParen, "'('");
    const Token& head = expect(Token::Name, "operator keyword");
    auto op = op_from_keyword(head.text);
    if (!op) throw ParseError("unknown operator '" + head.text + "'", head.line, head.column);

    const std::size_t id = out_.add_node({*op, 0, 0, {}, 0});
    switch (*op) {
      case Op::Pred: {
        const Token& name = expect(Token::Name, "predicate name");
        out_.mutable_node(id).predicate = out_.intern_predicate(name.text);
        break;
      }
      case Op::Not:
      case Op::Forall:
      case Op::Exists:
      case Op::GraphX: {
        auto c = parse_phi();
        out_.mutable_node(id).children = {c};
        break;
      }
      case Op::And:
      case Op::Or: {
        auto c1 = parse_phi();
        auto c2 = parse_phi();
        out_.mutable_node(id).children = {c1, c2};
        break;
      }
      case Op::Always:
      case Op::Eventually:
      case Op::TempX: {
        const Token open = expect(Token::LBracket, "'[' interval");
        const std::size_t lo = parse_int();
        const std::size_t hi = parse_int();
        expect(Token::RBracket, "']'");
        if (lo > hi) throw ParseError("malformed interval: k1 > k2", open.line, open.column);
        auto c = parse_phi();
        auto& n = out_.mutable_node(id);
        n.lo = lo;
        n.hi = hi;
        n.children = {c};
        break;
      }
    }
    expect(Token::RParen, "')'");
    return id;
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  Formula out_;
};

inline void print_node(const Formula& f, std::size_t id, std::string& out) {
  const auto& n = f.node(id);
  out += '(';
  out += keyword(n.op);
  if (n.op == Op::Pred) {
    out += ' ';
    out += f.predicates()[n.predicate].name;
  }
  if (is_temporal(n.op)) {
    out += " [" + std::to_string(n.lo) + " " + std::to_string(n.hi) + "]";
  }
  for (auto c : n.children) {
    out += ' ';
    print_node(f, c, out);
  }
  out += ')';
}

}  // namespace detail

// Parses the structure grammar:
//   decl* phi
//   decl := NAME ':' '{' 'dims' ':' INT '}'
//   phi  := '(' op ')'
//   op   := 'pred' NAME | 'not' phi | ('and'|'or') phi phi
//         | ('always'|'eventually'|'tempX') '[' INT INT ']' phi
//         | ('forall'|'exists'|'graphX') phi
// ';' and '#' start comments that run to end of line.
inline Formula parse_structure(std::string_view text) { return detail::Parser(text).parse(true); }

// Same grammar without the temporal/graph operator requirement; for plain
// monitoring of arbitrary formulas.
inline Formula parse_formula(std::string_view text) { return detail::Parser(text).parse(false); }

// Canonical one-line s-expression (without declarations).
inline std::string to_sexpr(const Formula& f) {
  std::string out;
  if (f.size() > 0) detail::print_node(f, 0, out);
  return out;
}

// Declarations (for predicates that carry a dims annotation) followed by the
// s-expression; parse_structure() inverts it.
inline std::string print_structure(const Formula& f) {
  std::string out;
  for (const auto& p : f.predicates()) {
    if (p.dims) out += p.name + ": {dims: " + std::to_string(*p.dims) + "}\n";
  }
  return out + to_sexpr(f);
}

}  // namespace wgstl
