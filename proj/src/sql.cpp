#include "ose/sql.hpp"

#include <cctype>
#include <charconv>

#include "ose/error.hpp"
#include "ose/text.hpp"

namespace ose::sql {

namespace {

struct Token {
  enum class Kind { Word, Number, String, Symbol, End };
  Kind kind;
  std::string text;
  std::size_t offset;
};

[[noreturn]] void violation(std::size_t offset, const std::string& msg) {
  throw Error(ErrorCode::DialectViolation, "at offset " + std::to_string(offset) + ": " + msg);
}

std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t b = i;
      while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_')) ++i;
      out.push_back({Token::Kind::Word, std::string(s.substr(b, i - b)), b});
    } else if (std::isdigit(static_cast<unsigned char>(c)) ||
               (c == '-' && i + 1 < s.size() && std::isdigit(static_cast<unsigned char>(s[i + 1])))) {
      const std::size_t b = i++;
      while (i < s.size() && (std::isdigit(static_cast<unsigned char>(s[i])) || s[i] == '.')) ++i;
      out.push_back({Token::Kind::Number, std::string(s.substr(b, i - b)), b});
    } else if (c == '\'') {
      const std::size_t b = i++;
      std::string v;
      bool closed = false;
      while (i < s.size()) {
        if (s[i] == '\'') {
          if (i + 1 < s.size() && s[i + 1] == '\'') {
            v.push_back('\'');
            i += 2;
            continue;
          }
          ++i;
          closed = true;
          break;
        }
        v.push_back(s[i++]);
      }
      if (!closed) violation(b, "unterminated string literal");
      out.push_back({Token::Kind::String, std::move(v), b});
    } else {
      static constexpr std::string_view two[] = {"<=", ">=", "<>", "!="};
      bool matched = false;
      for (auto op : two) {
        if (s.substr(i, 2) == op) {
          out.push_back({Token::Kind::Symbol, std::string(op == "!=" ? "<>" : op), i});
          i += 2;
          matched = true;
          break;
        }
      }
      if (matched) continue;
      if (std::string_view(",.()*=<>").find(c) == std::string_view::npos) {
        violation(i, std::string("unexpected character '") + c + "'");
      }
      out.push_back({Token::Kind::Symbol, std::string(1, c), i});
      ++i;
    }
  }
  out.push_back({Token::Kind::End, "", s.size()});
  return out;
}

bool is_keyword(const Token& t, std::string_view kw) {
  return t.kind == Token::Kind::Word && text::lowercase(t.text) == text::lowercase(kw);
}

bool is_reserved(const Token& t) {
  static constexpr std::string_view kReserved[] = {
      "select", "distinct", "from", "where", "and", "union", "or", "not", "join",
      "on", "group", "order", "by", "having", "limit", "as", "inner", "left", "outer"};
  if (t.kind != Token::Kind::Word) return false;
  const std::string l = text::lowercase(t.text);
  for (auto r : kReserved) {
    if (l == r) return true;
  }
  return false;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  Query query() {
    Query q;
    q.blocks.push_back(block());
    while (is_keyword(peek(), "UNION")) {
      next();
      if (is_keyword(peek(), "ALL")) violation(peek().offset, "UNION ALL is not supported");
      q.blocks.push_back(block());
    }
    if (peek().kind != Token::Kind::End) violation(peek().offset, "unexpected '" + peek().text + "'");
    return q;
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }
  const Token& next() { return tokens_[pos_++]; }

  void expect_keyword(std::string_view kw) {
    if (!is_keyword(peek(), kw)) violation(peek().offset, "expected " + std::string(kw));
    next();
  }
  void expect_symbol(std::string_view sym) {
    if (peek().kind != Token::Kind::Symbol || peek().text != sym) {
      violation(peek().offset, "expected '" + std::string(sym) + "'");
    }
    next();
  }
  bool accept_symbol(std::string_view sym) {
    if (peek().kind == Token::Kind::Symbol && peek().text == sym) {
      next();
      return true;
    }
    return false;
  }

  std::string identifier() {
    const Token& t = peek();
    if (t.kind != Token::Kind::Word || is_reserved(t)) violation(t.offset, "expected identifier");
    return next().text;
  }

  ColumnRef column_ref() {
    std::string first = identifier();
    if (accept_symbol(".")) return {std::move(first), identifier()};
    return {"", std::move(first)};
  }

  Operand operand() {
    const Token& t = peek();
    if (t.kind == Token::Kind::String) return Literal{Value{next().text}};
    if (t.kind == Token::Kind::Number) {
      const std::string n = next().text;
      if (n.find('.') == std::string::npos) {
        std::int64_t v = 0;
        auto [p, ec] = std::from_chars(n.data(), n.data() + n.size(), v);
        if (ec != std::errc() || p != n.data() + n.size()) violation(t.offset, "bad number");
        return Literal{Value{v}};
      }
      double d = 0;
      auto [p, ec] = std::from_chars(n.data(), n.data() + n.size(), d);
      if (ec != std::errc() || p != n.data() + n.size()) violation(t.offset, "bad number");
      return Literal{Value{d}};
    }
    return column_ref();
  }

  SelectItem item() {
    static constexpr std::pair<std::string_view, Aggregate> kAggs[] = {
        {"COUNT", Aggregate::CountStar}, {"SUM", Aggregate::Sum},
        {"MIN", Aggregate::Min},         {"MAX", Aggregate::Max}};
    for (auto [name, agg] : kAggs) {
      if (!is_keyword(peek(), name)) continue;
      next();
      expect_symbol("(");
      SelectItem it;
      if (agg == Aggregate::CountStar) {
        if (accept_symbol("*")) {
          it.aggregate = Aggregate::CountStar;
        } else {
          expect_keyword("DISTINCT");
          it.aggregate = Aggregate::CountDistinct;
          it.operand = column_ref();
        }
      } else {
        it.aggregate = agg;
        it.operand = column_ref();
      }
      expect_symbol(")");
      return it;
    }
    return {Aggregate::None, operand()};
  }

  Condition condition() {
    Condition c;
    c.lhs = operand();
    const Token& t = peek();
    static constexpr std::pair<std::string_view, CmpOp> kOps[] = {
        {"=", CmpOp::Eq}, {"<>", CmpOp::Ne}, {"<", CmpOp::Lt},
        {"<=", CmpOp::Le}, {">", CmpOp::Gt}, {">=", CmpOp::Ge}};
    bool found = false;
    if (t.kind == Token::Kind::Symbol) {
      for (auto [sym, op] : kOps) {
        if (t.text == sym) {
          c.op = op;
          found = true;
        }
      }
    }
    if (!found) violation(t.offset, "expected comparison operator");
    next();
    c.rhs = operand();
    return c;
  }

  SelectBlock block() {
    SelectBlock b;
    expect_keyword("SELECT");
    if (is_keyword(peek(), "DISTINCT")) {
      next();
      b.distinct = true;
    }
    if (peek().kind == Token::Kind::Symbol && peek().text == "*") {
      violation(peek().offset, "SELECT * is not supported");
    }
    b.items.push_back(item());
    while (accept_symbol(",")) b.items.push_back(item());
    expect_keyword("FROM");
    do {
      TableRef r;
      r.table = identifier();
      if (is_keyword(peek(), "AS")) next();
      if (peek().kind == Token::Kind::Word && !is_reserved(peek())) {
        r.alias = next().text;
      } else {
        r.alias = r.table;
      }
      b.from.push_back(std::move(r));
    } while (accept_symbol(","));
    if (is_keyword(peek(), "WHERE")) {
      next();
      b.where.push_back(condition());
      while (is_keyword(peek(), "AND")) {
        next();
        b.where.push_back(condition());
      }
    }
    return b;
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

}  // namespace

Query parse(std::string_view text) { return Parser(tokenize(text)).query(); }

std::string quote(std::string_view s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') out.push_back('\'');
    out.push_back(c);
  }
  out.push_back('\'');
  return out;
}

}  // namespace ose::sql
