#include "ose/query.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "ose/error.hpp"

namespace ose {

namespace {

struct Token {
  enum class Kind { Word, Var, String, LBrace, RBrace, Dot, End };
  Kind kind;
  std::string text;
  std::size_t line;
  std::size_t column;
};

bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == ':';
}

std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  std::size_t line = 1;
  std::size_t col = 1;
  std::size_t i = 0;
  auto bump = [&] {
    if (s[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
    ++i;
  };
  // A '.' continues a name only when a name character follows it.
  auto word_at = [&](std::size_t k) {
    return k < s.size() && (is_word_char(s[k]) ||
                            (s[k] == '.' && k + 1 < s.size() && is_word_char(s[k + 1])));
  };
  while (i < s.size()) {
    const char c = s[i];
    const std::size_t l0 = line;
    const std::size_t c0 = col;
    if (std::isspace(static_cast<unsigned char>(c))) {
      bump();
    } else if (c == '#') {
      while (i < s.size() && s[i] != '\n') bump();
    } else if (c == '{' || c == '}' || c == '.') {
      out.push_back({c == '{' ? Token::Kind::LBrace : (c == '}' ? Token::Kind::RBrace : Token::Kind::Dot),
                     std::string(1, c), l0, c0});
      bump();
    } else if (c == '?') {
      bump();
      std::string name;
      while (word_at(i)) {
        name.push_back(s[i]);
        bump();
      }
      if (name.empty()) throw SyntaxError(l0, c0, "expected variable name after '?'");
      out.push_back({Token::Kind::Var, std::move(name), l0, c0});
    } else if (c == '"') {
      bump();
      std::string value;
      bool closed = false;
      while (i < s.size() && s[i] != '\n') {
        if (s[i] == '"') {
          bump();
          closed = true;
          break;
        }
        if (s[i] == '\\' && i + 1 < s.size()) bump();
        value.push_back(s[i]);
        bump();
      }
      if (!closed) throw SyntaxError(l0, c0, "unterminated string literal");
      out.push_back({Token::Kind::String, std::move(value), l0, c0});
    } else if (is_word_char(c)) {
      std::string name;
      while (word_at(i)) {
        name.push_back(s[i]);
        bump();
      }
      out.push_back({Token::Kind::Word, std::move(name), l0, c0});
    } else {
      throw SyntaxError(l0, c0, std::string("unexpected character '") + c + "'");
    }
  }
  out.push_back({Token::Kind::End, "", line, col});
  return out;
}

bool keyword(const Token& t, std::string_view kw) {
  if (t.kind != Token::Kind::Word || t.text.size() != kw.size()) return false;
  for (std::size_t i = 0; i < kw.size(); ++i) {
    if (std::toupper(static_cast<unsigned char>(t.text[i])) != kw[i]) return false;
  }
  return true;
}

class CqParser {
 public:
  CqParser(std::vector<Token> tokens, const Ontology& o) : tokens_(std::move(tokens)), onto_(o) {}

  ConjunctiveQuery parse() {
    ConjunctiveQuery q;
    expect_keyword("SELECT");
    if (keyword(peek(), "DISTINCT")) next();
    std::vector<Token> head_tokens;
    while (peek().kind == Token::Kind::Var) head_tokens.push_back(next());
    if (head_tokens.empty()) fail(peek(), "expected at least one head variable");
    expect_keyword("WHERE");
    expect(Token::Kind::LBrace, "'{'");
    while (peek().kind != Token::Kind::RBrace) {
      q.atoms.push_back(triple());
      if (peek().kind == Token::Kind::Dot) {
        next();
      } else if (peek().kind != Token::Kind::RBrace) {
        fail(peek(), "expected '.' or '}'");
      }
    }
    next();
    if (peek().kind != Token::Kind::End) fail(peek(), "unexpected text after '}'");

    std::set<std::string> body_vars;
    for (const auto& a : q.atoms) {
      for (const auto& t : a.args) {
        if (t.is_var()) body_vars.insert(t.name);
      }
    }
    for (const auto& h : head_tokens) {
      if (!body_vars.contains(h.text)) {
        throw Error(ErrorCode::UnboundHeadVariable,
                    std::to_string(h.line) + ":" + std::to_string(h.column) +
                        ": head variable ?" + h.text + " does not occur in the query body");
      }
      q.head.push_back(Term::var(h.text));
    }
    return q;
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }
  const Token& next() { return tokens_[pos_++]; }

  [[noreturn]] static void fail(const Token& t, const std::string& msg) {
    throw SyntaxError(t.line, t.column, msg);
  }
  [[noreturn]] static void undeclared(const Token& t, const std::string& what) {
    throw Error(ErrorCode::UndeclaredName, std::to_string(t.line) + ":" + std::to_string(t.column) +
                                               ": undeclared " + what + " '" + t.text + "'");
  }

  void expect_keyword(std::string_view kw) {
    if (!keyword(peek(), kw)) fail(peek(), "expected " + std::string(kw));
    next();
  }
  void expect(Token::Kind k, const std::string& what) {
    if (peek().kind != k) fail(peek(), "expected " + what);
    next();
  }

  Term individual_term(const Token& t) {
    if (t.kind == Token::Kind::Var) return Term::var(t.text);
    if (t.kind == Token::Kind::Word) {
      if (!onto_.is_individual(t.text)) undeclared(t, "individual");
      return Term::constant(t.text);
    }
    fail(t, "expected a variable or an individual name");
  }

  Atom triple() {
    const Token subj = next();
    if (subj.kind != Token::Kind::Var && subj.kind != Token::Kind::Word) {
      fail(subj, "expected triple subject");
    }
    const Token pred = next();
    if (pred.kind != Token::Kind::Word) fail(pred, "expected predicate");
    const Token obj = next();
    if (pred.text == "a") {
      if (obj.kind != Token::Kind::Word) fail(obj, "expected class name");
      if (!onto_.is_class(obj.text)) undeclared(obj, "class");
      return Atom::cls(obj.text, individual_term(subj));
    }
    if (onto_.is_object_property(pred.text)) {
      return Atom::property(pred.text, individual_term(subj), individual_term(obj));
    }
    if (onto_.is_data_property(pred.text)) {
      Term value;
      if (obj.kind == Token::Kind::Var) {
        value = Term::var(obj.text);
      } else if (obj.kind == Token::Kind::String) {
        value = Term::constant(obj.text);
      } else {
        fail(obj, "expected a variable or a literal");
      }
      return Atom::property(pred.text, individual_term(subj), std::move(value));
    }
    undeclared(pred, "property");
  }

  std::vector<Token> tokens_;
  const Ontology& onto_;
  std::size_t pos_ = 0;
};

}  // namespace

ConjunctiveQuery parse_cq(std::string_view text, const Ontology& o) {
  return CqParser(tokenize(text), o).parse();
}

std::string to_string(const Term& t) {
  if (t.is_var()) return "?" + t.name;
  return "\"" + t.name + "\"";
}

std::string to_string(const Atom& a) {
  std::string out = a.predicate + "(";
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (i > 0) out += ", ";
    out += to_string(a.args[i]);
  }
  return out + ")";
}

std::string to_string(const ConjunctiveQuery& q) {
  std::string out = "q(";
  for (std::size_t i = 0; i < q.head.size(); ++i) {
    if (i > 0) out += ", ";
    out += to_string(q.head[i]);
  }
  out += ") <- ";
  for (std::size_t i = 0; i < q.atoms.size(); ++i) {
    if (i > 0) out += ", ";
    out += to_string(q.atoms[i]);
  }
  return out;
}

std::string to_string(const UnionOfCQs& u) {
  std::string out;
  for (const auto& q : u.disjuncts) out += to_string(q) + "\n";
  return out;
}

}  // namespace ose
