#include "ose/ontology.hpp"

#include <cctype>
#include <fstream>
#include <optional>
#include <sstream>

#include "ose/error.hpp"

namespace ose {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::UndeclaredName: return "UndeclaredName";
    case ErrorCode::DuplicateDeclaration: return "DuplicateDeclaration";
    case ErrorCode::UnboundHeadVariable: return "UnboundHeadVariable";
    case ErrorCode::NonQLAxiomEncountered: return "NonQLAxiomEncountered";
    case ErrorCode::UnmappedSymbol: return "UnmappedSymbol";
    case ErrorCode::InstanceTooLarge: return "InstanceTooLarge";
    case ErrorCode::UnknownTable: return "UnknownTable";
    case ErrorCode::UnknownColumn: return "UnknownColumn";
    case ErrorCode::DialectViolation: return "DialectViolation";
    case ErrorCode::MissingTimestampColumn: return "MissingTimestampColumn";
    case ErrorCode::OutOfOrderSample: return "OutOfOrderSample";
    case ErrorCode::InconsistentABox: return "InconsistentABox";
    case ErrorCode::CapExceeded: return "CapExceeded";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::UnknownKPI: return "UnknownKPI";
    case ErrorCode::DegenerateSeries: return "DegenerateSeries";
    case ErrorCode::TypeMismatch: return "TypeMismatch";
    case ErrorCode::CycleDetected: return "CycleDetected";
    case ErrorCode::UnboundSource: return "UnboundSource";
    case ErrorCode::UnboundSink: return "UnboundSink";
    case ErrorCode::MissingDynamicPart: return "MissingDynamicPart";
    case ErrorCode::UnboundEventClass: return "UnboundEventClass";
    case ErrorCode::UnknownEventClass: return "UnknownEventClass";
    case ErrorCode::UnknownDataSource: return "UnknownDataSource";
    case ErrorCode::NonMonotoneTimestamp: return "NonMonotoneTimestamp";
    case ErrorCode::MalformedEvent: return "MalformedEvent";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

namespace {

struct Token {
  enum class Kind { Ident, String, LParen, RParen, End };
  Kind kind;
  std::string text;
  std::size_t line;
  std::size_t column;
};

bool is_name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' ||
         c == '.' || c == ':';
}

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  std::size_t line = 1;
  std::size_t col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n = 1) {
    for (std::size_t k = 0; k < n && i < text.size(); ++k, ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < text.size()) {
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance();
    } else if (c == '#') {
      while (i < text.size() && text[i] != '\n') advance();
    } else if (c == '(' || c == ')') {
      out.push_back({c == '(' ? Token::Kind::LParen : Token::Kind::RParen,
                     std::string(1, c), line, col});
      advance();
    } else if (c == '"') {
      const std::size_t l0 = line;
      const std::size_t c0 = col;
      advance();
      std::string value;
      bool closed = false;
      while (i < text.size()) {
        const char d = text[i];
        if (d == '"') {
          advance();
          closed = true;
          break;
        }
        if (d == '\\' && i + 1 < text.size()) {
          value.push_back(text[i + 1]);
          advance(2);
          continue;
        }
        if (d == '\n') break;
        value.push_back(d);
        advance();
      }
      if (!closed) throw SyntaxError(l0, c0, "unterminated string literal");
      out.push_back({Token::Kind::String, std::move(value), l0, c0});
    } else if (is_name_char(c)) {
      const std::size_t l0 = line;
      const std::size_t c0 = col;
      std::string name;
      while (i < text.size() && is_name_char(text[i])) {
        name.push_back(text[i]);
        advance();
      }
      out.push_back({Token::Kind::Ident, std::move(name), l0, c0});
    } else {
      throw SyntaxError(line, col, std::string("unexpected character '") + c + "'");
    }
  }
  out.push_back({Token::Kind::End, "", line, col});
  return out;
}

// One argument of a statement: a name, a literal, or an Exists/ExistsInv form.
struct Arg {
  enum class Kind { Name, Literal, Exists, ExistsInverse };
  Kind kind;
  std::string text;
  std::size_t line;
  std::size_t column;
};

struct Statement {
  std::string keyword;
  std::vector<Arg> args;
  std::size_t line;
  std::size_t column;
};

class StatementParser {
 public:
  explicit StatementParser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  std::vector<Statement> parse_all() {
    std::vector<Statement> out;
    while (peek().kind != Token::Kind::End) out.push_back(statement());
    return out;
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }
  const Token& next() { return tokens_[pos_++]; }

  const Token& expect(Token::Kind kind, const char* what) {
    const Token& t = peek();
    if (t.kind != kind) throw SyntaxError(t.line, t.column, std::string("expected ") + what);
    return next();
  }

  Statement statement() {
    const Token& kw = expect(Token::Kind::Ident, "statement keyword");
    Statement st{kw.text, {}, kw.line, kw.column};
    expect(Token::Kind::LParen, "'('");
    while (peek().kind != Token::Kind::RParen) {
      const Token& t = peek();
      if (t.kind == Token::Kind::String) {
        st.args.push_back({Arg::Kind::Literal, t.text, t.line, t.column});
        next();
      } else if (t.kind == Token::Kind::Ident) {
        next();
        if (peek().kind == Token::Kind::LParen) {
          Arg::Kind k;
          if (t.text == "Exists") {
            k = Arg::Kind::Exists;
          } else if (t.text == "ExistsInv") {
            k = Arg::Kind::ExistsInverse;
          } else {
            throw SyntaxError(t.line, t.column, "unknown class constructor '" + t.text + "'");
          }
          next();
          const Token& p = expect(Token::Kind::Ident, "property name");
          st.args.push_back({k, p.text, t.line, t.column});
          expect(Token::Kind::RParen, "')'");
        } else {
          st.args.push_back({Arg::Kind::Name, t.text, t.line, t.column});
        }
      } else {
        throw SyntaxError(t.line, t.column, "expected argument or ')'");
      }
    }
    next();
    return st;
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

class Resolver {
 public:
  explicit Resolver(Ontology& o) : o_(o) {}

  void declare(const Statement& st) {
    expect_arity(st, 1, 1);
    const Arg& a = name_arg(st, 0);
    if (o_.declares(a.text)) {
      throw Error(ErrorCode::DuplicateDeclaration,
                  at(a) + "duplicate declaration of '" + a.text + "'");
    }
    if (st.keyword == "Class") {
      o_.classes.insert(a.text);
    } else if (st.keyword == "ObjectProperty") {
      o_.object_properties.insert(a.text);
    } else if (st.keyword == "DataProperty") {
      o_.data_properties.insert(a.text);
    } else {
      o_.individuals.insert(a.text);
    }
  }

  void resolve(const Statement& st) {
    const std::string& k = st.keyword;
    if (k == "SubClassOf") {
      expect_arity(st, 2, 2);
      o_.tbox.emplace_back(SubClassOf{class_expr(st.args[0]), class_expr(st.args[1])});
    } else if (k == "SubPropertyOf") {
      expect_arity(st, 2, 2);
      o_.tbox.emplace_back(SubPropertyOf{property(st, 0), property(st, 1)});
    } else if (k == "Domain") {
      expect_arity(st, 2, 2);
      o_.tbox.emplace_back(Domain{property(st, 0), cls(st, 1)});
    } else if (k == "Range") {
      expect_arity(st, 2, 2);
      o_.tbox.emplace_back(Range{property(st, 0), cls(st, 1)});
    } else if (k == "InverseOf") {
      expect_arity(st, 2, 2);
      o_.tbox.emplace_back(InverseOf{property(st, 0), property(st, 1)});
    } else if (k == "DisjointClasses") {
      expect_arity(st, 2, 2);
      o_.tbox.emplace_back(DisjointClasses{cls(st, 0), cls(st, 1)});
    } else if (k == "ConditionalType") {
      expect_arity(st, 4, SIZE_MAX);
      ConditionalType ct{cls(st, 0), property(st, 1), literal(st, 2), cls(st, 3), {}};
      for (std::size_t i = 4; i < st.args.size(); ++i) ct.link.push_back(object_property(st, i));
      o_.tbox.emplace_back(std::move(ct));
    } else if (k == "ClassAssertion") {
      expect_arity(st, 2, 2);
      o_.abox.emplace_back(ClassAssertion{individual(st, 0), cls(st, 1)});
    } else if (k == "ObjectAssertion") {
      expect_arity(st, 3, 3);
      o_.abox.emplace_back(
          ObjectAssertion{individual(st, 0), object_property(st, 1), individual(st, 2)});
    } else if (k == "DataAssertion") {
      expect_arity(st, 3, 3);
      o_.abox.emplace_back(DataAssertion{individual(st, 0), data_property(st, 1), literal(st, 2)});
    } else {
      throw SyntaxError(st.line, st.column, "unknown statement '" + k + "'");
    }
  }

 private:
  static std::string at(const Arg& a) {
    return std::to_string(a.line) + ":" + std::to_string(a.column) + ": ";
  }

  static void expect_arity(const Statement& st, std::size_t lo, std::size_t hi) {
    if (st.args.size() < lo || st.args.size() > hi) {
      throw SyntaxError(st.line, st.column, "wrong number of arguments to " + st.keyword);
    }
  }

  static const Arg& name_arg(const Statement& st, std::size_t i) {
    const Arg& a = st.args[i];
    if (a.kind != Arg::Kind::Name) throw SyntaxError(a.line, a.column, "expected a name");
    return a;
  }

  [[noreturn]] static void undeclared(const Arg& a, const char* what) {
    throw Error(ErrorCode::UndeclaredName,
                at(a) + "'" + a.text + "' is not a declared " + what);
  }

  std::string cls(const Statement& st, std::size_t i) const {
    const Arg& a = name_arg(st, i);
    if (!o_.is_class(a.text)) undeclared(a, "class");
    return a.text;
  }
  std::string property(const Statement& st, std::size_t i) const {
    const Arg& a = name_arg(st, i);
    if (!o_.is_property(a.text)) undeclared(a, "property");
    return a.text;
  }
  std::string object_property(const Statement& st, std::size_t i) const {
    const Arg& a = name_arg(st, i);
    if (!o_.is_object_property(a.text)) undeclared(a, "object property");
    return a.text;
  }
  std::string data_property(const Statement& st, std::size_t i) const {
    const Arg& a = name_arg(st, i);
    if (!o_.is_data_property(a.text)) undeclared(a, "data property");
    return a.text;
  }
  std::string individual(const Statement& st, std::size_t i) const {
    const Arg& a = name_arg(st, i);
    if (!o_.is_individual(a.text)) undeclared(a, "individual");
    return a.text;
  }
  static std::string literal(const Statement& st, std::size_t i) {
    const Arg& a = st.args[i];
    if (a.kind != Arg::Kind::Literal) throw SyntaxError(a.line, a.column, "expected a quoted literal");
    return a.text;
  }

  ClassExpr class_expr(const Arg& a) const {
    switch (a.kind) {
      case Arg::Kind::Name:
        if (!o_.is_class(a.text)) undeclared(a, "class");
        return ClassExpr::named(a.text);
      case Arg::Kind::Exists:
        if (!o_.is_property(a.text)) undeclared(a, "property");
        return ClassExpr::exists(a.text);
      case Arg::Kind::ExistsInverse:
        if (!o_.is_property(a.text)) undeclared(a, "property");
        return ClassExpr::exists_inverse(a.text);
      case Arg::Kind::Literal:
        break;
    }
    throw SyntaxError(a.line, a.column, "expected a class expression");
  }

  Ontology& o_;
};

bool is_declaration(const std::string& k) {
  return k == "Class" || k == "ObjectProperty" || k == "DataProperty" || k == "Individual";
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

Ontology parse_ontology(std::string_view text) { return parse_ontology(text, Ontology{}); }

Ontology parse_ontology(std::string_view text, const Ontology& base) {
  auto statements = StatementParser(tokenize(text)).parse_all();
  Ontology o = base;
  Resolver r(o);
  for (const auto& st : statements) {
    if (is_declaration(st.keyword)) r.declare(st);
  }
  for (const auto& st : statements) {
    if (!is_declaration(st.keyword)) r.resolve(st);
  }
  return o;
}

Ontology load_ontology_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open ontology file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_ontology(ss.str());
}

std::string to_string(const ClassExpr& e) {
  switch (e.kind) {
    case ClassExpr::Kind::Named: return e.name;
    case ClassExpr::Kind::Exists: return "Exists(" + e.name + ")";
    case ClassExpr::Kind::ExistsInverse: return "ExistsInv(" + e.name + ")";
  }
  return e.name;
}

std::string to_string(const Axiom& a) {
  struct Printer {
    std::string operator()(const SubClassOf& x) const {
      return "SubClassOf(" + to_string(x.sub) + " " + to_string(x.super) + ")";
    }
    std::string operator()(const SubPropertyOf& x) const {
      return "SubPropertyOf(" + x.sub + " " + x.super + ")";
    }
    std::string operator()(const Domain& x) const {
      return "Domain(" + x.property + " " + x.cls + ")";
    }
    std::string operator()(const Range& x) const {
      return "Range(" + x.property + " " + x.cls + ")";
    }
    std::string operator()(const InverseOf& x) const {
      return "InverseOf(" + x.first + " " + x.second + ")";
    }
    std::string operator()(const DisjointClasses& x) const {
      return "DisjointClasses(" + x.first + " " + x.second + ")";
    }
    std::string operator()(const ConditionalType& x) const {
      std::string s = "ConditionalType(" + x.body_class + " " + x.property + " " +
                      quote(x.value) + " " + x.head_class;
      for (const auto& l : x.link) s += " " + l;
      return s + ")";
    }
  };
  return std::visit(Printer{}, a);
}

std::string to_string(const Assertion& a) {
  struct Printer {
    std::string operator()(const ClassAssertion& x) const {
      return "ClassAssertion(" + x.individual + " " + x.cls + ")";
    }
    std::string operator()(const ObjectAssertion& x) const {
      return "ObjectAssertion(" + x.subject + " " + x.property + " " + x.object + ")";
    }
    std::string operator()(const DataAssertion& x) const {
      return "DataAssertion(" + x.subject + " " + x.property + " " + quote(x.value) + ")";
    }
  };
  return std::visit(Printer{}, a);
}

const std::string& subject_of(const Assertion& a) {
  struct Subject {
    const std::string& operator()(const ClassAssertion& x) const { return x.individual; }
    const std::string& operator()(const ObjectAssertion& x) const { return x.subject; }
    const std::string& operator()(const DataAssertion& x) const { return x.subject; }
  };
  return std::visit(Subject{}, a);
}

std::string print_ontology(const Ontology& o) {
  std::string out;
  for (const auto& n : o.classes) out += "Class(" + n + ")\n";
  for (const auto& n : o.object_properties) out += "ObjectProperty(" + n + ")\n";
  for (const auto& n : o.data_properties) out += "DataProperty(" + n + ")\n";
  for (const auto& n : o.individuals) out += "Individual(" + n + ")\n";
  for (const auto& a : o.tbox) out += to_string(a) + "\n";
  for (const auto& a : o.abox) out += to_string(a) + "\n";
  return out;
}

ProfileReport validate_ql_profile(const Ontology& o) {
  ProfileReport report;
  auto flag = [&](std::size_t i, std::string_view code, std::string msg) {
    report.violations.push_back({i, std::string(code), std::move(msg)});
  };
  for (std::size_t i = 0; i < o.tbox.size(); ++i) {
    const Axiom& ax = o.tbox[i];
    if (std::holds_alternative<ConditionalType>(ax)) {
      flag(i, violation::kConditionalType,
           "value-conditioned typing rule is outside OWL 2 QL: " + to_string(ax));
    } else if (const auto* s = std::get_if<SubClassOf>(&ax)) {
      for (const ClassExpr* e : {&s->sub, &s->super}) {
        if (e->kind == ClassExpr::Kind::ExistsInverse && o.is_data_property(e->name)) {
          flag(i, violation::kDataPropertyInverse,
               "data property '" + e->name + "' has no inverse");
        }
      }
    } else if (const auto* p = std::get_if<SubPropertyOf>(&ax)) {
      if (o.is_data_property(p->sub) != o.is_data_property(p->super)) {
        flag(i, violation::kMixedPropertyInclusion,
             "inclusion between an object and a data property: " + to_string(ax));
      }
    } else if (const auto* r = std::get_if<Range>(&ax)) {
      if (o.is_data_property(r->property)) {
        flag(i, violation::kDataPropertyClassRange,
             "data property '" + r->property + "' cannot have a class range");
      }
    } else if (const auto* inv = std::get_if<InverseOf>(&ax)) {
      if (o.is_data_property(inv->first) || o.is_data_property(inv->second)) {
        flag(i, violation::kDataPropertyInverse, "InverseOf over a data property");
      }
    }
  }
  report.conformant = report.violations.empty();
  return report;
}

Ontology ql_fragment(const Ontology& o) {
  Ontology out = o;
  std::erase_if(out.tbox, [](const Axiom& a) { return std::holds_alternative<ConditionalType>(a); });
  return out;
}

}  // namespace ose
