#pragma once

#include <compare>
#include <cstddef>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace ose {

/// Basic class expression of the QL fragment: a named class or an
/// unqualified existential over a property (or its inverse).
struct ClassExpr {
  enum class Kind { Named, Exists, ExistsInverse };

  Kind kind = Kind::Named;
  std::string name;

  static ClassExpr named(std::string n) { return {Kind::Named, std::move(n)}; }
  static ClassExpr exists(std::string p) { return {Kind::Exists, std::move(p)}; }
  static ClassExpr exists_inverse(std::string p) {
    return {Kind::ExistsInverse, std::move(p)};
  }

  auto operator<=>(const ClassExpr&) const = default;
};

std::string to_string(const ClassExpr& e);

struct SubClassOf {
  ClassExpr sub;
  ClassExpr super;
  auto operator<=>(const SubClassOf&) const = default;
};

struct SubPropertyOf {
  std::string sub;
  std::string super;
  auto operator<=>(const SubPropertyOf&) const = default;
};

struct Domain {
  std::string property;
  std::string cls;
  auto operator<=>(const Domain&) const = default;
};

struct Range {
  std::string property;
  std::string cls;
  auto operator<=>(const Range&) const = default;
};

struct InverseOf {
  std::string first;
  std::string second;
  auto operator<=>(const InverseOf&) const = default;
};

struct DisjointClasses {
  std::string first;
  std::string second;
  auto operator<=>(const DisjointClasses&) const = default;
};

/// Non-QL rule: any x in `body_class` with `property(x, value)` makes every
/// individual reaching x backwards along `link` an instance of `head_class`.
/// An empty link puts the head class on x itself. Only saturation consumes it.
struct ConditionalType {
  std::string body_class;
  std::string property;
  std::string value;
  std::string head_class;
  std::vector<std::string> link;
  auto operator<=>(const ConditionalType&) const = default;
};

using Axiom = std::variant<SubClassOf, SubPropertyOf, Domain, Range, InverseOf,
                           DisjointClasses, ConditionalType>;

struct ClassAssertion {
  std::string individual;
  std::string cls;
  auto operator<=>(const ClassAssertion&) const = default;
};

struct ObjectAssertion {
  std::string subject;
  std::string property;
  std::string object;
  auto operator<=>(const ObjectAssertion&) const = default;
};

struct DataAssertion {
  std::string subject;
  std::string property;
  std::string value;
  auto operator<=>(const DataAssertion&) const = default;
};

using Assertion = std::variant<ClassAssertion, ObjectAssertion, DataAssertion>;

struct Ontology {
  std::set<std::string> classes;
  std::set<std::string> object_properties;
  std::set<std::string> data_properties;
  std::set<std::string> individuals;
  std::vector<Axiom> tbox;
  std::vector<Assertion> abox;

  bool is_class(std::string_view n) const { return classes.contains(std::string(n)); }
  bool is_object_property(std::string_view n) const {
    return object_properties.contains(std::string(n));
  }
  bool is_data_property(std::string_view n) const {
    return data_properties.contains(std::string(n));
  }
  bool is_property(std::string_view n) const {
    return is_object_property(n) || is_data_property(n);
  }
  bool is_individual(std::string_view n) const {
    return individuals.contains(std::string(n));
  }
  /// True when `n` is declared in any vocabulary set.
  bool declares(std::string_view n) const {
    return is_class(n) || is_property(n) || is_individual(n);
  }

  bool operator==(const Ontology&) const = default;
};

/// Parses the line-oriented functional syntax. Statements may share a line;
/// `#` starts a comment. Declarations may follow their first use.
/// Throws SyntaxError, or Error with UndeclaredName / DuplicateDeclaration.
Ontology parse_ontology(std::string_view text);

/// Parses `text` as an extension of `base`: names declared in `base` resolve,
/// new declarations and statements are appended.
Ontology parse_ontology(std::string_view text, const Ontology& base);

Ontology load_ontology_file(const std::string& path);

/// Canonical concrete syntax; parse_ontology(print_ontology(o)) == o.
std::string print_ontology(const Ontology& o);

std::string to_string(const Axiom& a);
std::string to_string(const Assertion& a);

/// Name of the individual an assertion is about (its subject).
const std::string& subject_of(const Assertion& a);

struct ProfileViolation {
  std::size_t axiom_index;
  std::string code;
  std::string message;
  bool operator==(const ProfileViolation&) const = default;
};

struct ProfileReport {
  bool conformant = true;
  std::vector<ProfileViolation> violations;
};

namespace violation {
inline constexpr std::string_view kConditionalType = "NON_QL_CONDITIONAL_TYPE";
inline constexpr std::string_view kDataPropertyInverse = "NON_QL_DATA_PROPERTY_INVERSE";
inline constexpr std::string_view kDataPropertyClassRange = "NON_QL_DATA_PROPERTY_CLASS_RANGE";
inline constexpr std::string_view kMixedPropertyInclusion = "NON_QL_MIXED_PROPERTY_INCLUSION";
}  // namespace violation

ProfileReport validate_ql_profile(const Ontology& o);

/// Copy of `o` with every ConditionalType axiom removed.
Ontology ql_fragment(const Ontology& o);

}  // namespace ose
