#pragma once

#include <compare>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ose/ontology.hpp"

namespace ose {

/// A property or its inverse.
struct Role {
  std::string name;
  bool inverse = false;

  Role inverted() const { return {name, !inverse}; }
  /// The existential ∃R as a class expression.
  ClassExpr existential() const {
    return inverse ? ClassExpr::exists_inverse(name) : ClassExpr::exists(name);
  }
  auto operator<=>(const Role&) const = default;
};

struct ConceptInclusion {
  ClassExpr sub;
  ClassExpr super;
  auto operator<=>(const ConceptInclusion&) const = default;
};

struct RoleInclusion {
  Role sub;
  Role super;
  auto operator<=>(const RoleInclusion&) const = default;
};

/// TBox rewritten into positive inclusions between basic concepts and basic
/// roles. Role inclusions over object properties are closed under inversion
/// (R ⊑ S implies R⁻ ⊑ S⁻), and InverseOf(p, q) contributes p ⊑ q⁻, q ⊑ p⁻.
struct NormalizedTBox {
  std::vector<ConceptInclusion> concepts;
  std::vector<RoleInclusion> roles;
  std::vector<DisjointClasses> disjoint;
  std::vector<ConditionalType> rules;
};

NormalizedTBox normalize(const Ontology& o);

/// Reflexive-transitive closure of concept and role inclusion. Role
/// inclusions feed concept inclusion through their existentials, so
/// Domain(p, C) yields Exists(p) ⊑ C and p ⊑ q yields Exists(p) ⊑ Exists(q).
class TaxonomyClosure {
 public:
  explicit TaxonomyClosure(const Ontology& o);

  bool subsumes(const ClassExpr& sub, const ClassExpr& super) const;
  bool subsumes(const Role& sub, const Role& super) const;

  /// Every super-expression of `e` (including `e`). Empty for unknown nodes.
  const std::set<ClassExpr>& supers(const ClassExpr& e) const;
  const std::set<Role>& supers(const Role& r) const;
  /// Named classes among supers(e).
  std::set<std::string> named_supers(const ClassExpr& e) const;

  std::set<ConceptInclusion> concept_pairs() const;
  std::set<RoleInclusion> role_pairs() const;

  bool operator==(const TaxonomyClosure&) const = default;

 private:
  std::map<ClassExpr, std::set<ClassExpr>> concept_supers_;
  std::map<Role, std::set<Role>> role_supers_;
};

TaxonomyClosure closure(const Ontology& o);

/// `o` plus every inferred SubClassOf and (non-inverse) SubPropertyOf from
/// its closure that is not already stated.
Ontology materialize_closure(const Ontology& o);

/// Least fixpoint of subclass/subproperty propagation, domain/range typing,
/// inverse completion and ConditionalType firing over named individuals.
/// Original assertions keep their order; entailed ones follow, sorted.
Ontology saturate_abox(const Ontology& o);

/// False iff some DisjointClasses pair shares an instance after saturation.
bool check_consistency(const Ontology& o);

}  // namespace ose
