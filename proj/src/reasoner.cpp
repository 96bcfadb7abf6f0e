#include "ose/reasoner.hpp"

#include <algorithm>
#include <deque>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

namespace ose {

NormalizedTBox normalize(const Ontology& o) {
  NormalizedTBox t;
  auto add_role = [&](Role sub, Role super) {
    t.roles.push_back({sub, super});
    if (o.is_object_property(sub.name) && o.is_object_property(super.name)) {
      t.roles.push_back({sub.inverted(), super.inverted()});
    }
  };
  for (const Axiom& ax : o.tbox) {
    if (const auto* s = std::get_if<SubClassOf>(&ax)) {
      t.concepts.push_back({s->sub, s->super});
    } else if (const auto* p = std::get_if<SubPropertyOf>(&ax)) {
      add_role({p->sub, false}, {p->super, false});
    } else if (const auto* d = std::get_if<Domain>(&ax)) {
      t.concepts.push_back({ClassExpr::exists(d->property), ClassExpr::named(d->cls)});
    } else if (const auto* r = std::get_if<Range>(&ax)) {
      t.concepts.push_back({ClassExpr::exists_inverse(r->property), ClassExpr::named(r->cls)});
    } else if (const auto* inv = std::get_if<InverseOf>(&ax)) {
      add_role({inv->first, false}, {inv->second, true});
      add_role({inv->second, false}, {inv->first, true});
    } else if (const auto* dj = std::get_if<DisjointClasses>(&ax)) {
      t.disjoint.push_back(*dj);
    } else if (const auto* ct = std::get_if<ConditionalType>(&ax)) {
      t.rules.push_back(*ct);
    }
  }
  std::sort(t.concepts.begin(), t.concepts.end());
  t.concepts.erase(std::unique(t.concepts.begin(), t.concepts.end()), t.concepts.end());
  std::sort(t.roles.begin(), t.roles.end());
  t.roles.erase(std::unique(t.roles.begin(), t.roles.end()), t.roles.end());
  return t;
}

namespace {

template <typename Node>
std::map<Node, std::set<Node>> transitive_closure(const std::set<Node>& nodes,
                                                  const std::multimap<Node, Node>& edges) {
  std::map<Node, std::set<Node>> out;
  for (const Node& start : nodes) {
    std::set<Node>& reached = out[start];
    std::deque<Node> work{start};
    reached.insert(start);
    while (!work.empty()) {
      Node n = work.front();
      work.pop_front();
      auto [lo, hi] = edges.equal_range(n);
      for (auto it = lo; it != hi; ++it) {
        if (reached.insert(it->second).second) work.push_back(it->second);
      }
    }
  }
  return out;
}

}  // namespace

TaxonomyClosure::TaxonomyClosure(const Ontology& o) {
  const NormalizedTBox t = normalize(o);

  std::set<Role> roles;
  for (const auto& p : o.object_properties) {
    roles.insert({p, false});
    roles.insert({p, true});
  }
  for (const auto& p : o.data_properties) roles.insert({p, false});
  std::multimap<Role, Role> role_edges;
  for (const auto& ri : t.roles) {
    roles.insert(ri.sub);
    roles.insert(ri.super);
    role_edges.emplace(ri.sub, ri.super);
  }
  role_supers_ = transitive_closure(roles, role_edges);

  std::set<ClassExpr> concepts;
  for (const auto& c : o.classes) concepts.insert(ClassExpr::named(c));
  for (const auto& r : roles) concepts.insert(r.existential());
  std::multimap<ClassExpr, ClassExpr> concept_edges;
  for (const auto& ci : t.concepts) {
    concepts.insert(ci.sub);
    concepts.insert(ci.super);
    concept_edges.emplace(ci.sub, ci.super);
  }
  for (const auto& ri : t.roles) {
    concept_edges.emplace(ri.sub.existential(), ri.super.existential());
  }
  concept_supers_ = transitive_closure(concepts, concept_edges);
}

bool TaxonomyClosure::subsumes(const ClassExpr& sub, const ClassExpr& super) const {
  if (sub == super) return true;
  auto it = concept_supers_.find(sub);
  return it != concept_supers_.end() && it->second.contains(super);
}

bool TaxonomyClosure::subsumes(const Role& sub, const Role& super) const {
  if (sub == super) return true;
  auto it = role_supers_.find(sub);
  return it != role_supers_.end() && it->second.contains(super);
}

const std::set<ClassExpr>& TaxonomyClosure::supers(const ClassExpr& e) const {
  static const std::set<ClassExpr> kEmpty;
  auto it = concept_supers_.find(e);
  return it == concept_supers_.end() ? kEmpty : it->second;
}

const std::set<Role>& TaxonomyClosure::supers(const Role& r) const {
  static const std::set<Role> kEmpty;
  auto it = role_supers_.find(r);
  return it == role_supers_.end() ? kEmpty : it->second;
}

std::set<std::string> TaxonomyClosure::named_supers(const ClassExpr& e) const {
  std::set<std::string> out;
  for (const auto& s : supers(e)) {
    if (s.kind == ClassExpr::Kind::Named) out.insert(s.name);
  }
  return out;
}

std::set<ConceptInclusion> TaxonomyClosure::concept_pairs() const {
  std::set<ConceptInclusion> out;
  for (const auto& [sub, sups] : concept_supers_) {
    for (const auto& s : sups) out.insert({sub, s});
  }
  return out;
}

std::set<RoleInclusion> TaxonomyClosure::role_pairs() const {
  std::set<RoleInclusion> out;
  for (const auto& [sub, sups] : role_supers_) {
    for (const auto& s : sups) out.insert({sub, s});
  }
  return out;
}

TaxonomyClosure closure(const Ontology& o) { return TaxonomyClosure(o); }

Ontology materialize_closure(const Ontology& o) {
  Ontology out = o;
  std::set<Axiom> present(o.tbox.begin(), o.tbox.end());
  const TaxonomyClosure c(o);
  auto add = [&](Axiom ax) {
    if (present.insert(ax).second) out.tbox.push_back(std::move(ax));
  };
  for (const auto& ci : c.concept_pairs()) {
    if (ci.sub != ci.super) add(SubClassOf{ci.sub, ci.super});
  }
  for (const auto& ri : c.role_pairs()) {
    if (ri.sub != ri.super && !ri.sub.inverse && !ri.super.inverse) {
      add(SubPropertyOf{ri.sub.name, ri.super.name});
    }
  }
  return out;
}

namespace {

// Working set of facts during saturation.
struct FactBase {
  std::map<std::string, std::set<std::string>> types;
  std::set<std::tuple<std::string, std::string, std::string>> objects;  // (p, s, o)
  std::set<std::tuple<std::string, std::string, std::string>> data;     // (p, s, v)

  bool add_type(const std::string& ind, const std::string& cls) {
    return types[ind].insert(cls).second;
  }
};

}  // namespace

Ontology saturate_abox(const Ontology& o) {
  const TaxonomyClosure c(o);
  const NormalizedTBox t = normalize(o);

  FactBase fb;
  for (const auto& a : o.abox) {
    if (const auto* ca = std::get_if<ClassAssertion>(&a)) {
      fb.add_type(ca->individual, ca->cls);
    } else if (const auto* oa = std::get_if<ObjectAssertion>(&a)) {
      fb.objects.emplace(oa->property, oa->subject, oa->object);
    } else if (const auto* da = std::get_if<DataAssertion>(&a)) {
      fb.data.emplace(da->property, da->subject, da->value);
    }
  }

  // Role hierarchy is closed, so one pass over the asserted role facts suffices.
  for (const auto& [p, s, v] : std::set(fb.objects)) {
    for (const Role& r : c.supers(Role{p, false})) {
      if (r.inverse) {
        fb.objects.emplace(r.name, v, s);
      } else {
        fb.objects.emplace(r.name, s, v);
      }
    }
  }
  for (const auto& [p, s, v] : std::set(fb.data)) {
    for (const Role& r : c.supers(Role{p, false})) {
      if (!r.inverse && o.is_data_property(r.name)) fb.data.emplace(r.name, s, v);
    }
  }

  auto type_with = [&](const std::string& ind, const ClassExpr& e) {
    for (const auto& n : c.named_supers(e)) fb.add_type(ind, n);
  };
  for (const auto& [p, s, v] : fb.objects) {
    type_with(s, ClassExpr::exists(p));
    type_with(v, ClassExpr::exists_inverse(p));
  }
  for (const auto& [p, s, v] : fb.data) type_with(s, ClassExpr::exists(p));

  // Predecessors along an object property: (p, object) -> subjects.
  std::map<std::pair<std::string, std::string>, std::vector<std::string>> preds;
  for (const auto& [p, s, v] : fb.objects) preds[{p, v}].push_back(s);

  bool changed = true;
  while (changed) {
    changed = false;
    for (auto& [ind, classes] : fb.types) {
      for (const auto& cls : std::set(classes)) {
        for (const auto& n : c.named_supers(ClassExpr::named(cls))) {
          changed |= classes.insert(n).second;
        }
      }
    }
    for (const auto& rule : t.rules) {
      std::vector<std::string> heads;
      for (const auto& [ind, classes] : fb.types) {
        if (!classes.contains(rule.body_class)) continue;
        const bool matches = fb.data.contains({rule.property, ind, rule.value}) ||
                             fb.objects.contains({rule.property, ind, rule.value});
        if (!matches) continue;
        std::set<std::string> frontier{ind};
        for (auto l = rule.link.rbegin(); l != rule.link.rend(); ++l) {
          std::set<std::string> next;
          for (const auto& z : frontier) {
            auto it = preds.find({*l, z});
            if (it != preds.end()) next.insert(it->second.begin(), it->second.end());
          }
          frontier = std::move(next);
        }
        heads.insert(heads.end(), frontier.begin(), frontier.end());
      }
      for (const auto& h : heads) changed |= fb.add_type(h, rule.head_class);
    }
  }

  Ontology out = o;
  std::set<Assertion> present(o.abox.begin(), o.abox.end());
  std::vector<Assertion> added;
  for (const auto& [ind, classes] : fb.types) {
    for (const auto& cls : classes) added.emplace_back(ClassAssertion{ind, cls});
  }
  for (const auto& [p, s, v] : fb.objects) added.emplace_back(ObjectAssertion{s, p, v});
  for (const auto& [p, s, v] : fb.data) added.emplace_back(DataAssertion{s, p, v});
  for (auto& a : added) {
    if (!present.contains(a)) out.abox.push_back(std::move(a));
  }
  return out;
}

bool check_consistency(const Ontology& o) {
  const Ontology sat = saturate_abox(o);
  std::map<std::string, std::set<std::string>> types;
  for (const auto& a : sat.abox) {
    if (const auto* ca = std::get_if<ClassAssertion>(&a)) types[ca->individual].insert(ca->cls);
  }
  for (const auto& ax : o.tbox) {
    const auto* dj = std::get_if<DisjointClasses>(&ax);
    if (dj == nullptr) continue;
    for (const auto& [ind, classes] : types) {
      if (classes.contains(dj->first) && classes.contains(dj->second)) return false;
    }
  }
  return true;
}

}  // namespace ose
