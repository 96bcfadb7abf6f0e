#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "ose/error.hpp"
#include "ose/reasoner.hpp"
#include "ose/rewrite.hpp"

namespace ose {

namespace {

struct Relation {
  std::set<std::pair<std::string, std::string>> pairs;
  std::unordered_map<std::string, std::vector<std::string>> by_subject;
  std::unordered_map<std::string, std::vector<std::string>> by_object;

  bool add(const std::string& s, const std::string& o) {
    if (!pairs.emplace(s, o).second) return false;
    by_subject[s].push_back(o);
    by_object[o].push_back(s);
    return true;
  }
};

struct FactBase {
  std::map<std::string, std::set<std::string>> unary;
  std::map<std::string, Relation> binary;
  std::unordered_set<std::string> nulls;

  void load(std::span<const Assertion> facts) {
    for (const auto& a : facts) {
      if (const auto* c = std::get_if<ClassAssertion>(&a)) {
        unary[c->cls].insert(c->individual);
      } else if (const auto* op = std::get_if<ObjectAssertion>(&a)) {
        binary[op->property].add(op->subject, op->object);
      } else if (const auto* dp = std::get_if<DataAssertion>(&a)) {
        binary[dp->property].add(dp->subject, dp->value);
      }
    }
  }

  bool add_role(const Role& r, const std::string& x, const std::string& y) {
    return r.inverse ? binary[r.name].add(y, x) : binary[r.name].add(x, y);
  }

  // Members of basic concept `b`.
  std::vector<std::string> members(const ClassExpr& b) const {
    std::vector<std::string> out;
    if (b.kind == ClassExpr::Kind::Named) {
      if (auto it = unary.find(b.name); it != unary.end()) out.assign(it->second.begin(), it->second.end());
      return out;
    }
    auto it = binary.find(b.name);
    if (it == binary.end()) return out;
    const auto& index = b.kind == ClassExpr::Kind::Exists ? it->second.by_subject : it->second.by_object;
    out.reserve(index.size());
    for (const auto& [k, v] : index) out.push_back(k);
    std::sort(out.begin(), out.end());
    return out;
  }

  bool has(const ClassExpr& b, const std::string& x) const {
    if (b.kind == ClassExpr::Kind::Named) {
      auto it = unary.find(b.name);
      return it != unary.end() && it->second.contains(x);
    }
    auto it = binary.find(b.name);
    if (it == binary.end()) return false;
    const auto& index = b.kind == ClassExpr::Kind::Exists ? it->second.by_subject : it->second.by_object;
    return index.contains(x);
  }
};

class Matcher {
 public:
  Matcher(const ConjunctiveQuery& q, const FactBase& facts) : q_(q), facts_(facts) { plan(); }

  ResultSet run() {
    ResultSet r;
    r.arity = q_.head.size();
    std::map<std::string, std::string> binding;
    search(0, binding, r);
    return r;
  }

 private:
  // Orders atoms so each one shares a variable with an earlier one when
  // possible, constants first.
  void plan() {
    std::vector<bool> taken(q_.atoms.size(), false);
    std::set<std::string> bound;
    for (std::size_t step = 0; step < q_.atoms.size(); ++step) {
      int best = -1;
      int best_score = -1;
      for (std::size_t i = 0; i < q_.atoms.size(); ++i) {
        if (taken[i]) continue;
        int score = 0;
        for (const auto& t : q_.atoms[i].args) {
          if (!t.is_var() || bound.contains(t.name)) score += 2;
        }
        if (score > best_score) {
          best_score = score;
          best = static_cast<int>(i);
        }
      }
      taken[best] = true;
      order_.push_back(best);
      for (const auto& t : q_.atoms[best].args) {
        if (t.is_var()) bound.insert(t.name);
      }
    }
  }

  static bool bind(std::map<std::string, std::string>& b, const Term& t, const std::string& value,
                   std::vector<std::string>& added) {
    if (!t.is_var()) return t.name == value;
    auto [it, inserted] = b.try_emplace(t.name, value);
    if (inserted) {
      added.push_back(t.name);
      return true;
    }
    return it->second == value;
  }

  void search(std::size_t step, std::map<std::string, std::string>& b, ResultSet& r) {
    if (step == order_.size()) {
      std::vector<std::string> row;
      for (const auto& h : q_.head) {
        const std::string& v = h.is_var() ? b.at(h.name) : h.name;
        if (facts_.nulls.contains(v)) return;
        row.push_back(v);
      }
      r.rows.insert(std::move(row));
      return;
    }
    const Atom& a = q_.atoms[order_[step]];
    auto value_of = [&](const Term& t) -> const std::string* {
      if (!t.is_var()) return &t.name;
      auto it = b.find(t.name);
      return it == b.end() ? nullptr : &it->second;
    };
    auto try_candidate = [&](const std::vector<std::pair<const Term*, const std::string*>>& assign) {
      std::vector<std::string> added;
      bool ok = true;
      for (const auto& [t, v] : assign) {
        if (!bind(b, *t, *v, added)) {
          ok = false;
          break;
        }
      }
      if (ok) search(step + 1, b, r);
      for (const auto& n : added) b.erase(n);
    };

    if (a.kind == Atom::Kind::Class) {
      auto it = facts_.unary.find(a.predicate);
      if (it == facts_.unary.end()) return;
      if (const std::string* v = value_of(a.args[0])) {
        if (it->second.contains(*v)) search(step + 1, b, r);
        return;
      }
      for (const auto& m : it->second) try_candidate({{&a.args[0], &m}});
      return;
    }
    auto it = facts_.binary.find(a.predicate);
    if (it == facts_.binary.end()) return;
    const Relation& rel = it->second;
    const std::string* s = value_of(a.args[0]);
    const std::string* o = value_of(a.args[1]);
    if (s != nullptr && o != nullptr) {
      if (rel.pairs.contains({*s, *o})) search(step + 1, b, r);
    } else if (s != nullptr) {
      auto jt = rel.by_subject.find(*s);
      if (jt == rel.by_subject.end()) return;
      const std::vector<std::string> objects = jt->second;
      for (const auto& obj : objects) try_candidate({{&a.args[1], &obj}});
    } else if (o != nullptr) {
      auto jt = rel.by_object.find(*o);
      if (jt == rel.by_object.end()) return;
      const std::vector<std::string> subjects = jt->second;
      for (const auto& subj : subjects) try_candidate({{&a.args[0], &subj}});
    } else {
      for (const auto& [x, y] : rel.pairs) try_candidate({{&a.args[0], &x}, {&a.args[1], &y}});
    }
  }

  const ConjunctiveQuery& q_;
  const FactBase& facts_;
  std::vector<int> order_;
};

class Chase {
 public:
  Chase(const Ontology& o, std::size_t budget) : tbox_(normalize(o)), taxonomy_(o), budget_(budget) {}

  FactBase run(const Ontology& o) {
    facts_.load(o.abox);
    for (const auto& a : o.abox) {
      budget_of_.try_emplace(subject_of(a), budget_);
      if (const auto* op = std::get_if<ObjectAssertion>(&a)) budget_of_.try_emplace(op->object, budget_);
    }
    for (const auto& i : o.individuals) budget_of_.try_emplace(i, budget_);
    add_islands(o);
    saturate();
    return std::move(facts_);
  }

 private:
  std::string fresh(std::size_t budget) {
    std::string n = "\x01n" + std::to_string(next_null_++);
    facts_.nulls.insert(n);
    budget_of_[n] = budget;
    return n;
  }

  // Basic concepts some element of every model satisfies, closed under the
  // taxonomy and under the type each existential successor receives.
  void add_islands(const Ontology& o) {
    std::set<ClassExpr> realized;
    std::deque<ClassExpr> work;
    auto realize = [&](const ClassExpr& e) {
      for (const auto& s : taxonomy_.supers(e)) {
        if (realized.insert(s).second) work.push_back(s);
      }
      if (realized.insert(e).second) work.push_back(e);
    };
    for (const auto& [cls, members] : facts_.unary) {
      if (!members.empty()) realize(ClassExpr::named(cls));
    }
    for (const auto& [p, rel] : facts_.binary) {
      if (rel.pairs.empty()) continue;
      realize(ClassExpr::exists(p));
      if (o.is_object_property(p)) realize(ClassExpr::exists_inverse(p));
    }
    while (!work.empty()) {
      const ClassExpr e = work.front();
      work.pop_front();
      if (e.kind == ClassExpr::Kind::Exists && o.is_object_property(e.name)) {
        realize(ClassExpr::exists_inverse(e.name));
      } else if (e.kind == ClassExpr::Kind::ExistsInverse) {
        realize(ClassExpr::exists(e.name));
      }
    }
    for (const auto& e : realized) {
      if (e.kind == ClassExpr::Kind::Named) continue;
      const Role r{e.name, e.kind == ClassExpr::Kind::ExistsInverse};
      const std::string parent = fresh(0);
      const std::string child = fresh(budget_);
      facts_.add_role(r, parent, child);
    }
  }

  bool deterministic_pass() {
    bool changed = false;
    for (const auto& ri : tbox_.roles) {
      auto it = facts_.binary.find(ri.sub.name);
      if (it == facts_.binary.end()) continue;
      const auto pairs = it->second.pairs;
      for (const auto& [s, o] : pairs) {
        const auto& [x, y] = ri.sub.inverse ? std::pair{o, s} : std::pair{s, o};
        changed |= facts_.add_role(ri.super, x, y);
      }
    }
    for (const auto& ci : tbox_.concepts) {
      if (ci.super.kind != ClassExpr::Kind::Named) continue;
      for (const auto& x : facts_.members(ci.sub)) changed |= facts_.unary[ci.super.name].insert(x).second;
    }
    return changed;
  }

  bool existential_pass() {
    bool changed = false;
    for (const auto& ci : tbox_.concepts) {
      if (ci.super.kind == ClassExpr::Kind::Named) continue;
      const Role r{ci.super.name, ci.super.kind == ClassExpr::Kind::ExistsInverse};
      for (const auto& x : facts_.members(ci.sub)) {
        if (facts_.has(ci.super, x)) continue;
        const std::size_t b = budget_of_.contains(x) ? budget_of_[x] : 0;
        if (b == 0) continue;
        facts_.add_role(r, x, fresh(b - 1));
        changed = true;
      }
    }
    return changed;
  }

  void saturate() {
    do {
      while (deterministic_pass()) {
      }
    } while (existential_pass());
  }

  NormalizedTBox tbox_;
  TaxonomyClosure taxonomy_;
  std::size_t budget_;
  FactBase facts_;
  std::unordered_map<std::string, std::size_t> budget_of_;
  std::size_t next_null_ = 0;
};

}  // namespace

ResultSet evaluate_cq(const ConjunctiveQuery& q, std::span<const Assertion> facts) {
  FactBase fb;
  fb.load(facts);
  return Matcher(q, fb).run();
}

ResultSet chase_oracle(const ConjunctiveQuery& q, const Ontology& o) {
  if (o.abox.size() > kChaseAboxLimit) {
    throw Error(ErrorCode::InstanceTooLarge, "ABox has " + std::to_string(o.abox.size()) +
                                                 " assertions, limit is " + std::to_string(kChaseAboxLimit));
  }
  for (const auto& ax : o.tbox) {
    if (std::holds_alternative<ConditionalType>(ax)) {
      throw Error(ErrorCode::NonQLAxiomEncountered, "ConditionalType axioms are outside the chase");
    }
  }
  const FactBase facts = Chase(o, q.atoms.size() + 1).run(o);
  return Matcher(q, facts).run();
}

}  // namespace ose
