#include "ose/rewrite.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <numeric>
#include <optional>
#include <set>

#include "ose/error.hpp"
#include "ose/reasoner.hpp"
#include "ose/sql.hpp"

namespace ose {

namespace {

constexpr std::size_t kExhaustiveCanonicalLimit = 6;

std::set<std::string> head_vars(const ConjunctiveQuery& q) {
  std::set<std::string> out;
  for (const auto& t : q.head) {
    if (t.is_var()) out.insert(t.name);
  }
  return out;
}

std::vector<Atom> rename_in_order(const std::vector<Atom>& atoms, const std::vector<std::size_t>& order,
                                  const std::set<std::string>& keep) {
  std::map<std::string, std::string> names;
  std::vector<Atom> out;
  out.reserve(atoms.size());
  for (std::size_t idx : order) {
    Atom a = atoms[idx];
    for (auto& t : a.args) {
      if (!t.is_var() || keep.contains(t.name)) continue;
      auto [it, inserted] = names.try_emplace(t.name, "");
      if (inserted) it->second = "~" + std::to_string(names.size() - 1);
      t.name = it->second;
    }
    out.push_back(std::move(a));
  }
  return out;
}

// Atom with non-head variables blanked, used to order atoms before renaming
// when there are too many for the exhaustive search.
Atom shape(const Atom& a, const std::set<std::string>& keep) {
  Atom s = a;
  for (auto& t : s.args) {
    if (t.is_var() && !keep.contains(t.name)) t.name = "~";
  }
  return s;
}

}  // namespace

ConjunctiveQuery canonicalize(const ConjunctiveQuery& q) {
  ConjunctiveQuery out;
  out.head = q.head;
  std::vector<Atom> atoms = q.atoms;
  std::sort(atoms.begin(), atoms.end());
  atoms.erase(std::unique(atoms.begin(), atoms.end()), atoms.end());
  const std::set<std::string> keep = head_vars(q);

  std::vector<std::size_t> order(atoms.size());
  std::iota(order.begin(), order.end(), 0);
  if (atoms.size() <= kExhaustiveCanonicalLimit) {
    std::vector<Atom> best = rename_in_order(atoms, order, keep);
    while (std::next_permutation(order.begin(), order.end())) {
      std::vector<Atom> candidate = rename_in_order(atoms, order, keep);
      if (candidate < best) best = std::move(candidate);
    }
    out.atoms = std::move(best);
  } else {
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return shape(atoms[a], keep) < shape(atoms[b], keep);
    });
    out.atoms = rename_in_order(atoms, order, keep);
  }
  return out;
}

namespace {

class Rewriter {
 public:
  explicit Rewriter(const Ontology& o) : tbox_(normalize(o)) {}

  UnionOfCQs run(const ConjunctiveQuery& q) {
    add(q);
    while (!work_.empty()) {
      const ConjunctiveQuery current = std::move(work_.front());
      work_.pop_front();
      for (std::size_t i = 0; i < current.atoms.size(); ++i) {
        for (Atom& replacement : rewrite_atom(current, i)) {
          ConjunctiveQuery next = current;
          next.atoms[i] = std::move(replacement);
          add(next);
        }
      }
      for (std::size_t i = 0; i < current.atoms.size(); ++i) {
        for (std::size_t j = i + 1; j < current.atoms.size(); ++j) {
          if (auto reduced = reduce(current, i, j)) add(*reduced);
        }
      }
    }
    return {std::move(result_)};
  }

 private:
  void add(const ConjunctiveQuery& q) {
    ConjunctiveQuery c = canonicalize(q);
    if (seen_.insert(c).second) {
      result_.push_back(c);
      work_.push_back(std::move(c));
    }
  }

  Term fresh() { return Term::var("~f" + std::to_string(fresh_++)); }

  static bool unbound(const ConjunctiveQuery& q, const Term& t) {
    if (!t.is_var()) return false;
    for (const auto& h : q.head) {
      if (h == t) return false;
    }
    std::size_t count = 0;
    for (const auto& a : q.atoms) {
      for (const auto& x : a.args) {
        if (x == t) ++count;
      }
    }
    return count == 1;
  }

  // The atom asserting basic concept `b` of `t`.
  Atom concept_atom(const ClassExpr& b, const Term& t) {
    switch (b.kind) {
      case ClassExpr::Kind::Named: return Atom::cls(b.name, t);
      case ClassExpr::Kind::Exists: return Atom::property(b.name, t, fresh());
      case ClassExpr::Kind::ExistsInverse: return Atom::property(b.name, fresh(), t);
    }
    return Atom::cls(b.name, t);
  }

  std::vector<Atom> rewrite_atom(const ConjunctiveQuery& q, std::size_t i) {
    const Atom& g = q.atoms[i];
    std::vector<Atom> out;
    if (g.kind == Atom::Kind::Class) {
      const ClassExpr target = ClassExpr::named(g.predicate);
      for (const auto& ci : tbox_.concepts) {
        if (ci.super == target) out.push_back(concept_atom(ci.sub, g.args[0]));
      }
      return out;
    }
    if (unbound(q, g.args[1])) {
      const ClassExpr target = ClassExpr::exists(g.predicate);
      for (const auto& ci : tbox_.concepts) {
        if (ci.super == target) out.push_back(concept_atom(ci.sub, g.args[0]));
      }
    }
    if (unbound(q, g.args[0])) {
      const ClassExpr target = ClassExpr::exists_inverse(g.predicate);
      for (const auto& ci : tbox_.concepts) {
        if (ci.super == target) out.push_back(concept_atom(ci.sub, g.args[1]));
      }
    }
    const Role target{g.predicate, false};
    for (const auto& ri : tbox_.roles) {
      if (ri.super != target) continue;
      if (ri.sub.inverse) {
        out.push_back(Atom::property(ri.sub.name, g.args[1], g.args[0]));
      } else {
        out.push_back(Atom::property(ri.sub.name, g.args[0], g.args[1]));
      }
    }
    return out;
  }

  static std::optional<ConjunctiveQuery> reduce(const ConjunctiveQuery& q, std::size_t i, std::size_t j) {
    const Atom& a = q.atoms[i];
    const Atom& b = q.atoms[j];
    if (a.kind != b.kind || a.predicate != b.predicate) return std::nullopt;
    const std::set<std::string> keep = head_vars(q);

    std::map<std::string, Term> subst;
    auto resolve = [&](Term t) {
      while (t.is_var()) {
        auto it = subst.find(t.name);
        if (it == subst.end()) break;
        t = it->second;
      }
      return t;
    };
    for (std::size_t k = 0; k < a.args.size(); ++k) {
      const Term x = resolve(a.args[k]);
      const Term y = resolve(b.args[k]);
      if (x == y) continue;
      if (!x.is_var() && !y.is_var()) return std::nullopt;
      if (!x.is_var()) {
        subst[y.name] = x;
      } else if (!y.is_var()) {
        subst[x.name] = y;
      } else if (keep.contains(y.name) && !keep.contains(x.name)) {
        subst[x.name] = y;
      } else {
        subst[y.name] = x;
      }
    }

    ConjunctiveQuery out;
    for (const auto& t : q.head) out.head.push_back(resolve(t));
    for (std::size_t k = 0; k < q.atoms.size(); ++k) {
      if (k == j) continue;
      Atom atom = q.atoms[k];
      for (auto& t : atom.args) t = resolve(t);
      out.atoms.push_back(std::move(atom));
    }
    return out;
  }

  NormalizedTBox tbox_;
  std::set<ConjunctiveQuery> seen_;
  std::vector<ConjunctiveQuery> result_;
  std::deque<ConjunctiveQuery> work_;
  std::size_t fresh_ = 0;
};

void require_ql(const Ontology& o) {
  const ProfileReport report = validate_ql_profile(o);
  if (!report.conformant) {
    const auto& v = report.violations.front();
    throw Error(ErrorCode::NonQLAxiomEncountered,
                "axiom #" + std::to_string(v.axiom_index) + " (" + v.code + "): " + v.message);
  }
}

}  // namespace

UnionOfCQs perfect_rewrite(const ConjunctiveQuery& q, const Ontology& o) {
  require_ql(o);
  return Rewriter(o).run(q);
}

SqlText compile_to_sql(const UnionOfCQs& u, const Mapping& m) {
  if (u.disjuncts.empty()) throw Error(ErrorCode::InvalidParams, "empty union of queries");
  std::string sql;
  for (std::size_t d = 0; d < u.disjuncts.size(); ++d) {
    const ConjunctiveQuery& q = u.disjuncts[d];
    std::map<std::string, std::string> first;
    std::vector<std::string> from;
    std::vector<std::string> where;
    for (std::size_t i = 0; i < q.atoms.size(); ++i) {
      const Atom& a = q.atoms[i];
      const std::string alias = "t" + std::to_string(i);
      std::string table;
      std::vector<std::string> cols;
      if (a.kind == Atom::Kind::Class) {
        auto it = m.class_map.find(a.predicate);
        if (it == m.class_map.end()) {
          throw Error(ErrorCode::UnmappedSymbol, "class '" + a.predicate + "' is not mapped");
        }
        table = it->second;
        cols = {"id"};
      } else {
        const PropertyTable* pt = nullptr;
        if (auto it = m.object_property_map.find(a.predicate); it != m.object_property_map.end()) {
          pt = &it->second;
        } else if (auto jt = m.data_property_map.find(a.predicate); jt != m.data_property_map.end()) {
          pt = &jt->second;
        } else {
          throw Error(ErrorCode::UnmappedSymbol, "property '" + a.predicate + "' is not mapped");
        }
        table = pt->table;
        cols = {pt->subject_column, pt->object_column};
      }
      from.push_back(table + " " + alias);
      for (std::size_t k = 0; k < a.args.size(); ++k) {
        const std::string col = alias + "." + cols[k];
        const Term& t = a.args[k];
        if (!t.is_var()) {
          where.push_back(col + " = " + sql::quote(t.name));
        } else if (auto [it, inserted] = first.try_emplace(t.name, col); !inserted) {
          where.push_back(it->second + " = " + col);
        }
      }
    }
    std::vector<std::string> items;
    for (const auto& h : q.head) {
      if (!h.is_var()) {
        items.push_back(sql::quote(h.name));
        continue;
      }
      auto it = first.find(h.name);
      if (it == first.end()) {
        throw Error(ErrorCode::UnboundHeadVariable, "head variable ?" + h.name + " has no binding");
      }
      items.push_back(it->second);
    }

    if (d > 0) sql += " UNION ";
    sql += "SELECT DISTINCT ";
    for (std::size_t i = 0; i < items.size(); ++i) sql += (i ? ", " : "") + items[i];
    sql += " FROM ";
    for (std::size_t i = 0; i < from.size(); ++i) sql += (i ? ", " : "") + from[i];
    if (!where.empty()) {
      sql += " WHERE ";
      for (std::size_t i = 0; i < where.size(); ++i) sql += (i ? " AND " : "") + where[i];
    }
  }
  return {std::move(sql)};
}

ResultSet certain_answers(const ConjunctiveQuery& q, const Ontology& o, const DataStore& store) {
  const UnionOfCQs u = perfect_rewrite(q, o);
  ResultSet r = store.execute(compile_to_sql(u, store.mapping()));
  r.arity = q.head.size();
  return r;
}

}  // namespace ose
