#include <gtest/gtest.h>

#include <algorithm>
#include <functional>
#include <random>
#include <set>

#include "ose/datastore.hpp"
#include "ose/error.hpp"
#include "ose/fixtures.hpp"
#include "ose/query.hpp"
#include "ose/rewrite.hpp"
#include "ose/sql.hpp"
#include "oracles.hpp"
#include "random_instances.hpp"

namespace ose {
namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no ose::Error thrown";
  return ErrorCode::Io;
}

DataStore store_for(const Ontology& o) {
  auto [schema, mapping] = generate_schema(o);
  DataStore store(std::move(schema), std::move(mapping));
  store.ingest(o.abox);
  return store;
}

std::size_t count_occurrences(const std::string& s, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = s.find(needle); pos != std::string::npos; pos = s.find(needle, pos + 1)) ++n;
  return n;
}

const Ontology& ils() {
  static const Ontology o = parse_ontology(fixtures::ils_ontology());
  return o;
}

TEST(ParseCq, SingleClassAtom) {
  const ConjunctiveQuery q = parse_cq("SELECT ?x WHERE { ?x a ITU }", ils());
  ASSERT_EQ(q.atoms.size(), 1u);
  EXPECT_EQ(q.atoms[0], Atom::cls("ITU", Term::var("x")));
  EXPECT_EQ(q.head, std::vector<Term>{Term::var("x")});
}

TEST(ParseCq, UnloadKpiShape) {
  const ConjunctiveQuery q =
      parse_cq("SELECT ?e ?t WHERE { ?e a Event . ?e occursAt ?t . ?t a Terminal }", ils());
  EXPECT_EQ(q.atoms.size(), 3u);
  EXPECT_EQ(q.atoms[1], Atom::property("occursAt", Term::var("e"), Term::var("t")));
}

TEST(ParseCq, ErrorsAreTyped) {
  EXPECT_EQ(code_of([] { parse_cq("SELECT ?x WHERE { }", ils()); }), ErrorCode::UnboundHeadVariable);
  EXPECT_EQ(code_of([] { parse_cq("SELECT ?x WHERE { ?x a Unicorn }", ils()); }), ErrorCode::UndeclaredName);
  EXPECT_EQ(code_of([] { parse_cq("SELECT ?x WHERE { ?x a ITU ", ils()); }), ErrorCode::SyntaxError);
  EXPECT_EQ(code_of([] { parse_cq("SELECT ?x { ?x a ITU }", ils()); }), ErrorCode::SyntaxError);
}

TEST(ParseCq, ConstantsAndLiterals) {
  const Ontology o = parse_ontology(fixtures::e414_ontology());
  const ConjunctiveQuery q = parse_cq(R"(SELECT DISTINCT ?o WHERE { ?o isAt "_130degrees" })", o);
  ASSERT_EQ(q.atoms.size(), 1u);
  EXPECT_EQ(q.atoms[0].args[1], Term::constant("_130degrees"));
}

TEST(PerfectRewrite, SubclassExpansion) {
  const Ontology o = parse_ontology("Class(A) Class(B) SubClassOf(A B)");
  const UnionOfCQs u = perfect_rewrite(parse_cq("SELECT ?x WHERE { ?x a B }", o), o);
  ASSERT_EQ(u.disjuncts.size(), 2u);
  std::vector<std::string> shown;
  for (const auto& d : u.disjuncts) shown.push_back(to_string(d));
  std::sort(shown.begin(), shown.end());
  EXPECT_EQ(shown, (std::vector<std::string>{"q(?x) <- A(?x)", "q(?x) <- B(?x)"}));
}

TEST(PerfectRewrite, DomainYieldsPropertyDisjunct) {
  const Ontology o = parse_ontology("Class(C) ObjectProperty(p) Domain(p C)");
  const UnionOfCQs u = perfect_rewrite(parse_cq("SELECT ?x WHERE { ?x a C }", o), o);
  const bool has_p = std::any_of(u.disjuncts.begin(), u.disjuncts.end(), [](const ConjunctiveQuery& d) {
    return d.atoms.size() == 1 && d.atoms[0].predicate == "p" && d.atoms[0].args[0] == Term::var("x");
  });
  EXPECT_TRUE(has_p);
}

TEST(PerfectRewrite, EmptyTBoxIsIdentity) {
  const Ontology o = parse_ontology("Class(A) ObjectProperty(p)");
  const ConjunctiveQuery q = parse_cq("SELECT ?x WHERE { ?x a A . ?x p ?y }", o);
  const UnionOfCQs u = perfect_rewrite(q, o);
  ASSERT_EQ(u.disjuncts.size(), 1u);
  EXPECT_EQ(canonicalize(u.disjuncts[0]), canonicalize(q));
}

TEST(PerfectRewrite, RejectsConditionalTypes) {
  const Ontology o = parse_ontology(fixtures::e414_ontology());
  EXPECT_EQ(code_of([&] { perfect_rewrite(parse_cq("SELECT ?x WHERE { ?x a Fault }", o), o); }),
            ErrorCode::NonQLAxiomEncountered);
}

TEST(PerfectRewrite, TerminatesWithBoundedDisjuncts) {
  for (std::uint64_t seed = 0; seed < 80; ++seed) {
    const auto inst = testing::random_instance(seed, {15, 8, 25, 10, 4});
    const UnionOfCQs u = perfect_rewrite(inst.query, inst.ontology);
    ASSERT_FALSE(u.disjuncts.empty());
    std::set<ConjunctiveQuery> canonical;
    for (const auto& d : u.disjuncts) {
      EXPECT_LE(d.atoms.size(), inst.query.atoms.size()) << "seed " << seed;
      EXPECT_EQ(d.head.size(), inst.query.head.size());
      EXPECT_TRUE(canonical.insert(canonicalize(d)).second) << "seed " << seed << " duplicate " << to_string(d);
    }
  }
}

TEST(Canonicalize, RenamingInvariant) {
  const Ontology o = parse_ontology("Class(A) ObjectProperty(p)");
  const ConjunctiveQuery a = parse_cq("SELECT ?x WHERE { ?x p ?y . ?y a A }", o);
  const ConjunctiveQuery b = parse_cq("SELECT ?x WHERE { ?z a A . ?x p ?z }", o);
  EXPECT_EQ(canonicalize(a), canonicalize(b));
}

TEST(CompileToSql, SingleTableScan) {
  const auto [schema, mapping] = generate_schema(ils());
  const UnionOfCQs u{{parse_cq("SELECT ?x WHERE { ?x a ITU }", ils())}};
  EXPECT_EQ(compile_to_sql(u, mapping).text, "SELECT DISTINCT t0.id FROM itu t0");
}

TEST(CompileToSql, TwoDisjunctsOneUnion) {
  const Ontology o = parse_ontology(fixtures::tiny_ontology());
  const auto [schema, mapping] = generate_schema(o);
  const UnionOfCQs u = perfect_rewrite(parse_cq("SELECT ?x WHERE { ?x a Fault }", o), o);
  EXPECT_EQ(count_occurrences(compile_to_sql(u, mapping).text, " UNION "), 1u);
}

TEST(CompileToSql, JoinMatchesNestedLoopAndUcqEvaluation) {
  Ontology o = ils();
  o = parse_ontology(R"(
    Individual(T1) Individual(T2) Individual(e1) Individual(e2) Individual(e3)
    ClassAssertion(T1 Terminal)
    ObjectAssertion(e1 occursAt T1) ObjectAssertion(e2 occursAt T2) ObjectAssertion(e3 occursAt T1)
  )",
                     o);
  const DataStore store = store_for(o);
  const ConjunctiveQuery q = parse_cq("SELECT ?e ?t WHERE { ?e occursAt ?t . ?t a Terminal }", o);
  const SqlText sql = compile_to_sql(UnionOfCQs{{q}}, store.mapping());
  EXPECT_EQ(sql.text, "SELECT DISTINCT t0.s, t0.o FROM occursat t0, terminal t1 WHERE t0.o = t1.id");
  const ResultSet got = store.execute(sql);
  EXPECT_EQ(got, testing::nested_loop(sql::parse(sql.text), store));
  EXPECT_EQ(got, evaluate_cq(q, o.abox));
  EXPECT_EQ(got.rows, (std::set<std::vector<std::string>>{{"e1", "T1"}, {"e3", "T1"}}));
}

TEST(CompileToSql, UnmappedSymbol) {
  const Ontology o = parse_ontology("Class(A) Class(B)");
  const auto [schema, mapping] = generate_schema(parse_ontology("Class(A)"));
  const UnionOfCQs u{{parse_cq("SELECT ?x WHERE { ?x a B }", o)}};
  EXPECT_EQ(code_of([&] { compile_to_sql(u, mapping); }), ErrorCode::UnmappedSymbol);
}

TEST(CertainAnswers, PriorityFaultIsAFault) {
  const Ontology o = parse_ontology(fixtures::tiny_ontology());
  const ResultSet r = certain_answers(parse_cq("SELECT ?x WHERE { ?x a Fault }", o), o, store_for(o));
  EXPECT_EQ(r.rows, (std::set<std::vector<std::string>>{{"f1"}}));
}

TEST(CertainAnswers, EmptyAbox) {
  const ResultSet r = certain_answers(parse_cq("SELECT ?x WHERE { ?x a ITU }", ils()), ils(), store_for(ils()));
  EXPECT_TRUE(r.empty());
}

TEST(CertainAnswers, EmptyTBoxEqualsDirectEvaluation) {
  for (std::uint64_t seed = 300; seed < 330; ++seed) {
    auto inst = testing::random_instance(seed, {15, 8, 25, 60, 4});
    inst.ontology.tbox.clear();
    const ResultSet r = certain_answers(inst.query, inst.ontology, store_for(inst.ontology));
    EXPECT_EQ(r, evaluate_cq(inst.query, inst.ontology.abox)) << "seed " << seed;
  }
}

TEST(CertainAnswers, MonotoneInAbox) {
  for (std::uint64_t seed = 400; seed < 420; ++seed) {
    auto inst = testing::random_instance(seed, {15, 8, 25, 40, 4});
    const ResultSet before = certain_answers(inst.query, inst.ontology, store_for(inst.ontology));
    std::mt19937_64 rng(seed);
    Ontology more = inst.ontology;
    testing::add_random_abox(more, rng, 40);
    const ResultSet after = certain_answers(inst.query, more, store_for(more));
    EXPECT_TRUE(std::includes(after.rows.begin(), after.rows.end(), before.rows.begin(), before.rows.end()))
        << "seed " << seed;
  }
}

TEST(CertainAnswers, AgreesWithChaseOnRandomInstances) {
  for (std::uint64_t seed = 1000; seed < 1040; ++seed) {
    const auto inst = testing::random_instance(seed, {15, 8, 25, 60, 4});
    const ResultSet expected = chase_oracle(inst.query, inst.ontology);
    EXPECT_EQ(certain_answers(inst.query, inst.ontology, store_for(inst.ontology)), expected)
        << "seed " << seed << ": " << to_string(inst.query);
  }
}

TEST(ChaseOracle, ExistentialWitnessForNonHeadVariable) {
  const Ontology o = parse_ontology("Class(C) ObjectProperty(p) SubClassOf(C Exists(p)) Individual(a) ClassAssertion(a C)");
  EXPECT_EQ(chase_oracle(parse_cq("SELECT ?x WHERE { ?x p ?y }", o), o).rows,
            (std::set<std::vector<std::string>>{{"a"}}));
  EXPECT_TRUE(chase_oracle(parse_cq("SELECT ?x ?y WHERE { ?x p ?y }", o), o).empty());
}

TEST(ChaseOracle, RejectsLargeInstancesAndRules) {
  Ontology big = parse_ontology("Class(C)");
  for (int i = 0; i < 10001; ++i) {
    big.individuals.insert("i" + std::to_string(i));
    big.abox.emplace_back(ClassAssertion{"i" + std::to_string(i), "C"});
  }
  EXPECT_EQ(code_of([&] { chase_oracle(parse_cq("SELECT ?x WHERE { ?x a C }", big), big); }),
            ErrorCode::InstanceTooLarge);
  const Ontology e414 = parse_ontology(fixtures::e414_ontology());
  EXPECT_EQ(code_of([&] { chase_oracle(parse_cq("SELECT ?x WHERE { ?x a Fault }", e414), e414); }),
            ErrorCode::NonQLAxiomEncountered);
}

}  // namespace
}  // namespace ose
