#include <gtest/gtest.h>

#include <filesystem>
#include <functional>
#include <random>

#include "ose/ddss.hpp"
#include "ose/error.hpp"
#include "ose/fixtures.hpp"
#include "oracles.hpp"

namespace ose::ddss {
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

const Ontology& hvac() {
  static const Ontology o = parse_ontology(fixtures::hvac_ontology());
  return o;
}

DDSSBundle bundle_for(std::string_view graph) { return generate_ddss(hvac(), parse_rule_graph(graph)); }

std::vector<EventRecord> feed(Ddss& d, const std::vector<double>& values, const std::string& source = "s1") {
  std::vector<EventRecord> out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    d.ingest_event({"IncomingEvent", static_cast<std::int64_t>(i + 1), source, values[i], ""});
    for (auto& r : d.step_engine()) out.push_back(std::move(r));
  }
  return out;
}

constexpr std::string_view kMeanGraph = R"(
actor temp Source(s1)
actor avg MovingAverage(4)
actor out Sink(DescriptorEvent, meanTemperature)
edge temp.out -> avg.in
edge avg.out -> out.in
)";

TEST(RuleGraph, ParsesFixture) {
  const DataflowGraph g = parse_rule_graph(fixtures::hvac_threshold_graph());
  ASSERT_EQ(g.actors.size(), 4u);
  EXPECT_EQ(g.actors[1], (Actor{"high", ActorKind::Threshold, {"80"}}));
  EXPECT_EQ(g.edges.size(), 3u);
  EXPECT_EQ(g.edges[0], (Edge{{"temp", "out"}, {"high", "in"}}));
  EXPECT_EQ(parse_rule_graph(print_rule_graph(g)), g);
  EXPECT_TRUE(stage_order_violations(g).empty());
}

TEST(RuleGraph, Errors) {
  EXPECT_EQ(code_of([] { parse_rule_graph("actor a Blender(1)\n"); }), ErrorCode::SyntaxError);
  EXPECT_EQ(code_of([] { parse_rule_graph("actor a Source(s1)\nactor a Source(s2)\n"); }), ErrorCode::SyntaxError);
  EXPECT_EQ(code_of([] { parse_rule_graph("actor a Source(s1)\nactor k Sink(AlarmEvent, x)\nedge a.out -> k.nope\n"); }),
            ErrorCode::SyntaxError);
  EXPECT_EQ(code_of([] {
              parse_rule_graph(
                  "actor a Source(s1)\nactor b Source(s2)\nactor k Sink(AlarmEvent, x)\n"
                  "edge a.out -> k.in\nedge b.out -> k.in\n");
            }),
            ErrorCode::SyntaxError);
  EXPECT_EQ(code_of([] {
              parse_rule_graph(
                  "actor a Source(s1)\nactor t Threshold(1)\nactor m MovingAverage(2)\nactor k Sink(AlarmEvent, x)\n"
                  "edge a.out -> t.in\nedge t.out -> m.in\nedge m.out -> k.in\n");
            }),
            ErrorCode::TypeMismatch);
  EXPECT_EQ(code_of([] {
              parse_rule_graph(
                  "actor a Source(s1)\nactor c Comparator(gt)\nactor d MovingAverage(2)\nactor k Sink(AlarmEvent, x)\n"
                  "edge a.out -> c.a\nedge d.out -> c.b\nedge c.out -> k.in\nedge d.out -> d.in\n");
            }),
            ErrorCode::CycleDetected);
  EXPECT_EQ(code_of([] { parse_rule_graph("actor a Source(s1)\nactor t Threshold(1)\nedge a.out -> t.in\n"); }),
            ErrorCode::UnboundSink);
  EXPECT_EQ(code_of([] { parse_rule_graph("actor t Threshold(1)\nactor k Sink(AlarmEvent, x)\nedge t.out -> k.in\n"); }),
            ErrorCode::UnboundSource);
  EXPECT_EQ(code_of([] { parse_rule_graph("actor a Source(s1)\nactor k Sink()\nedge a.out -> k.in\n"); }),
            ErrorCode::UnboundSink);
}

TEST(RuleGraph, StageOrder) {
  const DataflowGraph g = parse_rule_graph(
      "actor a Source(s1)\nactor h HealthScore(5)\nactor t Threshold(0.5)\nactor k Sink(AlarmEvent, highTemperature)\n"
      "actor s StateDetector(0, 1)\n"
      "edge a.out -> s.in\nedge s.out -> h.in\nedge h.out -> t.in\nedge t.out -> k.in\n");
  EXPECT_EQ(stage_order_violations(g).size(), 1u);
  EXPECT_EQ(code_of([&] { generate_ddss(hvac(), g); }), ErrorCode::InvalidParams);
}

TEST(Generate, EndpointsFollowEventPartition) {
  const DDSSBundle b = bundle_for(fixtures::hvac_threshold_graph());
  EXPECT_EQ(endpoint_completeness(b), std::nullopt);
  std::vector<std::string> paths;
  for (const auto& e : b.endpoints) paths.push_back(e.path);
  std::sort(paths.begin(), paths.end());
  EXPECT_EQ(paths, (std::vector<std::string>{"/diagnostics/AlarmEvent", "/diagnostics/DescriptorEvent",
                                             "/diagnostics/FaultEvent", "/events/IncomingEvent"}));
  EXPECT_EQ(leaf_subclasses(hvac(), "OutgoingEvent"),
            (std::vector<std::string>{"AlarmEvent", "DescriptorEvent", "FaultEvent"}));
  EXPECT_NE(b.schema.find("datasource"), nullptr);
}

TEST(Generate, DeterministicDigest) {
  const DDSSBundle a = bundle_for(fixtures::hvac_threshold_graph());
  const DDSSBundle b = bundle_for(fixtures::hvac_threshold_graph());
  EXPECT_EQ(a.digest, b.digest);
  EXPECT_EQ(a.manifest(), b.manifest());
  EXPECT_NE(bundle_for(kMeanGraph).digest, a.digest);
}

TEST(Generate, CompletenessDetectsMissingEndpoint) {
  DDSSBundle b = bundle_for(fixtures::hvac_threshold_graph());
  b.endpoints.pop_back();
  EXPECT_TRUE(endpoint_completeness(b).has_value());
}

TEST(Generate, RequiresDynamicPart) {
  const Ontology plant = parse_ontology("Class(System) Class(DataSource) Individual(s1) ClassAssertion(s1 DataSource)");
  EXPECT_EQ(code_of([&] { generate_ddss(plant, parse_rule_graph(fixtures::hvac_threshold_graph())); }),
            ErrorCode::MissingDynamicPart);
}

TEST(Generate, BindingErrors) {
  EXPECT_EQ(code_of([] { bundle_for("actor a Source(hvac1)\nactor k Sink(AlarmEvent, highTemperature)\nedge a.out -> k.in\n"); }),
            ErrorCode::UnknownDataSource);
  EXPECT_EQ(code_of([] { bundle_for("actor a Source(s1)\nactor k Sink(OutgoingEvent, highTemperature)\nedge a.out -> k.in\n"); }),
            ErrorCode::UnboundEventClass);
  EXPECT_EQ(code_of([] { bundle_for("actor a Source(s1)\nactor k Sink(AlarmEvent, s2)\nedge a.out -> k.in\n"); }),
            ErrorCode::UnboundSink);
}

TEST(Bundle, WriteLoadRoundTrip) {
  const DDSSBundle b = bundle_for(fixtures::hvac_threshold_graph());
  const auto dir = std::filesystem::temp_directory_path() / "ose_bundle_test";
  std::filesystem::remove_all(dir);
  write_bundle(b, dir.string());
  for (const char* f : {"manifest.json", "schema.sql", "ontology.onto", "rules.graph"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  }
  EXPECT_EQ(load_bundle(dir.string()), b);
  std::filesystem::remove_all(dir);
}

TEST(WireEvent, ParsesAndRejects) {
  const WireEvent e = parse_wire_event(R"({"class":"IncomingEvent","t":"1970-01-01T00:01:00Z","source":"s1","value":81.5})");
  EXPECT_EQ(e.t, 60);
  EXPECT_EQ(e.value, 81.5);
  EXPECT_EQ(parse_wire_event(R"({"class":"IncomingEvent","t":5,"source":"s1","value":"off"})").text, "off");
  for (const char* bad : {"[1]", "{", R"({"class":"IncomingEvent","t":-1,"source":"s1"})",
                          R"({"class":"IncomingEvent","t":true,"source":"s1"})",
                          R"({"class":"IncomingEvent","t":1,"source":"s1","value":[1]})"}) {
    EXPECT_EQ(code_of([&] { parse_wire_event(bad); }), ErrorCode::MalformedEvent) << bad;
  }
}

TEST(Runtime, DebouncedThresholdRaisesOneAlarmPerCrossing) {
  Ddss d(bundle_for(fixtures::hvac_threshold_graph()));
  const auto out = feed(d, {75, 85, 86, 87, 88, 70, 90, 91, 60, 81, 82, 83});
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].t, 4);
  EXPECT_EQ(out[0].event_class, "AlarmEvent");
  EXPECT_EQ(out[0].indicator, "highTemperature");
  EXPECT_EQ(out[0].source, "s1");
  EXPECT_EQ(out[1].t, 12);
  EXPECT_EQ(check_outgoing(out, hvac()), std::nullopt);
  EXPECT_EQ(d.diagnostics("AlarmEvent", 4).size(), 1u);
  EXPECT_EQ(d.diagnostics("AlarmEvent", 0).size(), 2u);
  EXPECT_TRUE(d.diagnostics("FaultEvent", 0).empty());
}

TEST(Runtime, MovingAverageMatchesWindowedMeans) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> value(0, 100);
  std::vector<double> v(60);
  for (auto& x : v) x = value(rng);
  Ddss d(bundle_for(kMeanGraph));
  const auto out = feed(d, v);
  const auto expected = testing::windowed_means(v, 4);
  ASSERT_EQ(out.size(), expected.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    ASSERT_TRUE(out[i].value.has_value());
    EXPECT_NEAR(*out[i].value, expected[i], 1e-9);
    EXPECT_EQ(out[i].t, static_cast<std::int64_t>(i + 4));
  }
}

TEST(Runtime, PersistsEveryEvent) {
  Ddss d(bundle_for(fixtures::hvac_threshold_graph()));
  const auto out = feed(d, {81, 82, 83, 84});
  ASSERT_EQ(out.size(), 1u);
  const ResultSet in = d.store().execute("SELECT t0.id FROM incomingevent t0");
  EXPECT_EQ(in.size(), 4u);
  EXPECT_EQ(d.store().execute("SELECT t0.id FROM alarmevent t0").size(), 1u);
  EXPECT_EQ(d.store().execute("SELECT t0.o FROM generates t0").size(), 4u);
  EXPECT_EQ(d.store().execute("SELECT t0.s FROM reports t0 WHERE t0.o = 'highTemperature'").size(), 1u);
}

TEST(Runtime, RejectsBadEvents) {
  Ddss d(bundle_for(fixtures::hvac_threshold_graph()));
  d.ingest_event({"IncomingEvent", 10, "s1", 1.0, ""});
  EXPECT_EQ(code_of([&] { d.ingest_event({"IncomingEvent", 9, "s1", 1.0, ""}); }), ErrorCode::NonMonotoneTimestamp);
  EXPECT_EQ(code_of([&] { d.ingest_event({"AlarmEvent", 11, "s1", 1.0, ""}); }), ErrorCode::UnknownEventClass);
  EXPECT_EQ(code_of([&] { d.ingest_event({"IncomingEvent", 11, "nowhere", 1.0, ""}); }), ErrorCode::UnknownDataSource);
  EXPECT_NO_THROW(d.ingest_event({"IncomingEvent", 5, "s2", 1.0, ""}));
  EXPECT_EQ(d.queued(), 2u);
  EXPECT_EQ(code_of([&] { d.diagnostics("IncomingEvent", 0); }), ErrorCode::UnknownEventClass);
}

TEST(Runtime, NonNumericInputIsReportedAsDegraded) {
  Ddss d(bundle_for(fixtures::hvac_threshold_graph()));
  d.ingest_event({"IncomingEvent", 1, "s1", std::nullopt, "sensor fault"});
  const auto out = d.step_engine();
  ASSERT_EQ(out.size(), 1u);
  EXPECT_TRUE(out[0].degraded);
  EXPECT_EQ(out[0].event_class, "DescriptorEvent");
  EXPECT_EQ(out[0].indicator, "degradedInput");
  EXPECT_EQ(check_outgoing(out, hvac()), std::nullopt);
}

TEST(CheckOutgoing, FlagsUndeclaredReferences) {
  EventRecord r{"out1", Direction::Out, "AlarmEvent", 5, "s1", 90.0, "", "highTemperature", false};
  EXPECT_EQ(check_outgoing({r}, hvac()), std::nullopt);
  r.source = "ghost";
  EXPECT_TRUE(check_outgoing({r}, hvac()).has_value());
  r.source = "s1";
  r.indicator = "s2";
  EXPECT_TRUE(check_outgoing({r}, hvac()).has_value());
}

}  // namespace
}  // namespace ose::ddss
